#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "bellopt/cli.hpp"

namespace bellopt::cli {

namespace {

[[noreturn]] void fail_at(const std::string& source, std::size_t line,
                          std::size_t col, const std::string& what) {
  std::ostringstream os;
  os << source << ":" << line << ":" << col << ": " << what;
  throw Error(ErrorCode::invalid_input, os.str());
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
std::optional<T> parse_number(std::string_view s) {
  T v{};
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

// Tokens of a line with their 1-based starting columns.
std::vector<std::pair<std::string_view, std::size_t>> tokens(std::string_view line,
                                                             std::string_view seps) {
  std::vector<std::pair<std::string_view, std::size_t>> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (seps.find(line[i]) != std::string_view::npos) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < line.size() && seps.find(line[j]) == std::string_view::npos) ++j;
    out.emplace_back(line.substr(i, j - i), i + 1);
    i = j;
  }
  return out;
}

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

Format parse_format(const std::string& text) {
  if (text == "json") return Format::json;
  if (text == "csv") return Format::csv;
  if (text == "md") return Format::md;
  throw Error(ErrorCode::invalid_input,
              "unknown format '" + text + "' (expected json, csv or md)");
}

std::uint64_t fnv1a64(std::string_view data) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Matrix parse_matrix_text(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::size_t offset = 0;
  while (offset <= text.size()) {
    const auto stop = std::min(text.find(';', offset), text.size());
    const std::string_view row = text.substr(offset, stop - offset);
    std::vector<double> values;
    for (auto [tok, col] : tokens(row, " \t,")) {
      auto v = parse_number<double>(tok);
      if (!v || !std::isfinite(*v))
        fail_at("--matrix", 1, offset + col,
                "expected a real number, got '" + std::string(tok) + "'");
      values.push_back(*v);
    }
    if (!values.empty()) rows.push_back(std::move(values));
    offset = stop + 1;
  }
  if (rows.empty()) throw Error(ErrorCode::invalid_input, "--matrix is empty");
  Matrix m(Index(rows.size()), Index(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size())
      throw Error(ErrorCode::invalid_input,
                  "--matrix rows have different lengths");
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(Index(i), Index(j)) = rows[i][j];
  }
  return m;
}

Matrix parse_weights_text(std::string_view text, const std::string& source) {
  std::vector<std::string_view> lines;
  for (std::size_t offset = 0; offset < text.size();) {
    auto stop = text.find('\n', offset);
    if (stop == std::string_view::npos) stop = text.size();
    lines.push_back(text.substr(offset, stop - offset));
    offset = stop + 1;
  }
  std::size_t ln = 0;
  auto next_content = [&]() -> bool {
    while (ln < lines.size() && trim(lines[ln]).empty()) ++ln;
    return ln < lines.size();
  };
  if (!next_content()) fail_at(source, 1, 1, "empty weight file");
  const auto header = tokens(lines[ln], " \t\r");
  if (header.size() != 2)
    fail_at(source, ln + 1, 1, "header must be 'N_a N_b'");
  Index dims[2];
  for (int i = 0; i < 2; ++i) {
    auto v = parse_number<long>(header[std::size_t(i)].first);
    if (!v || *v < 2)
      fail_at(source, ln + 1, header[std::size_t(i)].second,
              "dimension must be an integer >= 2");
    dims[i] = Index(*v);
  }
  ++ln;
  Matrix m(dims[0], dims[1]);
  for (Index r = 0; r < dims[0]; ++r, ++ln) {
    if (!next_content())
      fail_at(source, ln + 1, 1,
              "expected " + std::to_string(dims[0]) + " rows, found " +
                  std::to_string(r));
    const auto row = tokens(lines[ln], " \t\r");
    if (Index(row.size()) != dims[1])
      fail_at(source, ln + 1, 1,
              "row has " + std::to_string(row.size()) + " entries, expected " +
                  std::to_string(dims[1]));
    for (Index c = 0; c < dims[1]; ++c) {
      auto [tok, col] = row[std::size_t(c)];
      auto v = parse_number<double>(tok);
      if (!v || !std::isfinite(*v))
        fail_at(source, ln + 1, col,
                "expected a real number, got '" + std::string(tok) + "'");
      m(r, c) = *v;
    }
  }
  if (next_content())
    fail_at(source, ln + 1, 1, "unexpected content after the last row");
  return m;
}

Matrix read_weights_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::invalid_input, "cannot read weight file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_weights_text(ss.str(), path);
}

std::string format_weights_text(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << " " << m.cols() << "\n";
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j)
      os << (j ? " " : "") << format_real(m(i, j));
    os << "\n";
  }
  return os.str();
}

WeightMatrix WeightSource::load() const {
  switch (kind) {
    case Kind::chsh: return chsh_weight();
    case Kind::magic3: return magic3_weight();
    case Kind::w00: return w00_weight();
    case Kind::bell: return generate_bell_matrix(bell_order, bell_seed).weight();
    case Kind::matrix: return WeightMatrix(parse_matrix_text(matrix_text));
    case Kind::file: return WeightMatrix(read_weights_file(path));
  }
  throw Error(ErrorCode::invalid_input, "unknown weight source");
}

std::string WeightSource::describe() const {
  switch (kind) {
    case Kind::chsh: return "chsh";
    case Kind::magic3: return "magic3";
    case Kind::w00: return "w00";
    case Kind::bell:
      return "bell:" + std::to_string(bell_order) + ":" + std::to_string(bell_seed);
    case Kind::matrix: return "matrix:" + matrix_text;
    case Kind::file: return "file:" + path;
  }
  return "unknown";
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  using Kind = WeightSource::Kind;
  switch (weight.kind) {
    case Kind::bell:
      os << "weight = bell\nbell_order = " << weight.bell_order
         << "\nbell_seed = " << weight.bell_seed << "\n";
      break;
    case Kind::matrix:
      os << "weight = matrix\nmatrix = " << weight.matrix_text << "\n";
      break;
    case Kind::file:
      os << "weight = file\nweights_file = " << weight.path << "\n";
      break;
    default: os << "weight = " << weight.describe() << "\n";
  }
  os << "dims = " << dims.na_ops << " " << dims.nb_ops << " " << dims.a_dim
     << " " << dims.b_dim << "\n"
     << "population = " << ga.population << "\n"
     << "generations = " << ga.generations << "\n"
     << "tournament_size = " << ga.tournament_size << "\n"
     << "crossover_rate = " << format_real(ga.crossover_rate) << "\n"
     << "mutation_rate = " << format_real(ga.mutation_rate) << "\n"
     << "mutation_sigma = " << format_real(ga.mutation_sigma) << "\n"
     << "elitism = " << ga.elitism << "\n"
     << "seed = " << ga.seed << "\n"
     << "stall_generations = " << ga.stall_generations << "\n"
     << "polish = " << (ga.polish ? "true" : "false") << "\n"
     << "polish_iterations = " << ga.polish_iterations << "\n"
     << "refine_iterations = " << ga.refine_iterations << "\n"
     << "seed_refine_iterations = " << ga.seed_refine_iterations << "\n"
     << "restarts = " << ga.restarts << "\n"
     << "constraint = " << to_string(constraint) << "\n"
     << "target = " << format_real(target) << "\n";
  return os.str();
}

RunConfig parse_run_config(std::string_view text, const std::string& source) {
  RunConfig cfg;
  std::string weight_kind;
  std::optional<Index> bell_order;
  std::optional<std::uint64_t> bell_seed;
  std::optional<std::string> matrix, weights_file;
  std::size_t weight_line = 0;

  const std::filesystem::path base =
      std::filesystem::path(source).has_parent_path()
          ? std::filesystem::path(source).parent_path()
          : std::filesystem::path();

  std::map<std::string, std::size_t> seen;
  std::size_t line_no = 0;
  for (std::size_t offset = 0; offset < text.size();) {
    auto stop = text.find('\n', offset);
    if (stop == std::string_view::npos) stop = text.size();
    const std::string_view raw = text.substr(offset, stop - offset);
    offset = stop + 1;
    ++line_no;

    const std::string_view line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      fail_at(source, line_no, 1, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const std::size_t col = std::size_t(value.data() - raw.data()) + 1;
    if (key.empty()) fail_at(source, line_no, 1, "missing key");
    if (seen.count(key))
      fail_at(source, line_no, 1,
              "duplicate key '" + key + "' (first set on line " +
                  std::to_string(seen[key]) + ")");
    seen[key] = line_no;
    if (value.empty()) fail_at(source, line_no, col, "missing value for '" + key + "'");

    auto bad = [&](const std::string& what) { fail_at(source, line_no, col, what); };
    auto as_index = [&](Index lo) {
      auto v = parse_number<long long>(value);
      if (!v || *v < lo)
        bad("'" + key + "' must be an integer >= " + std::to_string(lo));
      return Index(*v);
    };
    auto as_real = [&]() {
      auto v = parse_number<double>(value);
      if (!v || !std::isfinite(*v)) bad("'" + key + "' must be a finite real");
      return *v;
    };
    auto as_u64 = [&]() {
      auto v = parse_number<std::uint64_t>(value);
      if (!v) bad("'" + key + "' must be an unsigned 64-bit integer");
      return *v;
    };
    auto as_bool = [&]() {
      if (value == "true" || value == "1") return true;
      if (value == "false" || value == "0") return false;
      bad("'" + key + "' must be true or false");
      return false;
    };

    const std::map<std::string, std::function<void()>> handlers = {
        {"weight", [&] { weight_kind = value; weight_line = line_no; }},
        {"bell_order", [&] { bell_order = as_index(2); }},
        {"bell_seed", [&] { bell_seed = as_u64(); }},
        {"matrix", [&] { matrix = std::string(value); }},
        {"weights_file",
         [&] {
           std::filesystem::path p{std::string(value)};
           weights_file = (p.is_relative() ? base / p : p).string();
         }},
        {"dims",
         [&] {
           const auto parts = tokens(value, " \t,");
           if (parts.size() != 4) bad("dims needs four integers: N_a N_b n_a n_b");
           Index d[4];
           for (std::size_t i = 0; i < 4; ++i) {
             auto v = parse_number<long long>(parts[i].first);
             if (!v || *v < 2)
               fail_at(source, line_no, col + parts[i].second - 1,
                       "dims entries must be integers >= 2");
             d[i] = Index(*v);
           }
           cfg.dims = {d[0], d[1], d[2], d[3]};
           cfg.has_dims = true;
         }},
        {"population", [&] { cfg.ga.population = as_index(2); }},
        {"generations", [&] { cfg.ga.generations = as_index(1); }},
        {"tournament_size", [&] { cfg.ga.tournament_size = as_index(1); }},
        {"crossover_rate", [&] { cfg.ga.crossover_rate = as_real(); }},
        {"mutation_rate", [&] { cfg.ga.mutation_rate = as_real(); }},
        {"mutation_sigma", [&] { cfg.ga.mutation_sigma = as_real(); }},
        {"elitism", [&] { cfg.ga.elitism = as_index(0); }},
        {"seed", [&] { cfg.ga.seed = as_u64(); }},
        {"stall_generations", [&] { cfg.ga.stall_generations = as_index(1); }},
        {"polish", [&] { cfg.ga.polish = as_bool(); }},
        {"polish_iterations", [&] { cfg.ga.polish_iterations = as_index(0); }},
        {"refine_iterations", [&] { cfg.ga.refine_iterations = as_index(0); }},
        {"seed_refine_iterations", [&] { cfg.ga.seed_refine_iterations = as_index(0); }},
        {"restarts", [&] { cfg.ga.restarts = as_index(1); }},
        {"constraint",
         [&] {
           try {
             cfg.constraint = parse_constraint(std::string(value));
           } catch (const Error& e) {
             bad(e.what());
           }
         }},
        {"target", [&] {
           cfg.target = as_real();
           if (cfg.target < 0) bad("target must be >= 0");
         }},
        {"format",
         [&] {
           try {
             cfg.format = parse_format(std::string(value));
           } catch (const Error& e) {
             bad(e.what());
           }
         }},
        {"out", [&] { cfg.out = value; }},
        {"threads", [&] { cfg.threads = unsigned(as_index(1)); }},
        {"timestamp", [&] { cfg.timestamp = as_bool(); }},
    };
    const auto h = handlers.find(key);
    if (h == handlers.end()) fail_at(source, line_no, 1, "unknown key '" + key + "'");
    h->second();
  }

  if (!weight_kind.empty()) {
    using Kind = WeightSource::Kind;
    auto need = [&](bool present, const char* what) {
      if (!present)
        fail_at(source, weight_line, 1,
                "weight = " + weight_kind + " requires '" + what + "'");
    };
    auto& w = cfg.weight;
    if (weight_kind == "chsh") {
      w.kind = Kind::chsh;
    } else if (weight_kind == "magic3") {
      w.kind = Kind::magic3;
    } else if (weight_kind == "w00") {
      w.kind = Kind::w00;
    } else if (weight_kind == "bell") {
      need(bell_order.has_value(), "bell_order");
      w.kind = Kind::bell;
      w.bell_order = *bell_order;
      w.bell_seed = bell_seed.value_or(0);
    } else if (weight_kind == "matrix") {
      need(matrix.has_value(), "matrix");
      w.kind = Kind::matrix;
      w.matrix_text = *matrix;
    } else if (weight_kind == "file") {
      need(weights_file.has_value(), "weights_file");
      w.kind = Kind::file;
      w.path = *weights_file;
    } else {
      fail_at(source, weight_line, 1,
              "unknown weight '" + weight_kind +
                  "' (expected chsh, magic3, w00, bell, matrix or file)");
    }
    cfg.has_weight = true;
  }
  cfg.ga.validate();
  return cfg;
}

}  // namespace bellopt::cli
