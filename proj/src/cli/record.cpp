#include "record.hpp"

#include <cstdio>
#include <sstream>

namespace bellopt::cli {

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty())
    throw Error(ErrorCode::invalid_input, "expected a non-empty matrix");
  Matrix m(Index(j.size()), Index(j[0].size()));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != j[0].size())
      throw Error(ErrorCode::invalid_input, "ragged matrix in record");
    for (std::size_t c = 0; c < j[r].size(); ++c)
      m(Index(r), Index(c)) = j[r][c].get<double>();
  }
  return m;
}

namespace {

Json operator_json(const HermitianOperator& op) {
  return Json{{"re", to_json(Matrix(op.matrix().real()))},
              {"im", to_json(Matrix(op.matrix().imag()))}};
}

HermitianOperator operator_from_json(const Json& j) {
  const Matrix re = matrix_from_json(j.at("re"));
  const Matrix im = matrix_from_json(j.at("im"));
  if (re.rows() != im.rows() || re.cols() != im.cols())
    throw Error(ErrorCode::invalid_input, "operator parts differ in shape");
  CMatrix m(re.rows(), re.cols());
  m.real() = re;
  m.imag() = im;
  return HermitianOperator(std::move(m));
}

}  // namespace

Json to_json(const EprConfiguration& cfg) {
  Json a = Json::array(), b = Json::array();
  for (const auto& op : cfg.alice()) a.push_back(operator_json(op));
  for (const auto& op : cfg.bob()) b.push_back(operator_json(op));
  return Json{{"alice", std::move(a)}, {"bob", std::move(b)}};
}

EprConfiguration configuration_from_json(const Json& j) {
  std::vector<HermitianOperator> a, b;
  for (const auto& op : j.at("alice")) a.push_back(operator_from_json(op));
  for (const auto& op : j.at("bob")) b.push_back(operator_from_json(op));
  return EprConfiguration(std::move(a), std::move(b));
}

Json to_json(const CorrelationReport& r) {
  return Json{{"bell_expectation", r.bell_expectation},
              {"entropy", r.entropy},
              {"trace_norm", r.trace_norm},
              {"schmidt_norm", r.schmidt_norm},
              {"op_norm", r.op_norm},
              {"schmidt_rank", r.schmidt_rank},
              {"abs_cos_theta", r.abs_cos_theta},
              {"opening_angle_deg", r.opening_angle_deg},
              {"is_extreme", r.is_extreme},
              {"singular_values", to_json(r.singular_values)},
              {"correlation", to_json(r.matrix)}};
}

Json to_json(const SearchResult& r, const WeightMatrix& w, double target) {
  const ExtremeAnalysis& a = r.analysis;
  Json reports = Json::array();
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    Json rep{{"eigen_index", a.spectral.max_index_set[i]}};
    rep.update(to_json(a.reports[i]));
    reports.push_back(std::move(rep));
  }
  const LocalityReport loc = quantum_locality_check(r.best_config);
  return Json{
      {"best_fitness", r.best_fitness},
      {"thm1_bound", w.dim_scale() * w.op_norm()},
      {"thm1_deviation", a.thm1_deviation},
      {"sum_rule_deviation", a.sum_rule_deviation},
      {"target", target},
      {"target_met", a.thm1_deviation <= target},
      {"generations_run", r.generations_run},
      {"polish_gain", r.polish_gain},
      {"pairing_deviation", a.spectral.pairing_deviation},
      {"extreme_count", a.extreme_count},
      {"hilbert_dim", a.spectral.eigenvalues.size()},
      {"square_identity_deviation", a.square_identity_deviation},
      {"norm_means", Json{{"a", a.means.a}, {"b", a.means.b}}},
      {"locality",
       Json{{"alice_commuting", loc.alice_commuting},
            {"bob_commuting", loc.bob_commuting},
            {"max_commutator_norm", loc.max_commutator_norm}}},
      {"eigenvalues", to_json(a.spectral.eigenvalues)},
      {"max_index_set", a.spectral.max_index_set},
      {"reports", std::move(reports)},
      {"fitness_trace", r.fitness_trace}};
}

std::string format_scalar(const Json& v) {
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

namespace {

void flatten(const Json& j, const std::string& prefix,
             std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i)
      flatten(j[i], prefix + "." + std::to_string(i), out);
  } else {
    out.emplace_back(prefix, format_scalar(j));
  }
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::string md_cell(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|')
      out += "\\|";
    else if (c == '\n')
      out += "<br>";
    else
      out += c;
  }
  return out;
}

}  // namespace

std::string render(const Document& doc, Format format) {
  std::ostringstream os;
  if (format == Format::json) {
    os << doc.record.dump(2) << "\n";
    return os.str();
  }
  Table table;
  if (doc.table) {
    table = *doc.table;
  } else {
    std::vector<std::pair<std::string, std::string>> kv;
    flatten(doc.record, "", kv);
    table.header = {"field", "value"};
    for (auto& [k, v] : kv) table.rows.push_back(Json::array({k, v}));
  }
  if (format == Format::csv) {
    for (std::size_t i = 0; i < table.header.size(); ++i)
      os << (i ? "," : "") << csv_cell(table.header[i]);
    os << "\n";
    for (const auto& row : table.rows) {
      for (std::size_t i = 0; i < row.size(); ++i)
        os << (i ? "," : "") << csv_cell(format_scalar(row[i]));
      os << "\n";
    }
    return os.str();
  }
  if (!doc.title.empty()) os << "# " << doc.title << "\n\n";
  os << "|";
  for (const auto& h : table.header) os << " " << md_cell(h) << " |";
  os << "\n|";
  for (std::size_t i = 0; i < table.header.size(); ++i) os << "---|";
  os << "\n";
  for (const auto& row : table.rows) {
    os << "|";
    for (const auto& cell : row) os << " " << md_cell(format_scalar(cell)) << " |";
    os << "\n";
  }
  return os.str();
}

}  // namespace bellopt::cli
