#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "bellopt/cli.hpp"
#include "bellopt/hvmodel.hpp"
#include "record.hpp"

namespace bellopt::cli {

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "json";
  double tol = 0;
  unsigned threads = 1;
};

void add_common(CLI::App* sub, Common& c, const std::string& tol_help) {
  sub->add_option("--seed", c.seed, "Random seed");
  sub->add_option("--out", c.out, "Write the result to this file instead of stdout");
  sub->add_option("--format", c.format, "Output format: json, csv or md");
  if (!tol_help.empty()) sub->add_option("--tol", c.tol, tol_help);
  sub->add_option("--threads", c.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
}

struct WeightFlags {
  bool chsh = false;
  bool magic3 = false;
  bool w00 = false;
  Index bell = 0;
  std::uint64_t bell_seed = 0;
  std::string matrix;
  std::string file;
};

void add_weight_flags(CLI::App* sub, WeightFlags& f) {
  sub->add_flag("--chsh", f.chsh, "CHSH weight [[1,1],[1,-1]]");
  sub->add_flag("--magic3", f.magic3, "3x3 magic-square weight");
  sub->add_flag("--w00", f.w00, "CHSH ⊗ CHSH weight");
  sub->add_option("--bell", f.bell, "Random Bell matrix of this order (uses --bell-seed or --seed)");
  sub->add_option("--bell-seed", f.bell_seed, "Seed for --bell");
  sub->add_option("--matrix", f.matrix, "Inline matrix, rows separated by ';'");
  sub->add_option("--weights-file", f.file, "Weight file: 'N_a N_b' then rows");
}

WeightSource source_of(WeightSource::Kind k) {
  WeightSource s;
  s.kind = k;
  return s;
}

std::optional<WeightSource> resolve_weight(const CLI::App* sub, const WeightFlags& f,
                                           std::uint64_t seed) {
  std::vector<WeightSource> found;
  using Kind = WeightSource::Kind;
  if (f.chsh) found.push_back(source_of(Kind::chsh));
  if (f.magic3) found.push_back(source_of(Kind::magic3));
  if (f.w00) found.push_back(source_of(Kind::w00));
  if (sub->count("--bell")) {
    WeightSource s = source_of(Kind::bell);
    s.bell_order = f.bell;
    s.bell_seed = sub->count("--bell-seed") ? f.bell_seed : seed;
    found.push_back(s);
  }
  if (sub->count("--matrix")) {
    WeightSource s = source_of(Kind::matrix);
    s.matrix_text = f.matrix;
    found.push_back(s);
  }
  if (sub->count("--weights-file")) {
    WeightSource s = source_of(Kind::file);
    s.path = f.file;
    found.push_back(s);
  }
  if (found.size() > 1)
    throw Error(ErrorCode::invalid_input, "give exactly one weight source");
  if (found.empty()) return std::nullopt;
  return found.front();
}

WeightSource require_weight(const CLI::App* sub, const WeightFlags& f,
                            std::uint64_t seed) {
  auto w = resolve_weight(sub, f, seed);
  if (!w)
    throw Error(ErrorCode::invalid_input,
                "missing weight source (--chsh, --magic3, --w00, --bell N, "
                "--matrix or --weights-file)");
  return *w;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::invalid_input, "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::invalid_input, "cannot write '" + path + "'");
  f << text;
  if (!f) throw Error(ErrorCode::invalid_input, "failed writing '" + path + "'");
}

void emit(const Document& doc, Format format, const std::string& path,
          std::ostream& out) {
  const std::string text = render(doc, format);
  if (path.empty())
    out << text;
  else
    write_text(path, text);
}

Json provenance(std::uint64_t seed, const std::string& canonical, bool stamp) {
  Json p{{"tool", "bellopt"},
         {"version", kToolVersion},
         {"seed", seed},
         {"config_hash", hex64(fnv1a64(canonical))}};
  if (stamp) {
    const std::time_t now = std::chrono::system_clock::to_time_t(
        std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
    p["timestamp"] = buf;
  }
  return p;
}

Json int_vector(const std::vector<int>& v) { return Json(v); }

BoxBounds parse_box(const std::string& text, Index n, const char* name) {
  if (text.empty()) return unit_box(n);
  std::vector<Interval> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw Error(ErrorCode::invalid_input,
                  std::string(name) + " entries must look like lo:hi");
    try {
      std::size_t used = 0;
      const std::string lo = item.substr(0, colon), hi = item.substr(colon + 1);
      Interval iv{std::stod(lo, &used), 0};
      if (used != lo.size()) throw std::invalid_argument(lo);
      iv.hi = std::stod(hi, &used);
      if (used != hi.size()) throw std::invalid_argument(hi);
      parts.push_back(iv);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::invalid_input,
                  std::string(name) + ": cannot parse '" + item + "'");
    }
  }
  if (parts.size() == 1) return BoxBounds(std::size_t(n), parts.front());
  if (Index(parts.size()) != n)
    throw Error(ErrorCode::invalid_input,
                std::string(name) + " needs 1 or " + std::to_string(n) + " intervals");
  return parts;
}

EprDims parse_dims(const std::string& text) {
  std::vector<Index> v;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      const long long x = std::stoll(item, &used);
      if (used != item.size() || x < 2) throw std::invalid_argument(item);
      v.push_back(Index(x));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::invalid_input,
                  "--dims entries must be integers >= 2, got '" + item + "'");
    }
  }
  if (v.size() != 4)
    throw Error(ErrorCode::invalid_input, "--dims needs N_a,N_b,n_a,n_b");
  return {v[0], v[1], v[2], v[3]};
}

// ---------------------------------------------------------------- norms

int cmd_norms(const WeightSource& src, const Common& c, bool tol_given,
              std::ostream& out) {
  const Format fmt = parse_format(c.format);
  const WeightMatrix w = src.load();
  const double tol = tol_given ? c.tol : kZeroGapTol;
  const GapReport gap = quantum_gap(w, tol);
  const TheoremBounds tb = theorem_bounds(w);
  const CornerPair corner = hv_norm_argmax(w);

  Json rec{{"command", "norms"},
           {"source", src.describe()},
           {"weight", to_json(w.matrix())},
           {"op_norm", w.op_norm()},
           {"hv_norm", gap.hv_norm},
           {"schmidt_norm", w.schmidt_norm()},
           {"thm1", tb.thm1},
           {"thm2", tb.thm2},
           {"grothendieck_bound", grothendieck_bound(std::min(w.rows(), w.cols()))},
           {"absolute_gap", gap.absolute_gap},
           {"scaled_gap", gap.scaled_gap},
           {"certificate", nullptr},
           {"hv_argmax", Json{{"a", to_json(corner.a)}, {"b", to_json(corner.b)}}}};
  if (gap.certificate)
    rec["certificate"] = Json{{"d1", int_vector(gap.certificate->d1)},
                              {"d2", int_vector(gap.certificate->d2)}};
  try {
    const BellMatrix x = validate_bell_matrix(w);
    rec["bell_matrix"] = Json{{"order", x.order()},
                              {"minus_count", x.minus_count()},
                              {"expected_op_norm", BellMatrix::expected_norm(x.order())}};
  } catch (const Error&) {
    rec["bell_matrix"] = nullptr;
  }
  emit({"Norms", rec, std::nullopt}, fmt, c.out, out);
  return 0;
}

// ---------------------------------------------------------------- bellmat

int cmd_bellmat_gen(Index n, const Common& c, const std::string& weights_out,
                    std::ostream& out) {
  const Format fmt = parse_format(c.format);
  const BellMatrix x = generate_bell_matrix(n, c.seed);
  Json rec{{"command", "bellmat gen"},
           {"order", n},
           {"seed", c.seed},
           {"minus_count", x.minus_count()},
           {"op_norm", x.norm()},
           {"expected_op_norm", BellMatrix::expected_norm(n)},
           {"matrix", to_json(x.matrix())}};
  if (n <= kHvEnumerationCap) rec["hv_norm"] = hv_norm(x.weight());
  if (!weights_out.empty()) write_text(weights_out, format_weights_text(x.matrix()));
  emit({"Bell matrix", rec, std::nullopt}, fmt, c.out, out);
  return 0;
}

int cmd_bellmat_validate(const WeightSource& src, const Common& c,
                         std::ostream& out) {
  const Format fmt = parse_format(c.format);
  const WeightMatrix w = src.load();
  Json rec{{"command", "bellmat validate"}, {"source", src.describe()}};
  bool ok = true;
  try {
    const BellMatrix x = validate_bell_matrix(w);
    rec["valid"] = true;
    rec["order"] = x.order();
    rec["minus_count"] = x.minus_count();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::resource_limit || e.code() == ErrorCode::numeric) throw;
    ok = false;
    rec["valid"] = false;
    rec["reason"] = to_string(e.code());
    rec["message"] = e.what();
  }
  emit({"Bell matrix validation", rec, std::nullopt}, fmt, c.out, out);
  return ok ? 0 : int(Exit::target_missed);
}

Json permutation_json(const SignedPermutation& p) {
  std::vector<Index> target;
  for (Index t : p.target) target.push_back(t + 1);
  return Json{{"target", target}, {"sign", p.sign}};
}

int cmd_bellmat_reduce(const WeightSource& src, const Common& c, std::ostream& out) {
  const Format fmt = parse_format(c.format);
  const BellMatrix x = validate_bell_matrix(src.load());
  const Z0Reduction r = reduce_to_z0(x);
  const Matrix check = r.row_matrix() * x.matrix() * r.col_matrix();
  Json rec{{"command", "bellmat reduce"},
           {"source", src.describe()},
           {"order", x.order()},
           {"rows", permutation_json(r.rows)},
           {"cols", permutation_json(r.cols)},
           {"verified", check == canonical_z0(x.order()).matrix()},
           {"canonical", to_json(canonical_z0(x.order()).matrix())}};
  emit({"Reduction to canonical form", rec, std::nullopt}, fmt, c.out, out);
  return 0;
}

// ---------------------------------------------------------------- search

struct SearchFlags {
  std::string config;
  std::string verify;
  std::string dims;
  std::string constraint;
  Index population = 0, generations = 0, restarts = 0, stall = 0;
  bool no_polish = false;
  bool timestamp = false;
};

int cmd_verify(const std::string& path, const Common& c, bool format_given,
               std::ostream& out) {
  const Format fmt = format_given ? parse_format(c.format) : Format::json;
  Json rec;
  try {
    rec = Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::invalid_input, path + ": " + e.what());
  }
  const WeightMatrix w(matrix_from_json(rec.at("weight")));
  const EprConfiguration cfg = configuration_from_json(rec.at("best_config"));
  const double recorded = rec.at("result").at("best_fitness").get<double>();
  const double recomputed = bell_operator_norm(assemble_bell_operator(w, cfg));
  const double diff = std::abs(recomputed - recorded);
  const std::string hash = hex64(fnv1a64(rec.at("config").get<std::string>()));
  const bool hash_ok = hash == rec.at("provenance").at("config_hash").get<std::string>();
  const bool fit_ok = diff <= 1e-12;
  Json v{{"command", "search --verify"},
         {"record", path},
         {"recorded_fitness", recorded},
         {"recomputed_fitness", recomputed},
         {"difference", diff},
         {"tolerance", 1e-12},
         {"fitness_ok", fit_ok},
         {"config_hash_ok", hash_ok}};
  emit({"Record verification", v, std::nullopt}, fmt, c.out, out);
  return fit_ok && hash_ok ? 0 : int(Exit::target_missed);
}

int cmd_search(const CLI::App* sub, const SearchFlags& sf, const WeightFlags& wf,
               const Common& c, std::ostream& out) {
  if (!sf.verify.empty()) return cmd_verify(sf.verify, c, sub->count("--format") > 0, out);

  RunConfig cfg;
  if (!sf.config.empty()) cfg = parse_run_config(read_text(sf.config), sf.config);
  if (auto w = resolve_weight(sub, wf, c.seed)) {
    cfg.weight = *w;
    cfg.has_weight = true;
  }
  if (sub->count("--dims")) {
    cfg.dims = parse_dims(sf.dims);
    cfg.has_dims = true;
  }
  if (sub->count("--constraint")) cfg.constraint = parse_constraint(sf.constraint);
  if (sub->count("--seed")) cfg.ga.seed = c.seed;
  if (sub->count("--population")) cfg.ga.population = sf.population;
  if (sub->count("--generations")) cfg.ga.generations = sf.generations;
  if (sub->count("--restarts")) cfg.ga.restarts = sf.restarts;
  if (sub->count("--stall")) cfg.ga.stall_generations = sf.stall;
  if (sf.no_polish) cfg.ga.polish = false;
  if (sub->count("--tol")) {
    if (!(c.tol >= 0)) throw Error(ErrorCode::invalid_input, "--tol must be >= 0");
    cfg.target = c.tol;
  }
  if (sub->count("--format")) cfg.format = parse_format(c.format);
  if (sub->count("--out")) cfg.out = c.out;
  if (sub->count("--threads")) cfg.threads = c.threads;
  if (sf.timestamp) cfg.timestamp = true;

  if (!cfg.has_weight)
    throw Error(ErrorCode::invalid_input, "search needs a weight source");
  if (!cfg.has_dims) throw Error(ErrorCode::invalid_input, "search needs dims");
  cfg.ga.validate();
  cfg.constraint.validate(cfg.dims);
  const WeightMatrix w = cfg.weight.load();
  if (w.rows() != cfg.dims.na_ops || w.cols() != cfg.dims.nb_ops)
    throw Error(ErrorCode::invalid_input,
                "dims N_a x N_b = " + std::to_string(cfg.dims.na_ops) + "x" +
                    std::to_string(cfg.dims.nb_ops) + " do not match the " +
                    std::to_string(w.rows()) + "x" + std::to_string(w.cols()) +
                    " weight");

  const SearchResult r = evolve(w, cfg.dims, cfg.ga, cfg.constraint, cfg.threads);
  const std::string canonical = cfg.canonical();
  Json rec{{"command", "search"},
           {"provenance", provenance(cfg.ga.seed, canonical, cfg.timestamp)},
           {"config", canonical},
           {"source", cfg.weight.describe()},
           {"weight", to_json(w.matrix())},
           {"dims", {cfg.dims.na_ops, cfg.dims.nb_ops, cfg.dims.a_dim, cfg.dims.b_dim}},
           {"constraint", to_string(cfg.constraint)},
           {"result", to_json(r, w, cfg.target)},
           {"best_config", to_json(r.best_config)}};
  emit({"Search result", rec, std::nullopt}, cfg.format, cfg.out, out);
  return rec["result"]["target_met"].get<bool>() ? 0 : int(Exit::target_missed);
}

// ---------------------------------------------------------------- bounds-plot

int cmd_bounds_plot(Index n_min, Index n_max, bool with_ga, Index generations,
                    const Common& c, std::ostream& out) {
  const Format fmt = parse_format(c.format);
  if (n_min < 2 || n_max < n_min)
    throw Error(ErrorCode::invalid_input, "need 2 <= --n-min <= --n-max");
  if (n_max > kHvEnumerationCap)
    throw Error(ErrorCode::resource_limit,
                "--n-max above " + std::to_string(kHvEnumerationCap) +
                    " makes the hidden-variable norm intractable");
  Table t;
  t.header = {"N", "qb", "thm1", "hv_norm", "kg", "thm2", "thm2_over_thm1"};
  if (with_ga) t.header.insert(t.header.end(), {"ga_value", "ga_deviation"});
  Json rows = Json::array();
  for (Index n = n_min; n <= n_max; ++n) {
    const BellMatrix x = generate_bell_matrix(n, c.seed);
    const TheoremBounds tb = theorem_bounds(x.weight());
    const double qb = 2.0 * double(n) * std::cos(std::numbers::pi / (2.0 * double(n)));
    Json row = Json::array({n, qb, tb.thm1, tb.bell_threshold, grothendieck_bound(n),
                            tb.thm2, tb.thm2 / tb.thm1});
    Json obj{{"N", n}, {"qb", qb}, {"thm1", tb.thm1}, {"hv_norm", tb.bell_threshold},
             {"kg", grothendieck_bound(n)}, {"thm2", tb.thm2},
             {"thm2_over_thm1", tb.thm2 / tb.thm1}};
    if (with_ga) {
      GaConfig ga;
      ga.seed = c.seed;
      if (generations > 0) ga.generations = generations;
      const SearchResult r = evolve(x.weight(), {n, n, 2, 2}, ga, {}, c.threads);
      row.push_back(r.best_fitness);
      row.push_back(tb.thm1 - r.best_fitness);
      obj["ga_value"] = r.best_fitness;
      obj["ga_deviation"] = tb.thm1 - r.best_fitness;
    }
    t.rows.push_back(std::move(row));
    rows.push_back(std::move(obj));
  }
  Json rec{{"command", "bounds-plot"}, {"seed", c.seed}, {"rows", std::move(rows)}};
  emit({"Upper bounds for Bell matrices", rec, t}, fmt, c.out, out);
  return 0;
}

// ---------------------------------------------------------------- gap-sample

int cmd_gap_sample(Index rows, Index cols, std::size_t count, const std::string& dist,
                   Index bins, const std::string& hist_out, const Common& c,
                   std::ostream& out) {
  const Format fmt = parse_format(c.format);
  EntryDistribution d;
  if (dist == "uniform")
    d = EntryDistribution::uniform;
  else if (dist == "normal")
    d = EntryDistribution::normal;
  else
    throw Error(ErrorCode::invalid_input, "--dist must be uniform or normal");
  if (rows < 2 || cols < 2)
    throw Error(ErrorCode::invalid_input, "--rows and --cols must be >= 2");
  if (bins < 1) throw Error(ErrorCode::invalid_input, "--bins must be >= 1");
  if (std::min(rows, cols) > kHvEnumerationCap)
    throw Error(ErrorCode::resource_limit, "matrix too large for the corner enumeration");

  const double upper = std::sqrt(double(rows * cols)) - 1.0;
  const double width = upper / double(bins);
  std::vector<std::size_t> hist(std::size_t(bins), 0);
  std::vector<double> gaps;
  gaps.reserve(count);
  std::size_t outside = 0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0;
  GapSampler sampler(rows, cols, c.seed, d);
  for (std::size_t i = 0; i < count; ++i) {
    const double g = sampler.next().scaled_gap;
    gaps.push_back(g);
    if (g < -1e-10 || g > upper + 1e-10) ++outside;
    const auto b = std::clamp<long long>(
        static_cast<long long>(std::floor(g / width)), 0, bins - 1);
    ++hist[std::size_t(b)];
    lo = std::min(lo, g);
    hi = std::max(hi, g);
    sum += g;
  }

  Table ht;
  ht.header = {"bin_lo", "bin_hi", "count"};
  Json hist_json = Json::array();
  for (Index b = 0; b < bins; ++b) {
    const double a = double(b) * width, z = double(b + 1) * width;
    ht.rows.push_back(Json::array({a, z, hist[std::size_t(b)]}));
    hist_json.push_back(Json{{"lo", a}, {"hi", z}, {"count", hist[std::size_t(b)]}});
  }
  std::ostringstream canon;
  canon << "gap-sample rows=" << rows << " cols=" << cols << " count=" << count
        << " seed=" << c.seed << " dist=" << dist << " bins=" << bins;
  Json rec{{"command", "gap-sample"},
           {"provenance", provenance(c.seed, canon.str(), false)},
           {"rows", rows},
           {"cols", cols},
           {"count", count},
           {"dist", dist},
           {"gap_upper_bound", upper},
           {"outside_bounds", outside}};
  if (count > 0) {
    rec["min"] = lo;
    rec["max"] = hi;
    rec["mean"] = sum / double(count);
  }
  rec["histogram"] = hist_json;
  rec["samples"] = gaps;

  if (!hist_out.empty()) write_text(hist_out, render({"", {}, ht}, Format::csv));
  Document doc{"Scaled gap distribution", rec, std::nullopt};
  if (fmt == Format::csv) {
    Table st;
    st.header = {"index", "scaled_gap"};
    for (std::size_t i = 0; i < gaps.size(); ++i)
      st.rows.push_back(Json::array({i, gaps[i]}));
    doc.table = std::move(st);
  } else if (fmt == Format::md) {
    doc.table = ht;
  }
  emit(doc, fmt, c.out, out);
  return outside == 0 ? 0 : int(Exit::target_missed);
}

// ---------------------------------------------------------------- hv-verify

int cmd_hv_verify(const WeightSource& src, std::size_t count, const std::string& a_box,
                  const std::string& b_box, bool tol_given, const Common& c,
                  std::ostream& out) {
  const Format fmt = parse_format(c.format);
  const WeightMatrix w = src.load();
  const BoxBounds ab = parse_box(a_box, w.rows(), "--a-box");
  const BoxBounds bb = parse_box(b_box, w.cols(), "--b-box");
  const double margin = tol_given ? c.tol : 1e-10;
  const double bound = hv_box_norm(w, ab, bb);

  double max_abs = 0;
  std::size_t violations = 0, outside_box = 0;
  if (count > 0) {
    HvModelSampler sampler(ab, bb, c.seed);
    for (std::size_t i = 0; i < count; ++i) {
      const HvModel m = sampler.next();
      for (const auto& s : m.strategies())
        if (!s.within(ab, bb)) ++outside_box;
      const double v = std::abs(hv_expectation(w, m));
      max_abs = std::max(max_abs, v);
      if (v > bound + margin) ++violations;
    }
  }
  const double star = hv_norm(w);
  const double attained = hv_expectation(w, threshold_model(w));
  const bool attains = std::abs(attained - star) <= 1e-12 * std::max(1.0, star);

  std::ostringstream canon;
  canon << "hv-verify weight=" << src.describe() << " count=" << count
        << " seed=" << c.seed << " a_box=" << a_box << " b_box=" << b_box
        << " tol=" << margin;
  Json rec{{"command", "hv-verify"},
           {"provenance", provenance(c.seed, canon.str(), false)},
           {"source", src.describe()},
           {"count", count},
           {"box_bound", bound},
           {"hv_norm", star},
           {"max_abs_expectation", max_abs},
           {"violations", violations},
           {"strategies_outside_box", outside_box},
           {"threshold_model_value", attained},
           {"threshold_attained", attains},
           {"threshold_class", to_string(classify(attained, w))}};
  emit({"Hidden-variable verification", rec, std::nullopt}, fmt, c.out, out);
  return violations == 0 && outside_box == 0 && attains ? 0 : int(Exit::target_missed);
}

// ---------------------------------------------------------------- report

int cmd_report(const std::vector<std::string>& inputs, const Common& c,
               std::ostream& out) {
  const Format fmt = parse_format(c.format);
  Table t;
  t.header = {"record",           "source",       "dims",         "constraint",
              "best_fitness",     "thm1_deviation", "sum_rule_deviation",
              "entropy_1",        "entropy_2",    "extremes",     "top_multiplicity"};
  Json rows = Json::array();
  for (const auto& path : inputs) {
    Json rec;
    try {
      rec = Json::parse(read_text(path));
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::invalid_input, path + ": " + e.what());
    }
    if (rec.value("command", "") != "search")
      throw Error(ErrorCode::invalid_input, path + " is not a search record");
    const Json& r = rec.at("result");
    const Json& d = rec.at("dims");
    std::ostringstream dims;
    dims << d[0] << "," << d[1] << "," << d[2] << "," << d[3];
    const Json& reps = r.at("reports");
    Json e1 = reps.size() > 0 ? reps[0].at("entropy") : Json();
    Json e2 = reps.size() > 1 ? reps[1].at("entropy") : Json();
    const std::string extremes = std::to_string(r.at("extreme_count").get<long long>()) +
                                 "/" + std::to_string(r.at("hilbert_dim").get<long long>());
    Json row = Json::array({path, rec.at("source"), dims.str(), rec.at("constraint"),
                            r.at("best_fitness"), r.at("thm1_deviation"),
                            r.at("sum_rule_deviation"), e1, e2, extremes, reps.size()});
    Json obj = Json::object();
    for (std::size_t i = 0; i < t.header.size(); ++i) obj[t.header[i]] = row[i];
    t.rows.push_back(std::move(row));
    rows.push_back(std::move(obj));
  }
  Json rec{{"command", "report"}, {"rows", std::move(rows)}};
  emit({"Search summary", rec, t}, fmt, c.out, out);
  return 0;
}

int exit_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::resource_limit: return int(Exit::resource_limit);
    case ErrorCode::numeric: return int(Exit::numeric_failure);
    default: return int(Exit::config_error);
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bell operator norms, extreme configurations and hidden-variable checks",
               "bellopt"};
  app.require_subcommand(1);

  Common c;
  WeightFlags wf;

  auto* norms = app.add_subcommand("norms", "Operator, hidden-variable and Schmidt norms of a weight");
  add_common(norms, c, "Tolerance of the zero-gap certificate");
  add_weight_flags(norms, wf);

  auto* bellmat = app.add_subcommand("bellmat", "Generate, validate or reduce Bell matrices");
  bellmat->require_subcommand(1);
  Index gen_n = 0;
  std::string weights_out;
  auto* gen = bellmat->add_subcommand("gen", "Random Bell matrix of order N");
  gen->add_option("--n", gen_n, "Order N >= 2")->required();
  gen->add_option("--weights-out", weights_out, "Also write the matrix as a weight file");
  add_common(gen, c, "");
  auto* validate = bellmat->add_subcommand("validate", "Check the Bell matrix conditions");
  add_common(validate, c, "");
  add_weight_flags(validate, wf);
  auto* reduce = bellmat->add_subcommand("reduce", "Signed permutations onto the canonical form");
  add_common(reduce, c, "");
  add_weight_flags(reduce, wf);

  SearchFlags sf;
  auto* search = app.add_subcommand("search", "Genetic search for the largest Bell-operator norm");
  add_common(search, c, "Allowed deviation from sqrt(Na Nb)||W|| for exit code 0");
  add_weight_flags(search, wf);
  search->add_option("--config", sf.config, "Run configuration file (key = value)");
  search->add_option("--verify", sf.verify, "Recompute the fitness stored in a result record");
  search->add_option("--dims", sf.dims, "N_a,N_b,n_a,n_b");
  search->add_option("--constraint", sf.constraint, "none | tie:a|b:i:j | commuting:a|b|both");
  search->add_option("--population", sf.population, "Population size");
  search->add_option("--generations", sf.generations, "Generation limit");
  search->add_option("--restarts", sf.restarts, "Independent GA runs");
  search->add_option("--stall", sf.stall, "Generations without improvement before stopping");
  search->add_flag("--no-polish", sf.no_polish, "Skip the local polish stages");
  search->add_flag("--timestamp", sf.timestamp, "Record the wall-clock time in the output");

  Index n_min = 2, n_max = 12, plot_generations = 0;
  bool plot_ga = false;
  auto* bounds = app.add_subcommand("bounds-plot", "Operator-norm and Grothendieck bounds for Bell matrices of growing order");
  add_common(bounds, c, "");
  bounds->add_option("--n-min", n_min, "Smallest order");
  bounds->add_option("--n-max", n_max, "Largest order");
  bounds->add_flag("--ga", plot_ga, "Add GA-achieved values for (N,2,2)");
  bounds->add_option("--generations", plot_generations, "GA generation limit");

  Index rows = 3, cols = 3, bins = 50;
  std::size_t count = 50000;
  std::string dist = "uniform", hist_out;
  auto* gaps = app.add_subcommand("gap-sample", "Scaled quantum gap over random weights");
  add_common(gaps, c, "");
  gaps->add_option("--rows", rows, "N_a");
  gaps->add_option("--cols", cols, "N_b");
  gaps->add_option("--count", count, "Number of samples");
  gaps->add_option("--dist", dist, "Entry distribution: uniform or normal");
  gaps->add_option("--bins", bins, "Histogram bins");
  gaps->add_option("--hist-out", hist_out, "Write the histogram as csv");

  std::size_t hv_count = 10000;
  std::string a_box, b_box;
  auto* hv = app.add_subcommand("hv-verify", "Random local models never exceed the Bell threshold");
  add_common(hv, c, "Allowed excess over the bound");
  add_weight_flags(hv, wf);
  hv->add_option("--count", hv_count, "Number of random models");
  hv->add_option("--a-box", a_box, "Alice value ranges: lo:hi or one per observable");
  hv->add_option("--b-box", b_box, "Bob value ranges: lo:hi or one per observable");

  std::vector<std::string> inputs;
  auto* report = app.add_subcommand("report", "Summary table of search records");
  add_common(report, c, "");
  report->add_option("--in", inputs, "Search record (repeatable)")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return int(Exit::config_error);
  }

  try {
    if (norms->parsed())
      return cmd_norms(require_weight(norms, wf, c.seed), c, norms->count("--tol") > 0, out);
    if (gen->parsed()) return cmd_bellmat_gen(gen_n, c, weights_out, out);
    if (validate->parsed())
      return cmd_bellmat_validate(require_weight(validate, wf, c.seed), c, out);
    if (reduce->parsed()) return cmd_bellmat_reduce(require_weight(reduce, wf, c.seed), c, out);
    if (search->parsed()) return cmd_search(search, sf, wf, c, out);
    if (bounds->parsed()) return cmd_bounds_plot(n_min, n_max, plot_ga, plot_generations, c, out);
    if (gaps->parsed())
      return cmd_gap_sample(rows, cols, count, dist, bins, hist_out, c, out);
    if (hv->parsed())
      return cmd_hv_verify(require_weight(hv, wf, c.seed), hv_count, a_box, b_box,
                           hv->count("--tol") > 0, c, out);
    if (report->parsed()) return cmd_report(inputs, c, out);
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return exit_for(e.code());
  } catch (const Json::exception& e) {
    err << "error: malformed record: " << e.what() << "\n";
    return int(Exit::config_error);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return int(Exit::config_error);
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return int(Exit::resource_limit);
  }
  return int(Exit::config_error);
}

}  // namespace bellopt::cli
