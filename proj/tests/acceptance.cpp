// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "bellopt/ga.hpp"
#include "bellopt/hvmodel.hpp"
#include "oracles.hpp"

using namespace bellopt;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  // Records a failed check; keeps the first few messages.
  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (pass || detail.str().size() < 400) detail << " [" << what << "]";
    pass = false;
  }
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<void(Verdict&)> body;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

double qb(Index n) { return 2.0 * double(n) * std::cos(kPi / (2.0 * double(n))); }

void norm_identities(Verdict& v) {
  const WeightMatrix w0 = chsh_weight(), wm = magic3_weight();
  v.require(std::abs(w0.op_norm() - std::sqrt(2.0)) <= 1e-12, "||W0||");
  v.require(hv_norm(w0) == 2.0, "||W0||* = " + fmt(hv_norm(w0)));
  v.require(std::abs(wm.op_norm() - 15.0) <= 1e-12, "||Wm||");
  v.require(hv_norm(wm) == 45.0, "||Wm||* = " + fmt(hv_norm(wm)));
  double worst = 0;
  for (Index n = 2; n <= 10; ++n)
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const BellMatrix x = generate_bell_matrix(n, seed * 7919 + std::uint64_t(n));
      const double dev = std::abs(x.norm() - 2.0 * std::cos(kPi / (2.0 * double(n))));
      worst = std::max(worst, dev);
      v.require(dev <= 1e-12, "||X|| N=" + std::to_string(n));
      v.require(hv_norm(x.weight()) == 2.0 * double(n - 1), "||X||* N=" + std::to_string(n));
    }
  v.detail << " 180 Bell matrices, max ||X|| deviation " << worst;
}

void certificates(Verdict& v) {
  const auto m = zero_gap_certificate(magic3_weight());
  v.require(m && m->d1 == std::vector<int>{1, 1, 1} && m->d2 == std::vector<int>{1, 1, 1},
            "magic all-plus");
  const auto w00 = zero_gap_certificate(w00_weight());
  v.require(w00 && w00->d1 == std::vector<int>{1, 1, 1, -1} &&
                w00->d2 == std::vector<int>{1, 1, 1, -1},
            "W00 (1,1,1,-1)");
  v.require(!zero_gap_certificate(chsh_weight()), "W0 has none");
  std::mt19937_64 rng(2024);
  int found = 0;
  for (int t = 0; t < 200; ++t) {
    const Index r = 2 + t % 5, c = 2 + (t / 5) % 5;
    const Vector a = oracle::corner(r, rng()), b = oracle::corner(c, rng());
    if (zero_gap_certificate(WeightMatrix(Matrix(a * b.transpose())))) ++found;
  }
  v.require(found == 200, "rank-1 found " + std::to_string(found) + "/200");
  v.detail << " rank-1 corner products certified " << found << "/200";
}

void norm_chain(Verdict& v) {
  std::mt19937_64 rng(77);
  int bad = 0;
  for (int t = 0; t < 10000; ++t) {
    const Index r = 2 + t % 4, c = 2 + (t / 4) % 4;
    const WeightMatrix w(oracle::random_matrix(r, c, rng));
    const double op = w.op_norm(), hv = hv_norm(w), s = w.dim_scale();
    const double g = quantum_gap(w).scaled_gap;
    if (op > hv + 1e-10 || hv > s * op + 1e-10 || g < -1e-10 || g > s - 1 + 1e-10) ++bad;
  }
  v.require(bad == 0, std::to_string(bad) + " violations");
  v.detail << " 10000 weights, " << bad << " violations";
}

// Orientation-independent rigidity and entropy checks over the top states.
void top_state_checks(Verdict& v, const SearchResult& r, const BellMatrix& x,
                      double rigidity_tol, double entropy_tol, std::size_t states) {
  const auto& reps = r.analysis.reports;
  v.require(reps.size() >= states, "top multiplicity " + std::to_string(reps.size()));
  for (std::size_t i = 0; i < std::min(states, reps.size()); ++i) {
    const double rig = rigidity_deviation(reps[i].matrix, x);
    v.require(rig <= rigidity_tol, "rigidity " + fmt(rig));
    v.require(std::abs(reps[i].entropy - std::log(2.0)) <= entropy_tol,
              "entropy " + fmt(reps[i].entropy));
    v.detail << " state" << i << "{rigidity " << rig << ", entropy " << reps[i].entropy << "}";
  }
}

void ga_chsh(Verdict& v) {
  GaConfig c;
  c.seed = 1;
  const SearchResult r = evolve(chsh_weight(), {2, 2, 2, 2}, c);
  const double dev = 2 * std::sqrt(2.0) - r.best_fitness;
  v.require(std::abs(dev) <= 1e-6, "fitness " + fmt(r.best_fitness));
  v.detail << " fitness " << fmt(r.best_fitness) << " deviation " << dev;
  top_state_checks(v, r, validate_bell_matrix(chsh_weight()), 1e-4, 1e-4, 1);
}

void ga_322(Verdict& v) {
  GaConfig c;
  c.seed = 1;
  const BellMatrix x = canonical_z0(3);
  const SearchResult r = evolve(x.weight(), {3, 3, 2, 2}, c);
  const double dev = qb(3) - r.best_fitness;
  v.require(std::abs(dev) <= 1e-4, "fitness " + fmt(r.best_fitness));
  v.require(r.analysis.sum_rule_deviation <= 1e-4,
            "sum rule " + fmt(r.analysis.sum_rule_deviation));
  v.detail << " fitness " << fmt(r.best_fitness) << " sum-rule deviation "
           << r.analysis.sum_rule_deviation;
  top_state_checks(v, r, x, 1e-3, 1e-3, 2);
}

void ga_sweep(Verdict& v) {
  GaConfig c;
  for (Index n = 2; n <= 6; ++n) {
    c.seed = std::uint64_t(n);
    const BellMatrix x = generate_bell_matrix(n, 1000 + std::uint64_t(n));
    const SearchResult r = evolve(x.weight(), {n, n, 2, 2}, c);
    const double rel = std::abs(r.best_fitness - qb(n)) / qb(n);
    const double pairing = r.analysis.spectral.pairing_deviation;
    v.require(rel <= 1e-3, "N=" + std::to_string(n) + " relative " + fmt(rel));
    v.require(pairing <= 1e-6, "N=" + std::to_string(n) + " pairing " + fmt(pairing));
    v.detail << " N=" << n << ":" << fmt(r.best_fitness) << "/" << fmt(qb(n));
  }
}

void ga_magic(Verdict& v) {
  GaConfig c;
  c.seed = 1;
  const SearchResult r = evolve(magic3_weight(), {3, 3, 3, 3}, c);
  const double rel = std::abs(r.best_fitness - 45.0) / 45.0;
  v.require(rel <= 1e-3, "fitness " + fmt(r.best_fitness));
  const auto& ev = r.analysis.spectral.eigenvalues;
  const double second = std::abs(ev(1));
  v.require(r.analysis.spectral.max_index_set.size() == 1 && second < std::abs(ev(0)) - 1e-3,
            "top eigenvalue not unique, |lambda_2| = " + fmt(second));
  const CorrelationReport& top = r.analysis.reports.front();
  v.require(top.entropy <= 1e-6, "entropy " + fmt(top.entropy));
  const double ones = (top.matrix - Matrix::Ones(3, 3)).cwiseAbs().maxCoeff();
  v.require(ones <= 1e-3, "C - ones " + fmt(ones));
  const LocalityReport loc = quantum_locality_check(r.best_config);
  v.require(loc.alice_commuting && loc.bob_commuting,
            "commutator " + fmt(loc.max_commutator_norm));
  v.detail << " fitness " << fmt(r.best_fitness) << " |lambda_2| " << second << " entropy "
           << top.entropy << " max|C-1| " << ones << " max commutator "
           << loc.max_commutator_norm;
}

void constrained(Verdict& v) {
  GaConfig c;
  c.seed = 1;
  const WeightMatrix x3 = canonical_z0(3).weight();
  const SearchResult tie = evolve(x3, {3, 3, 2, 2}, c, SearchConstraint::tie(Side::bob, 2, 1));
  v.require(tie.best_fitness >= 4.7 && tie.best_fitness <= 4.83,
            "tie fitness " + fmt(tie.best_fitness));
  v.require(tie.best_fitness > 4.0, "tie is not a Bell violation");
  bool extreme = false;
  for (const auto& rep : tie.analysis.reports) extreme = extreme || rep.is_extreme;
  v.require(extreme, "tie companion C is not flagged extreme");
  const SearchResult local = evolve(x3, {3, 3, 2, 2}, c, SearchConstraint::commuting_both());
  v.require(local.best_fitness <= 4 + 1e-6, "commuting fitness " + fmt(local.best_fitness));
  v.detail << " tie " << fmt(tie.best_fitness) << " (target 4.8284, extreme " << extreme
           << ") commuting_both " << fmt(local.best_fitness);
}

void hv_suite(Verdict& v) {
  std::mt19937_64 rng(31337);
  std::vector<std::pair<std::string, WeightMatrix>> ws{
      {"W0", chsh_weight()}, {"X3", canonical_z0(3).weight()}, {"Wm", magic3_weight()}};
  for (int t = 0; t < 20; ++t)
    ws.emplace_back("random" + std::to_string(t),
                    WeightMatrix(oracle::random_matrix(2 + t % 4, 2 + (t / 4) % 4, rng)));
  long violations = 0;
  std::uint64_t seed = 100;
  for (const auto& [name, w] : ws) {
    const BoxBounds ab = unit_box(w.rows()), bb = unit_box(w.cols());
    const double bound = hv_box_norm(w, ab, bb);
    for (const HvModel& m : random_hv_models(ab, bb, 10000, seed++))
      if (std::abs(hv_expectation(w, m)) > bound + 1e-10) ++violations;
    const double attained = std::abs(hv_expectation(w, threshold_model(w)));
    const double star = oracle::hv_norm_all_pairs(w.matrix());
    v.require(attained == hv_norm(w) && std::abs(attained - star) <= 1e-12 * star,
              name + " threshold " + fmt(attained) + " vs " + fmt(star));
  }
  v.require(violations == 0, std::to_string(violations) + " violations");
  v.detail << " 23 weights x 10000 models, " << violations << " violations";
}

void angles(Verdict& v) {
  GaConfig c;
  const std::array<double, 4> expected_deg{0, 0, 22.5, 31.7175};  // N = 2..5
  for (Index n = 2; n <= 5; ++n) {
    c.seed = 50 + std::uint64_t(n);
    const BellMatrix x = generate_bell_matrix(n, 500 + std::uint64_t(n));
    const SearchResult r = evolve(x.weight(), {n, n, 2, 2}, c);
    const CorrelationReport& top = r.analysis.reports.front();
    const double predicted = 2 * std::cos(kPi / (2.0 * double(n))) / std::sqrt(double(n));
    const double cos_dev = std::abs(top.abs_cos_theta - predicted);
    const double a = expected_deg.at(std::size_t(n - 2));
    const double angle_dev =
        std::min(std::abs(top.opening_angle_deg - a), std::abs(top.opening_angle_deg - (180 - a)));
    v.require(cos_dev <= 1e-6, "N=" + std::to_string(n) + " |cos| deviation " + fmt(cos_dev));
    v.require(angle_dev <= 0.5, "N=" + std::to_string(n) + " angle " + fmt(top.opening_angle_deg));
    v.detail << " N=" << n << ":" << top.opening_angle_deg << "deg";
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism(Verdict& v) {
  const fs::path dir = fs::temp_directory_path() / "bellopt_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string tool = BELLOPT_TOOL;
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "weight = bell\nbell_order = 3\nbell_seed = 9\ndims = 3 3 2 2\nseed = 4\n"
           "population = 80\ngenerations = 300\n";
  }
  const std::vector<std::pair<std::string, std::string>> commands{
      {"search", "search --config " + (dir / "run.cfg").string()},
      {"gap-sample", "gap-sample --rows 3 --cols 4 --count 5000 --seed 8 --format csv"},
      {"hv-verify", "hv-verify --magic3 --count 10000 --seed 6"}};
  for (const auto& [name, args] : commands) {
    std::string first;
    for (int run = 0; run < 2; ++run) {
      const fs::path out = dir / (name + std::to_string(run));
      const std::string cmd = tool + " " + args + " --threads " + std::to_string(run + 1) +
                              " --out " + out.string() + " 2>/dev/null";
      const int status = std::system(cmd.c_str());
      v.require(WIFEXITED(status) && WEXITSTATUS(status) <= 1, name + " exit status");
      const std::string body = slurp(out);
      v.require(!body.empty(), name + " wrote nothing");
      if (run == 0)
        first = body;
      else
        v.require(body == first, name + " output differs between runs");
    }
    v.detail << " " << name << ":" << first.size() << "B";
  }
  fs::remove_all(dir);
}

}  // namespace

// Optional arguments restrict the run to the listed criterion ids.
int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const std::vector<Criterion> criteria{
      {1, "norm identities", 1, norm_identities},
      {2, "zero-gap certificates", 1, certificates},
      {3, "norm chain on 10^4 random weights", 10, norm_chain},
      {4, "GA saturation, CHSH (2,2,2)", 60, ga_chsh},
      {5, "GA saturation, (3,2,2)", 300, ga_322},
      {6, "GA saturation sweep N=2..6", 1800, ga_sweep},
      {7, "zero-gap search, magic square (3,3,3)", 300, ga_magic},
      {8, "constrained searches", 600, constrained},
      {9, "hidden-variable property suite", 60, hv_suite},
      {10, "angle geometry N=2..5", 600, angles},
      {11, "determinism of seeded commands", 120, determinism},
  };
  int failed = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.contains(c.id)) continue;
    ++ran;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.require(dt <= c.budget_s, "over time budget of " + fmt(c.budget_s) + " s");
    if (!v.pass) ++failed;
    std::cout << (v.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << " ("
              << fmt(dt) << " s):" << v.detail.str() << std::endl;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << (ran - failed) << "/" << ran << std::endl;
  return failed;
}
