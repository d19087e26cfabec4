#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bellopt/core.hpp"
#include "bellopt/quantum.hpp"
#include "bellopt/weights.hpp"

namespace bellopt {

inline constexpr Index kMaxHilbertDim = 64;
// Relative window defining the maximal eigenstates of a search result.
inline constexpr double kMaxSetTol = 1e-4;
// Relative eigenvalue floor below which trim_kernels treats a partial
// expectation as zero.
inline constexpr double kTrimTol = 1e-8;

struct GaConfig {
  Index population = 200;
  Index generations = 2000;
  Index tournament_size = 4;
  double crossover_rate = 0.9;
  double mutation_rate = 0.05;
  double mutation_sigma = 0.1;
  Index elitism = 4;
  std::uint64_t seed = 0;
  Index stall_generations = 300;
  bool polish = true;
  Index polish_iterations = 400;
  // Alternating exact-update sweeps after the coordinate polish (unconstrained
  // searches only).
  Index refine_iterations = 500;
  // Alternating sweeps applied to every initial genome before the first
  // generation (unconstrained searches only); 0 keeps the raw random start.
  Index seed_refine_iterations = 30;
  // Independent GA runs, alternating refined and raw initial populations.
  Index restarts = 2;

  void validate() const;
};

enum class Side { alice, bob };

/// Structural restriction on the searched configurations. Indices are
/// zero-based.
struct SearchConstraint {
  enum class Kind { none, tie, commuting_side, commuting_both };

  Kind kind = Kind::none;
  Side side = Side::bob;
  Index target = 0;  // tie: operator replaced by a function of `source`
  Index source = 0;

  static SearchConstraint none() { return {}; }
  static SearchConstraint tie(Side s, Index target, Index source) {
    return {Kind::tie, s, target, source};
  }
  static SearchConstraint commuting(Side s) {
    return {Kind::commuting_side, s, 0, 0};
  }
  static SearchConstraint commuting_both() {
    return {Kind::commuting_both, Side::alice, 0, 0};
  }

  void validate(const EprDims& dims) const;
};

/// Text form: none | tie:<a|b>:<i>:<j> | commuting:<a|b|both>, indices
/// one-based.
std::string to_string(const SearchConstraint& c);
SearchConstraint parse_constraint(const std::string& text);

/// Number of reals parameterizing a configuration: N_a n_a^2 + N_b n_b^2.
Index genome_length(const EprDims& dims);

/// Each operator takes n^2 genes: n diagonal values, then the real parts and
/// then the imaginary parts of the strict upper triangle in row-major order.
/// Operators with norm above one are scaled back onto the unit sphere.
EprConfiguration decode(const Vector& genome, const EprDims& dims);

/// Inverse of decode for unit-bounded configurations.
Vector encode(const EprConfiguration& cfg);

EprConfiguration apply_constraint(const EprConfiguration& cfg,
                                  const SearchConstraint& c);

double fitness(const Vector& genome, const WeightMatrix& w, const EprDims& dims,
               const SearchConstraint& c = {});

/// Spectral and correlation analytics of one configuration.
struct ExtremeAnalysis {
  double norm = 0;
  SpectralData spectral;
  std::vector<CorrelationReport> reports;  // one per max_index_set entry
  NormMeans means;
  double thm1_deviation = 0;      // sqrt(N_a N_b)||W|| - ||S_W||
  double sum_rule_deviation = 0;  // max |trace_norm - sqrt(N_a N_b)| in reports
  Index extreme_count = 0;        // eigenstates whose C is a quantum extreme
  double square_identity_deviation = 0;  // max ||O^2 - I|| over observables
};

ExtremeAnalysis analyze_configuration(const WeightMatrix& w,
                                      const EprConfiguration& cfg,
                                      double max_set_tol = kMaxSetTol);

struct SearchResult {
  EprConfiguration best_config;
  double best_fitness = 0;
  std::vector<double> fitness_trace;
  Index generations_run = 0;
  double polish_gain = 0;
  ExtremeAnalysis analysis;
};

/// Alternately replaces every Alice and then every Bob observable by the sign of
/// its partial expectation in the top eigenstate. Never lowers ||S_W||.
EprConfiguration seesaw_refine(const WeightMatrix& w, EprConfiguration cfg,
                               Index iterations);

/// One alternating sweep that sets every observable to the sign of its partial
/// expectation and zero on that expectation's numerical kernel
/// (|mu| <= kTrimTol * max |mu|).
EprConfiguration trim_kernels(const WeightMatrix& w, const EprConfiguration& cfg);

/// Genetic search for the configuration maximizing ||S_W||, followed by an
/// optional coordinate hill-climbing polish and alternating refinement.
/// Unconstrained polished searches end with a kernel trim, kept only when it
/// costs no fitness and does not widen the top eigenspace. Deterministic in
/// `config.seed` for any thread count.
SearchResult evolve(const WeightMatrix& w, const EprDims& dims,
                    const GaConfig& config, const SearchConstraint& c = {},
                    unsigned threads = 1);

}  // namespace bellopt
