#pragma once

#include <cstdint>
#include <vector>

#include "bellopt/core.hpp"
#include "bellopt/rng.hpp"
#include "bellopt/weights.hpp"

namespace bellopt {

/// Deterministic value assignment a(lambda), b(lambda) for one hidden state.
struct HvStrategy {
  Vector a;
  Vector b;

  bool within(const BoxBounds& a_bounds, const BoxBounds& b_bounds) const;
};

/// Finite mixture of strategies with probability weights.
class HvModel {
 public:
  HvModel(std::vector<HvStrategy> strategies, Vector weights);

  const std::vector<HvStrategy>& strategies() const noexcept { return s_; }
  const Vector& weights() const noexcept { return p_; }
  Index na() const { return s_.front().a.size(); }
  Index nb() const { return s_.front().b.size(); }

 private:
  std::vector<HvStrategy> s_;
  Vector p_;
};

/// sum_lambda p(lambda) (a(lambda), W b(lambda))
double hv_expectation(const WeightMatrix& w, const HvModel& model);

/// c_jk = sum_lambda p(lambda) a_j(lambda) b_k(lambda)
Matrix hv_correlation(const HvModel& model);

/// Random mixtures of box-corner and interior strategies; the stream is fixed
/// by the seed.
class HvModelSampler {
 public:
  HvModelSampler(BoxBounds a_bounds, BoxBounds b_bounds, std::uint64_t seed,
                 Index max_strategies = 8);
  HvModel next();

 private:
  BoxBounds a_bounds_, b_bounds_;
  Index max_strategies_;
  Rng rng_;
};

std::vector<HvModel> random_hv_models(const BoxBounds& a_bounds,
                                      const BoxBounds& b_bounds,
                                      std::size_t count, std::uint64_t seed);

/// The single-strategy model attaining ||W||*.
HvModel threshold_model(const WeightMatrix& w);

enum class BellClass { local, bell_violating, at_quantum_bound };

const char* to_string(BellClass c) noexcept;

BellClass classify(double value, const WeightMatrix& w,
                   const BoxBounds& a_bounds, const BoxBounds& b_bounds,
                   double tol = 1e-6);
BellClass classify(double value, const WeightMatrix& w, double tol = 1e-6);

}  // namespace bellopt
