#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "bellopt/core.hpp"
#include "bellopt/rng.hpp"

namespace bellopt {

inline constexpr int kHvEnumerationCap = 24;
inline constexpr int kCertificateEnumerationCap = 26;
inline constexpr double kZeroGapTol = 1e-9;

/// Real N_a x N_b weight matrix of a Bell operator. Entries are finite and
/// both dimensions are at least 2. The operator and Schmidt norms are computed
/// once on construction.
class WeightMatrix {
 public:
  explicit WeightMatrix(Matrix entries);

  Index rows() const noexcept { return m_.rows(); }
  Index cols() const noexcept { return m_.cols(); }
  const Matrix& matrix() const noexcept { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

  double op_norm() const noexcept { return op_norm_; }
  double schmidt_norm() const noexcept { return schmidt_norm_; }
  // sqrt(N_a N_b)
  double dim_scale() const noexcept {
    return std::sqrt(double(rows()) * double(cols()));
  }

  WeightMatrix transpose() const { return WeightMatrix(m_.transpose()); }

 private:
  Matrix m_;
  double op_norm_ = 0;
  double schmidt_norm_ = 0;
};

/// Named weights used throughout.
WeightMatrix chsh_weight();    // [[1,1],[1,-1]]
WeightMatrix magic3_weight();  // 3x3 Lo Shu magic square
WeightMatrix w00_weight();     // chsh ⊗ chsh

struct Interval {
  double lo = -1;
  double hi = 1;
};
using BoxBounds = std::vector<Interval>;

BoxBounds unit_box(Index n);

/// Maximizing corner pair of the bilinear form (a, W b).
struct CornerPair {
  Vector a;
  Vector b;
  double value = 0;  // (a, W b), >= 0
};

double operator_norm(const WeightMatrix& w);

/// Exact hidden-variable norm max |(a, W b)| over the unit hypercubes.
double hv_norm(const WeightMatrix& w, int cap = kHvEnumerationCap);
CornerPair hv_norm_argmax(const WeightMatrix& w, int cap = kHvEnumerationCap);

/// max |(a, W b)| with a_j in a_bounds[j], b_k in b_bounds[k].
double hv_box_norm(const WeightMatrix& w, const BoxBounds& a_bounds,
                   const BoxBounds& b_bounds, int cap = kHvEnumerationCap);

class BellMatrix {
 public:
  const WeightMatrix& weight() const noexcept { return base_; }
  const Matrix& matrix() const noexcept { return base_.matrix(); }
  Index order() const noexcept { return base_.rows(); }
  int minus_count() const noexcept { return minus_count_; }
  double norm() const noexcept { return base_.op_norm(); }

  static double expected_norm(Index n);

 private:
  friend BellMatrix validate_bell_matrix(const WeightMatrix&);
  BellMatrix(WeightMatrix base, int minus_count)
      : base_(std::move(base)), minus_count_(minus_count) {}

  WeightMatrix base_;
  int minus_count_;
};

BellMatrix validate_bell_matrix(const WeightMatrix& m);
BellMatrix canonical_z0(Index n);
BellMatrix generate_bell_matrix(Index n, std::uint64_t seed);

/// P with P(target, source) = sign. Acting on the left it maps row `source` to
/// row `target`; acting on the right the transpose convention applies.
struct SignedPermutation {
  std::vector<Index> target;  // target[source]
  std::vector<int> sign;      // sign[source]

  Matrix matrix() const;
  bool is_identity() const;
};

struct Z0Reduction {
  SignedPermutation rows;  // Pr, applied on the left
  SignedPermutation cols;  // Pc, applied on the right
  Matrix row_matrix() const;
  Matrix col_matrix() const;
};

/// Signed permutations with Pr * X * Pc == canonical_z0(N).
Z0Reduction reduce_to_z0(const BellMatrix& x);

struct SignaturePair {
  std::vector<int> d1;
  std::vector<int> d2;
};

struct GapReport {
  double absolute_gap = 0;  // sqrt(N_a N_b) ||W|| - ||W||*
  double scaled_gap = 0;    // sqrt(N_a N_b) - ||W||* / ||W||
  double op_norm = 0;
  double hv_norm = 0;
  std::optional<SignaturePair> certificate;
};

GapReport quantum_gap(const WeightMatrix& w, double tol = kZeroGapTol);

std::optional<SignaturePair> zero_gap_certificate(
    const WeightMatrix& w, double tol = kZeroGapTol,
    int cap = kCertificateEnumerationCap);

/// Tabulated upper bounds on Grothendieck's constant of order n.
double grothendieck_bound(Index n);

struct TheoremBounds {
  double thm1 = 0;
  double thm2 = 0;
  double bell_threshold = 0;
};

TheoremBounds theorem_bounds(const WeightMatrix& w);

enum class EntryDistribution { uniform, normal };

struct GapSample {
  WeightMatrix weight;
  double scaled_gap;
};

/// Deterministic stream of random weights and their scaled gaps.
class GapSampler {
 public:
  GapSampler(Index rows, Index cols, std::uint64_t seed,
             EntryDistribution dist);
  GapSample next();

 private:
  Index rows_, cols_;
  EntryDistribution dist_;
  Rng rng_;
};

std::vector<GapSample> sample_gap_distribution(Index rows, Index cols,
                                               std::size_t count,
                                               std::uint64_t seed,
                                               EntryDistribution dist);

}  // namespace bellopt
