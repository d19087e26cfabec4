#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "bellopt/core.hpp"
#include "bellopt/weights.hpp"

namespace bellopt {

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kUnitBoundTol = 1e-9;
inline constexpr double kUnitVectorTol = 1e-9;
inline constexpr double kSchmidtRankTol = 1e-8;
inline constexpr double kExtremeTol = 1e-4;
// Absolute slack, in units of ||W||_sigma, for the opening-angle consistency
// check on numerically null states.
inline constexpr double kCosFloor = 1e-9;

/// max |eigenvalue| of a matrix assumed Hermitian (only its lower triangle is
/// read).
double hermitian_norm(const CMatrix& m);

/// Self-adjoint n x n matrix, n >= 2. Hermiticity is checked on construction
/// to kHermitianTol relative to the largest entry and the stored matrix is
/// symmetrized exactly.
class HermitianOperator {
 public:
  explicit HermitianOperator(CMatrix m);
  static HermitianOperator zero(Index n);

  Index dim() const noexcept { return m_.rows(); }
  const CMatrix& matrix() const noexcept { return m_; }

  // max |eigenvalue|
  double norm() const;
  bool unit_bounded() const { return norm() <= 1.0 + kUnitBoundTol; }

 private:
  CMatrix m_;
};

/// Pauli matrices, handy for tests and examples.
HermitianOperator pauli_x();
HermitianOperator pauli_y();
HermitianOperator pauli_z();

struct EprDims {
  Index na_ops = 2;  // N_a
  Index nb_ops = 2;  // N_b
  Index a_dim = 2;   // n_a
  Index b_dim = 2;   // n_b

  Index hilbert_dim() const { return a_dim * b_dim; }
  bool operator==(const EprDims&) const = default;
};

/// Alice and Bob observables. All operators on one side share a dimension and
/// are unit-norm bounded.
class EprConfiguration {
 public:
  EprConfiguration(std::vector<HermitianOperator> alice,
                   std::vector<HermitianOperator> bob);

  const std::vector<HermitianOperator>& alice() const noexcept { return a_; }
  const std::vector<HermitianOperator>& bob() const noexcept { return b_; }
  EprDims dims() const;

 private:
  std::vector<HermitianOperator> a_;
  std::vector<HermitianOperator> b_;
};

/// sum_jk W_jk A_j ⊗ B_k as a dense matrix, without Hermitian validation.
CMatrix bell_operator_matrix(const WeightMatrix& w, const EprConfiguration& cfg);

HermitianOperator assemble_bell_operator(const WeightMatrix& w,
                                         const EprConfiguration& cfg);

double bell_operator_norm(const HermitianOperator& s);

struct SpectralData {
  Vector eigenvalues;          // sorted by |lambda| descending
  CMatrix eigenvectors;        // column t pairs with eigenvalues(t)
  std::vector<Index> max_index_set;
  // max_i |lambda_i + lambda_{n-1-i}| over the ascending spectrum; zero when
  // the spectrum comes in exact +/- pairs (one unpaired value if n is odd).
  double pairing_deviation = 0;

  double norm() const { return eigenvalues.size() ? std::abs(eigenvalues(0)) : 0.0; }
};

/// Full eigensystem. Each eigenvector is phased so its largest-magnitude
/// component is real and positive.
SpectralData spectral_decomposition(const HermitianOperator& s,
                                    double tol = 1e-9);

/// C_jk = <psi| A_j ⊗ B_k |psi>.
Matrix correlation_matrix(const EprConfiguration& cfg, const CVector& psi);

struct NormMeans {
  double a = 1;
  double b = 1;
};

NormMeans norm_means(const EprConfiguration& cfg);

struct CorrelationReport {
  Matrix matrix;
  Vector singular_values;  // descending
  double trace_norm = 0;
  double schmidt_norm = 0;
  double op_norm = 0;
  Index schmidt_rank = 0;
  double bell_expectation = 0;  // tr(W^T C)
  double abs_cos_theta = 0;
  double opening_angle_deg = 90;
  bool is_extreme = false;
  double entropy = 0;  // filled in when the state is known
};

/// Norms, Schmidt rank, Bell expectation, opening angle against W and the
/// quantum-extreme flag ||C||_tau == sqrt(N_a N_b) M_a M_b (relative tol).
/// Throws a numeric error when s_norm exceeds ||W||_sigma ||C||_sigma by more
/// than the relative 1e-6 and absolute kCosFloor * ||W||_sigma slack.
CorrelationReport analyze_correlation(const Matrix& c, const WeightMatrix& w,
                                      double s_norm, NormMeans means = {},
                                      double extreme_tol = kExtremeTol);

double rigidity_constant(Index n);

/// min over the sign of ||C -+ k(N) X||, for N in {2,3}.
double rigidity_deviation(const Matrix& c, const BellMatrix& x);

/// Reduced von Neumann entropy (nats) of a pure bipartite state.
double entanglement_entropy(const CVector& psi, Index a_dim, Index b_dim);

struct LocalityReport {
  bool alice_commuting = false;
  bool bob_commuting = false;
  double max_commutator_norm = 0;
};

LocalityReport quantum_locality_check(const EprConfiguration& cfg,
                                      double tol = 1e-8);

}  // namespace bellopt
