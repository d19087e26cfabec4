#include "bellopt/quantum.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>
#include <sstream>

namespace bellopt {

double hermitian_norm(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw Error(ErrorCode::numeric, "Hermitian eigensolver did not converge");
  const Vector& ev = es.eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

HermitianOperator::HermitianOperator(CMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols())
    throw Error(ErrorCode::invalid_input, "operator must be square");
  if (m_.rows() < 2)
    throw Error(ErrorCode::invalid_input, "operator dimension must be >= 2");
  if (!m_.allFinite())
    throw Error(ErrorCode::invalid_input, "operator has non-finite entries");
  const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  const double asym = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kHermitianTol * scale) {
    std::ostringstream os;
    os << "operator is not Hermitian (max |M - M^H| = " << asym << ")";
    throw Error(ErrorCode::invalid_input, os.str());
  }
  m_ = (0.5 * (m_ + m_.adjoint())).eval();
}

HermitianOperator HermitianOperator::zero(Index n) {
  return HermitianOperator(CMatrix::Zero(n, n));
}

double HermitianOperator::norm() const { return hermitian_norm(m_); }

HermitianOperator pauli_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return HermitianOperator(m);
}

HermitianOperator pauli_y() {
  CMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return HermitianOperator(m);
}

HermitianOperator pauli_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return HermitianOperator(m);
}

EprConfiguration::EprConfiguration(std::vector<HermitianOperator> alice,
                                   std::vector<HermitianOperator> bob)
    : a_(std::move(alice)), b_(std::move(bob)) {
  if (a_.size() < 2 || b_.size() < 2)
    throw Error(ErrorCode::invalid_input,
                "each side needs at least two observables");
  auto check_side = [](const std::vector<HermitianOperator>& ops,
                       const char* who) {
    const Index n = ops.front().dim();
    for (std::size_t i = 0; i < ops.size(); ++i) {
      if (ops[i].dim() != n) {
        std::ostringstream os;
        os << who << " operator " << i << " has dimension " << ops[i].dim()
           << ", expected " << n;
        throw Error(ErrorCode::dimension_mismatch, os.str());
      }
      if (!ops[i].unit_bounded()) {
        std::ostringstream os;
        os << who << " operator " << i << " has norm " << ops[i].norm()
           << " > 1";
        throw Error(ErrorCode::invalid_input, os.str());
      }
    }
  };
  check_side(a_, "alice");
  check_side(b_, "bob");
}

EprDims EprConfiguration::dims() const {
  return {Index(a_.size()), Index(b_.size()), a_.front().dim(),
          b_.front().dim()};
}

CMatrix bell_operator_matrix(const WeightMatrix& w,
                             const EprConfiguration& cfg) {
  const EprDims d = cfg.dims();
  if (w.rows() != d.na_ops || w.cols() != d.nb_ops) {
    std::ostringstream os;
    os << "weight is " << w.rows() << "x" << w.cols() << " but configuration has "
       << d.na_ops << " Alice and " << d.nb_ops << " Bob observables";
    throw Error(ErrorCode::dimension_mismatch, os.str());
  }
  CMatrix s = CMatrix::Zero(d.hilbert_dim(), d.hilbert_dim());
  CMatrix row_sum(d.b_dim, d.b_dim);
  for (Index j = 0; j < d.na_ops; ++j) {
    row_sum.setZero();
    for (Index k = 0; k < d.nb_ops; ++k)
      if (w(j, k) != 0.0) row_sum += w(j, k) * cfg.bob()[std::size_t(k)].matrix();
    s += kron(cfg.alice()[std::size_t(j)].matrix(), row_sum);
  }
  return s;
}

HermitianOperator assemble_bell_operator(const WeightMatrix& w,
                                         const EprConfiguration& cfg) {
  return HermitianOperator(bell_operator_matrix(w, cfg));
}

double bell_operator_norm(const HermitianOperator& s) { return s.norm(); }

SpectralData spectral_decomposition(const HermitianOperator& s, double tol) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(s.matrix());
  if (es.info() != Eigen::Success) {
    std::ostringstream os;
    os << "Hermitian eigensolver failed on a " << s.dim() << "x" << s.dim()
       << " operator with max entry " << s.matrix().cwiseAbs().maxCoeff();
    throw Error(ErrorCode::numeric, os.str());
  }
  const Vector& ev = es.eigenvalues();
  const Index n = ev.size();

  SpectralData out;
  out.pairing_deviation = 0;
  for (Index i = 0; i < n / 2; ++i)
    out.pairing_deviation =
        std::max(out.pairing_deviation, std::abs(ev(i) + ev(n - 1 - i)));

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
    const double ax = std::abs(ev(x)), ay = std::abs(ev(y));
    return ax > ay || (ax == ay && ev(x) > ev(y));
  });

  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Index t = 0; t < n; ++t) {
    const Index src = order[std::size_t(t)];
    out.eigenvalues(t) = ev(src);
    CVector v = es.eigenvectors().col(src);
    Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    const Complex phase = std::conj(v(pivot)) / std::abs(v(pivot));
    v *= phase;
    v(pivot) = Complex(v(pivot).real(), 0.0);
    out.eigenvectors.col(t) = v;
  }
  const double top = out.norm();
  for (Index t = 0; t < n; ++t)
    if (std::abs(out.eigenvalues(t)) >= top - tol * std::max(1.0, top))
      out.max_index_set.push_back(t);
  return out;
}

namespace {

void check_state(const CVector& psi, Index dim) {
  if (psi.size() != dim) {
    std::ostringstream os;
    os << "state has length " << psi.size() << ", expected " << dim;
    throw Error(ErrorCode::dimension_mismatch, os.str());
  }
  if (std::abs(psi.norm() - 1.0) > kUnitVectorTol)
    throw Error(ErrorCode::invalid_input, "state is not unit normalized");
}

// Coefficient matrix J with psi = sum J(mu,nu) e_mu ⊗ f_nu.
CMatrix coefficient_matrix(const CVector& psi, Index a_dim, Index b_dim) {
  CMatrix j(a_dim, b_dim);
  for (Index mu = 0; mu < a_dim; ++mu)
    for (Index nu = 0; nu < b_dim; ++nu) j(mu, nu) = psi(mu * b_dim + nu);
  return j;
}

}  // namespace

Matrix correlation_matrix(const EprConfiguration& cfg, const CVector& psi) {
  const EprDims d = cfg.dims();
  check_state(psi, d.hilbert_dim());
  const CMatrix j = coefficient_matrix(psi, d.a_dim, d.b_dim);
  const CMatrix jc = j.conjugate();

  // <psi| A ⊗ B |psi> = sum conj(J) .* (A J B^T)
  Matrix c(d.na_ops, d.nb_ops);
  double residual = 0;
  for (Index a = 0; a < d.na_ops; ++a) {
    const CMatrix aj = cfg.alice()[std::size_t(a)].matrix() * j;
    for (Index b = 0; b < d.nb_ops; ++b) {
      const Complex value =
          (jc.cwiseProduct(aj * cfg.bob()[std::size_t(b)].matrix().transpose()))
              .sum();
      c(a, b) = value.real();
      residual = std::max(residual, std::abs(value.imag()));
    }
  }
  if (residual > 1e-9)
    throw Error(ErrorCode::numeric,
                "correlation matrix has an imaginary residual above 1e-9");
  return c;
}

NormMeans norm_means(const EprConfiguration& cfg) {
  auto rms = [](const std::vector<HermitianOperator>& ops) {
    double sum = 0;
    for (const auto& op : ops) sum += op.norm() * op.norm();
    return std::sqrt(sum / double(ops.size()));
  };
  return {rms(cfg.alice()), rms(cfg.bob())};
}

CorrelationReport analyze_correlation(const Matrix& c, const WeightMatrix& w,
                                      double s_norm, NormMeans means,
                                      double extreme_tol) {
  if (c.rows() != w.rows() || c.cols() != w.cols())
    throw Error(ErrorCode::dimension_mismatch,
                "correlation and weight matrices differ in shape");
  CorrelationReport r;
  r.matrix = c;
  Eigen::JacobiSVD<Matrix> svd(c);
  r.singular_values = svd.singularValues();
  r.trace_norm = r.singular_values.sum();
  r.schmidt_norm = c.norm();
  r.op_norm = r.singular_values(0);
  r.schmidt_rank = 0;
  if (r.op_norm > 0)
    for (Index i = 0; i < r.singular_values.size(); ++i)
      if (r.singular_values(i) > kSchmidtRankTol * r.op_norm) ++r.schmidt_rank;
  r.bell_expectation = (w.matrix().array() * c.array()).sum();

  const double denom = w.schmidt_norm() * r.schmidt_norm;
  if (denom > 0) {
    r.abs_cos_theta = s_norm / denom;
    // Cauchy-Schwarz gives s_norm <= denom; the absolute floor covers states
    // whose expectation and correlations are both rounding noise.
    if (s_norm > denom * (1.0 + 1e-6) + kCosFloor * w.schmidt_norm()) {
      std::ostringstream os;
      os << "|cos theta| = " << r.abs_cos_theta
         << " exceeds 1; s_norm does not belong to this correlation matrix";
      throw Error(ErrorCode::numeric, os.str());
    }
    r.abs_cos_theta = std::min(r.abs_cos_theta, 1.0);
    const double cos_theta =
        std::copysign(r.abs_cos_theta, r.bell_expectation);
    r.opening_angle_deg = std::acos(cos_theta) * 180.0 / std::numbers::pi;
  }

  const double target = w.dim_scale() * means.a * means.b;
  r.is_extreme =
      target > 0 && std::abs(r.trace_norm - target) <= extreme_tol * target;
  return r;
}

double rigidity_constant(Index n) {
  if (n == 2) return std::numbers::sqrt2 / 2.0;
  if (n == 3) return std::numbers::sqrt3 / 2.0;
  throw Error(ErrorCode::unsupported,
              "correlation rigidity only holds for Bell matrices of order 2 or 3");
}

double rigidity_deviation(const Matrix& c, const BellMatrix& x) {
  const double k = rigidity_constant(x.order());
  if (c.rows() != x.order() || c.cols() != x.order())
    throw Error(ErrorCode::dimension_mismatch,
                "correlation matrix shape does not match the Bell matrix");
  return std::min(spectral_norm(c - k * x.matrix()),
                  spectral_norm(c + k * x.matrix()));
}

double entanglement_entropy(const CVector& psi, Index a_dim, Index b_dim) {
  check_state(psi, a_dim * b_dim);
  Eigen::JacobiSVD<CMatrix> svd(coefficient_matrix(psi, a_dim, b_dim));
  double s = 0;
  for (Index i = 0; i < svd.singularValues().size(); ++i) {
    const double p = svd.singularValues()(i) * svd.singularValues()(i);
    if (p > 0) s -= p * std::log(p);
  }
  return std::max(s, 0.0);
}

LocalityReport quantum_locality_check(const EprConfiguration& cfg,
                                      double tol) {
  auto side = [](const std::vector<HermitianOperator>& ops) {
    double worst = 0;
    for (std::size_t i = 0; i < ops.size(); ++i)
      for (std::size_t j = i + 1; j < ops.size(); ++j) {
        const CMatrix& a = ops[i].matrix();
        const CMatrix& b = ops[j].matrix();
        worst = std::max(worst, spectral_norm(CMatrix(a * b - b * a)));
      }
    return worst;
  };
  const double wa = side(cfg.alice());
  const double wb = side(cfg.bob());
  return {wa <= tol, wb <= tol, std::max(wa, wb)};
}

}  // namespace bellopt
