#pragma once

// Slow, independent reference computations used to cross-check the library.
// Nothing here calls into bellopt beyond its type aliases.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "bellopt/core.hpp"

namespace oracle {

using bellopt::CMatrix;
using bellopt::Complex;
using bellopt::CVector;
using bellopt::Index;
using bellopt::Matrix;
using bellopt::Vector;

// Vector of +/-1 picked by the low bits of `mask`.
inline Vector corner(Index n, std::uint64_t mask) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = (mask >> i) & 1 ? -1.0 : 1.0;
  return v;
}

// max |(a, W b)| over every pair of hypercube corners.
inline double hv_norm_all_pairs(const Matrix& w) {
  double best = 0;
  for (std::uint64_t ma = 0; ma < (1ULL << w.rows()); ++ma) {
    const Vector a = corner(w.rows(), ma);
    for (std::uint64_t mb = 0; mb < (1ULL << w.cols()); ++mb)
      best = std::max(best, std::abs(a.dot(w * corner(w.cols(), mb))));
  }
  return best;
}

// Same over a box, every corner of both boxes.
inline double box_norm_all_pairs(const Matrix& w,
                                 const std::vector<std::pair<double, double>>& ab,
                                 const std::vector<std::pair<double, double>>& bb) {
  auto pick = [](const std::vector<std::pair<double, double>>& box,
                 std::uint64_t mask) {
    Vector v(Index(box.size()));
    for (std::size_t i = 0; i < box.size(); ++i)
      v(Index(i)) = (mask >> i) & 1 ? box[i].second : box[i].first;
    return v;
  };
  double best = 0;
  for (std::uint64_t ma = 0; ma < (1ULL << ab.size()); ++ma) {
    const Vector a = pick(ab, ma);
    for (std::uint64_t mb = 0; mb < (1ULL << bb.size()); ++mb)
      best = std::max(best, std::abs(a.dot(w * pick(bb, mb))));
  }
  return best;
}

// Largest singular value by power iteration on W^T W.
inline double op_norm_power(const Matrix& w, int iters = 5000) {
  Vector v = Vector::Ones(w.cols()) + Vector::LinSpaced(w.cols(), 0.1, 0.3);
  double lambda = 0;
  for (int i = 0; i < iters; ++i) {
    Vector next = w.transpose() * (w * v);
    const double n = next.norm();
    if (n == 0) return 0;
    lambda = n / v.norm();
    v = next / n;
  }
  return std::sqrt(lambda);
}

// max |eigenvalue| of a Hermitian matrix by power iteration. Iterating on
// c I + S and c I - S (c = Frobenius norm, so both are positive semidefinite)
// finds the two ends of the spectrum separately, which avoids stalling when
// +lambda and -lambda nearly tie in magnitude.
inline double hermitian_norm_power(const CMatrix& s, int iters = 20000) {
  const Index n = s.rows();
  const double c = s.norm();
  if (c == 0) return 0;
  double best = 0;
  for (double sign : {1.0, -1.0}) {
    const CMatrix m = c * CMatrix::Identity(n, n) + sign * s;
    CVector v(n);
    for (Index i = 0; i < n; ++i)
      v(i) = Complex(1.0 + 0.37 * double(i), 0.11 * double(i * i % 7));
    v.normalize();
    for (int i = 0; i < iters; ++i) v = (m * v).normalized();
    const double rayleigh = (v.adjoint() * s * v)(0, 0).real();
    best = std::max(best, std::abs(rayleigh));
  }
  return best;
}

// Explicit element-wise tensor product, independent of any library helper.
inline CMatrix tensor(const CMatrix& a, const CMatrix& b) {
  CMatrix out = CMatrix::Zero(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      for (Index k = 0; k < b.rows(); ++k)
        for (Index l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

inline CMatrix bell_operator(const Matrix& w, const std::vector<CMatrix>& a,
                             const std::vector<CMatrix>& b) {
  const Index d = a[0].rows() * b[0].rows();
  CMatrix s = CMatrix::Zero(d, d);
  for (Index j = 0; j < w.rows(); ++j)
    for (Index k = 0; k < w.cols(); ++k)
      s += w(j, k) * tensor(a[std::size_t(j)], b[std::size_t(k)]);
  return s;
}

inline double expectation(const CMatrix& op, const CVector& psi) {
  return (psi.adjoint() * op * psi)(0, 0).real();
}

// Entropy of the reduced density matrix of Alice, from its eigenvalues.
inline double entropy_partial_trace(const CVector& psi, Index na, Index nb) {
  CMatrix rho = CMatrix::Zero(na, na);
  for (Index i = 0; i < na; ++i)
    for (Index j = 0; j < na; ++j)
      for (Index k = 0; k < nb; ++k)
        rho(i, j) += psi(i * nb + k) * std::conj(psi(j * nb + k));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
  double s = 0;
  for (Index i = 0; i < na; ++i) {
    const double p = es.eigenvalues()(i);
    if (p > 1e-300) s -= p * std::log(p);
  }
  return s;
}

// Same for Bob by tracing out the first factor.
inline double entropy_partial_trace_b(const CVector& psi, Index na, Index nb) {
  CMatrix rho = CMatrix::Zero(nb, nb);
  for (Index k = 0; k < nb; ++k)
    for (Index l = 0; l < nb; ++l)
      for (Index i = 0; i < na; ++i)
        rho(k, l) += psi(i * nb + k) * std::conj(psi(i * nb + l));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
  double s = 0;
  for (Index i = 0; i < nb; ++i) {
    const double p = es.eigenvalues()(i);
    if (p > 1e-300) s -= p * std::log(p);
  }
  return s;
}

inline CMatrix random_hermitian(Index n, std::mt19937_64& rng,
                                bool unit = true) {
  std::normal_distribution<double> g;
  CMatrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  CMatrix h = 0.5 * (m + m.adjoint());
  if (unit) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    h /= es.eigenvalues().cwiseAbs().maxCoeff();
  }
  return h;
}

inline CMatrix random_unitary(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<CMatrix> qr(m);
  return qr.householderQ();
}

inline CVector random_state(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
  return v.normalized();
}

inline Matrix random_matrix(Index r, Index c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

}  // namespace oracle
