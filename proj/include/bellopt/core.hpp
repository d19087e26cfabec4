#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bellopt {

using Index = Eigen::Index;
using Complex = std::complex<double>;

template <class T>
using Dense = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Column = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using Matrix = Dense<double>;
using Vector = Column<double>;
using CMatrix = Dense<Complex>;
using CVector = Column<Complex>;

enum class ErrorCode {
  invalid_input,
  dimension_mismatch,
  resource_limit,
  numeric,
  unsupported,
  // Bell-matrix validation failures.
  not_square,
  bad_entry_value,
  bad_support_count,
  reducible,
  even_minus_count,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Largest singular value of any dense real or complex expression.
template <class Derived>
typename Eigen::NumTraits<typename Derived::Scalar>::Real spectral_norm(
    const Eigen::MatrixBase<Derived>& m) {
  using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  if (m.size() == 0) return Real(0);
  Eigen::JacobiSVD<Dense<typename Derived::Scalar>> svd(m.eval());
  return svd.singularValues()(0);
}

/// Kronecker product a ⊗ b with the row index of `a` varying slowest, so that
/// (a ⊗ b)(i*rb + k, j*cb + l) = a(i,j) * b(k,l).
template <class DerivedA, class DerivedB>
Dense<typename DerivedA::Scalar> kron(const Eigen::MatrixBase<DerivedA>& a,
                                      const Eigen::MatrixBase<DerivedB>& b) {
  const Index rb = b.rows(), cb = b.cols();
  Dense<typename DerivedA::Scalar> out(a.rows() * rb, a.cols() * cb);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * rb, j * cb, rb, cb) = a(i, j) * b;
  return out;
}

}  // namespace bellopt
