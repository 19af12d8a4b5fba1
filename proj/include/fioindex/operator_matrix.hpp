#pragma once

#include "fioindex/symbol.hpp"

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <vector>

namespace fioindex {

/// Dense operator on the Fourier modes -K..K. Row and column indices are
/// modes; storage index is mode + K.
template <typename Scalar = double>
class OperatorMatrix {
 public:
  using Complex = std::complex<Scalar>;
  using Matrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;

  OperatorMatrix() = default;
  explicit OperatorMatrix(int K) : K_(K), m_(Matrix::Zero(2 * K + 1, 2 * K + 1)) {}
  OperatorMatrix(int K, Matrix m) : K_(K), m_(std::move(m)) {
    if (m_.rows() != 2 * K + 1 || m_.cols() != 2 * K + 1)
      throw std::invalid_argument("operator matrix must be (2K+1) x (2K+1)");
  }

  static OperatorMatrix Identity(int K) { return OperatorMatrix(K, Matrix::Identity(2 * K + 1, 2 * K + 1)); }
  static OperatorMatrix Zero(int K) { return OperatorMatrix(K); }

  int mode_cut() const { return K_; }
  Eigen::Index dim() const { return m_.rows(); }
  Eigen::Index index(int mode) const { return mode + K_; }

  Complex operator()(int row_mode, int col_mode) const { return m_(row_mode + K_, col_mode + K_); }
  Complex& operator()(int row_mode, int col_mode) { return m_(row_mode + K_, col_mode + K_); }

  const Matrix& entries() const { return m_; }
  Matrix& entries() { return m_; }

  OperatorMatrix adjoint() const { return OperatorMatrix(K_, m_.adjoint()); }
  Complex trace() const { return m_.trace(); }

  friend OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
    check(a, b);
    return OperatorMatrix(a.K_, a.m_ + b.m_);
  }
  friend OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) {
    check(a, b);
    return OperatorMatrix(a.K_, a.m_ - b.m_);
  }
  friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
    check(a, b);
    return OperatorMatrix(a.K_, a.m_ * b.m_);
  }
  friend OperatorMatrix operator*(Complex s, const OperatorMatrix& a) { return OperatorMatrix(a.K_, s * a.m_); }

 private:
  static void check(const OperatorMatrix& a, const OperatorMatrix& b) {
    if (a.K_ != b.K_) throw std::invalid_argument("mode cuts differ");
  }

  int K_ = 0;
  Matrix m_;
};

using OperatorMatrixd = OperatorMatrix<double>;

/// Projector onto the modes with sign(k) == sign (sign = 0 selects mode 0 only).
template <typename Scalar = double>
OperatorMatrix<Scalar> mode_projector(int K, int sign) {
  OperatorMatrix<Scalar> p(K);
  for (int k = -K; k <= K; ++k)
    if ((sign > 0 && k > 0) || (sign < 0 && k < 0) || (sign == 0 && k == 0)) p(k, k) = 1;
  return p;
}

/// Sum of diagonal entries over |k| <= W.
template <typename Scalar>
std::complex<Scalar> windowed_trace(const OperatorMatrix<Scalar>& a, int W) {
  std::complex<Scalar> t = 0;
  for (int k = -W; k <= W; ++k) t += a(k, k);
  return t;
}

/// Largest |entry| with max(|row mode|, |column mode|) in (lo, hi].
template <typename Scalar>
Scalar band_max(const OperatorMatrix<Scalar>& a, int lo, int hi) {
  Scalar m = 0;
  for (int j = -hi; j <= hi; ++j)
    for (int k = -hi; k <= hi; ++k)
      if (std::max(std::abs(j), std::abs(k)) > lo) m = std::max(m, std::abs(a(j, k)));
  return m;
}

struct QuantizeOptions {
  /// FFT length in x; 0 picks the next power of two >= 2(2K+1).
  int fft_size = 0;
};

template <typename Scalar>
using ComplexMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

/// Left (Kohn-Nirenberg) quantization: entry (j, k) is the Fourier coefficient
/// j - k of x -> a(x, k). Instantiated for double and long double.
template <typename Scalar = double>
OperatorMatrix<Scalar> quantize(const Symbol& a, int K, const QuantizeOptions& opt = {});
/// Selected columns only: column c of the result is column cols[c] of quantize(a, K).
template <typename Scalar = double>
ComplexMatrix<Scalar> quantize_columns(const Symbol& a, int K, const std::vector<int>& cols,
                                       const QuantizeOptions& opt = {});

/// Full symbol of a matrix, tabulated on the integer lattice.
class LatticeSymbol {
 public:
  explicit LatticeSymbol(OperatorMatrixd p) : p_(std::move(p)) {}
  int mode_cut() const { return p_.mode_cut(); }
  /// sum_j P(j, k) e^{i (j - k) x}
  cplx operator()(double x, int k) const;
  /// Values at the given x for column k.
  Eigen::VectorXcd column(const Eigen::VectorXd& x, int k) const;
  /// Evaluator accepting only (near-)integer xi.
  Symbol to_symbol(double order = 0) const;

 private:
  OperatorMatrixd p_;
};

LatticeSymbol full_symbol(const OperatorMatrixd& p);

/// Full symbol of matrix column k (length 2K+1) at the points x.
Eigen::VectorXcd full_symbol_column(const Eigen::VectorXcd& column, int K, int k, const Eigen::VectorXd& x);
Eigen::VectorXcd full_symbol_column(const ComplexVector<long double>& column, int K, int k, const Eigen::VectorXd& x);

}  // namespace fioindex
