#include "fioindex/operator_matrix.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>

namespace fioindex {

namespace {

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

template <typename Scalar>
Eigen::VectorXcd synthesize(const ComplexVector<Scalar>& column, int K, int k, const Eigen::VectorXd& x) {
  using C = std::complex<Scalar>;
  // Exact phases per term: a running product would add O(K eps) noise,
  // which the hbar extrapolation amplifies.
  Eigen::VectorXcd v(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    C acc = 0;
    for (int j = -K; j <= K; ++j) {
      const C c = column(j + K);
      if (c != C(0)) acc += c * std::polar(Scalar(1), static_cast<Scalar>(j - k) * static_cast<Scalar>(x(i)));
    }
    v(i) = cplx(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
  }
  return v;
}

}  // namespace

template <typename Scalar>
OperatorMatrix<Scalar> quantize(const Symbol& a, int K, const QuantizeOptions& opt) {
  std::vector<int> cols;
  for (int k = -K; k <= K; ++k) cols.push_back(k);
  return OperatorMatrix<Scalar>(K, quantize_columns<Scalar>(a, K, cols, opt));
}

template <typename Scalar>
ComplexMatrix<Scalar> quantize_columns(const Symbol& a, int K, const std::vector<int>& cols,
                                       const QuantizeOptions& opt) {
  using C = std::complex<Scalar>;
  const int M = opt.fft_size > 0 ? opt.fft_size : next_pow2(2 * (2 * K + 1));
  const Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
  Eigen::FFT<Scalar> fft;
  std::vector<C> buf(M), hat;
  ComplexMatrix<Scalar> out(2 * K + 1, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const int k = cols[c];
    if (std::abs(k) > K) throw std::out_of_range("column mode beyond mode cut");
    // Fourier coefficients of x -> a(x, k) placed at rows j = k + p.
    for (int m = 0; m < M; ++m) {
      const cplx v = a(static_cast<double>(two_pi * m / M), k);
      buf[m] = C(v.real(), v.imag());
    }
    fft.fwd(hat, buf);
    for (int j = -K; j <= K; ++j) {
      const int p = j - k;
      out(j + K, static_cast<Eigen::Index>(c)) = hat[((p % M) + M) % M] / Scalar(M);
    }
  }
  return out;
}

template OperatorMatrix<double> quantize<double>(const Symbol&, int, const QuantizeOptions&);
template OperatorMatrix<long double> quantize<long double>(const Symbol&, int, const QuantizeOptions&);
template ComplexMatrix<double> quantize_columns<double>(const Symbol&, int, const std::vector<int>&,
                                                        const QuantizeOptions&);
template ComplexMatrix<long double> quantize_columns<long double>(const Symbol&, int, const std::vector<int>&,
                                                                  const QuantizeOptions&);

Eigen::VectorXcd full_symbol_column(const Eigen::VectorXcd& column, int K, int k, const Eigen::VectorXd& x) {
  return synthesize<double>(column, K, k, x);
}

Eigen::VectorXcd full_symbol_column(const ComplexVector<long double>& column, int K, int k, const Eigen::VectorXd& x) {
  return synthesize<long double>(column, K, k, x);
}

cplx LatticeSymbol::operator()(double x, int k) const {
  Eigen::VectorXd xs(1);
  xs(0) = x;
  return column(xs, k)(0);
}

Eigen::VectorXcd LatticeSymbol::column(const Eigen::VectorXd& x, int k) const {
  const int K = p_.mode_cut();
  if (std::abs(k) > K) throw std::out_of_range("lattice point beyond mode cut");
  return synthesize<double>(p_.entries().col(k + K), K, k, x);
}

Symbol LatticeSymbol::to_symbol(double order) const {
  LatticeSymbol self = *this;
  return Symbol(
      [self](double x, double xi) {
        const double r = std::round(xi);
        if (std::abs(r - xi) > 1e-9) throw std::domain_error("lattice symbol evaluated off the lattice");
        return self(x, static_cast<int>(r));
      },
      order, {}, "lattice");
}

LatticeSymbol full_symbol(const OperatorMatrixd& p) { return LatticeSymbol(p); }

}  // namespace fioindex
