#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace fioindex {

using cplx = std::complex<double>;

/// Univariate truncated Taylor series sum_m c_m t^m.
class Series1 {
 public:
  Series1() = default;
  explicit Series1(std::vector<cplx> c) : c_(std::move(c)) {}
  /// u0 + t, truncated at order n.
  static Series1 variable(cplx u0, int n);
  static Series1 constant(cplx c, int n);

  int order() const { return static_cast<int>(c_.size()) - 1; }
  const cplx& operator[](int m) const { return c_[m]; }
  cplx& operator[](int m) { return c_[m]; }
  const std::vector<cplx>& coeffs() const { return c_; }

  friend Series1 operator+(const Series1& a, const Series1& b);
  friend Series1 operator-(const Series1& a, const Series1& b);
  friend Series1 operator-(const Series1& a);
  friend Series1 operator*(const Series1& a, const Series1& b);
  friend Series1 operator/(const Series1& a, const Series1& b);
  friend Series1 operator*(cplx s, const Series1& a);

 private:
  std::vector<cplx> c_;
};

Series1 exp(const Series1& s);
Series1 log(const Series1& s);
Series1 pow(const Series1& s, cplx p);
Series1 sin(const Series1& s);
Series1 cos(const Series1& s);
Series1 atan(const Series1& s);
/// |s| for real-valued s, continued from the sign of s[0] (s[0] = 0 counts as positive).
Series1 abs(const Series1& s);
/// The cutoff: 0 for |s| <= 1/2, 1 for |s| >= 1, smooth in between.
Series1 cutoff(const Series1& s);

/// Scalar cutoff chi(xi).
double cutoff(double xi);

/// Truncated bivariate Taylor expansion sum c(i,j) dx^i dxi^j with i <= nx,
/// j <= nxi, around a base point. Arithmetic is exact within the truncation.
class Jet {
 public:
  Jet() = default;
  Jet(int nx, int nxi) : c_(Eigen::MatrixXcd::Zero(nx + 1, nxi + 1)) {}
  static Jet constant(cplx v, int nx, int nxi);
  static Jet x_variable(double x0, int nx, int nxi);
  static Jet xi_variable(double xi0, int nx, int nxi);

  int nx() const { return static_cast<int>(c_.rows()) - 1; }
  int nxi() const { return static_cast<int>(c_.cols()) - 1; }
  cplx value() const { return c_(0, 0); }
  /// d_x^i d_xi^j at the base point.
  cplx derivative(int i, int j) const;
  const Eigen::MatrixXcd& coeffs() const { return c_; }
  Eigen::MatrixXcd& coeffs() { return c_; }

  /// Jet of d_x^i d_xi^j of this function, at reduced orders.
  Jet differentiated(int i, int j) const;
  /// Same function at smaller orders.
  Jet truncated(int nx, int nxi) const;

  friend Jet operator+(const Jet& a, const Jet& b);
  friend Jet operator-(const Jet& a, const Jet& b);
  friend Jet operator-(const Jet& a);
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator*(cplx s, const Jet& a);
  friend Jet operator/(const Jet& a, const Jet& b);

 private:
  Eigen::MatrixXcd c_;
};

/// f(u) where `taylor` holds the univariate coefficients f^(m)(u0)/m! at u0 = u.value().
Jet compose(const Series1& taylor, const Jet& u);

/// Applies a univariate series operation `op` to a jet.
template <typename Op>
Jet apply_unary(const Jet& u, Op&& op) {
  const int n = u.nx() + u.nxi();
  return compose(op(Series1::variable(u.value(), n)), u);
}

}  // namespace fioindex
