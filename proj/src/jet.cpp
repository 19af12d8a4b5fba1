#include "fioindex/jet.hpp"

#include <cmath>
#include <stdexcept>

namespace fioindex {

namespace {

int common_order(const Series1& a, const Series1& b) { return std::min(a.order(), b.order()); }

double factorial(int n) {
  double r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

/// exp(-1/s) for s[0] > 0, the zero series otherwise (the function is flat at 0).
Series1 flat_exp(const Series1& s) {
  if (s[0].real() <= 0) return Series1::constant(0.0, s.order());
  return exp(-(Series1::constant(1.0, s.order()) / s));
}

}  // namespace

Series1 Series1::variable(cplx u0, int n) {
  std::vector<cplx> c(n + 1, 0.0);
  c[0] = u0;
  if (n >= 1) c[1] = 1.0;
  return Series1(std::move(c));
}

Series1 Series1::constant(cplx v, int n) {
  std::vector<cplx> c(n + 1, 0.0);
  c[0] = v;
  return Series1(std::move(c));
}

Series1 operator+(const Series1& a, const Series1& b) {
  const int n = common_order(a, b);
  std::vector<cplx> c(n + 1);
  for (int m = 0; m <= n; ++m) c[m] = a[m] + b[m];
  return Series1(std::move(c));
}

Series1 operator-(const Series1& a) { return cplx(-1.0) * a; }
Series1 operator-(const Series1& a, const Series1& b) { return a + (-b); }

Series1 operator*(cplx s, const Series1& a) {
  std::vector<cplx> c = a.coeffs();
  for (auto& v : c) v *= s;
  return Series1(std::move(c));
}

Series1 operator*(const Series1& a, const Series1& b) {
  const int n = common_order(a, b);
  std::vector<cplx> c(n + 1, 0.0);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; i + j <= n; ++j) c[i + j] += a[i] * b[j];
  return Series1(std::move(c));
}

Series1 operator/(const Series1& a, const Series1& b) {
  if (b[0] == cplx(0.0)) throw std::domain_error("series division by zero");
  const int n = common_order(a, b);
  std::vector<cplx> q(n + 1);
  for (int k = 0; k <= n; ++k) {
    cplx v = a[k];
    for (int j = 1; j <= k; ++j) v -= b[j] * q[k - j];
    q[k] = v / b[0];
  }
  return Series1(std::move(q));
}

Series1 exp(const Series1& s) {
  const int n = s.order();
  std::vector<cplx> e(n + 1, 0.0);
  e[0] = std::exp(s[0]);
  for (int k = 1; k <= n; ++k) {
    cplx v = 0;
    for (int j = 1; j <= k; ++j) v += double(j) * s[j] * e[k - j];
    e[k] = v / double(k);
  }
  return Series1(std::move(e));
}

Series1 log(const Series1& s) {
  if (s[0] == cplx(0.0)) throw std::domain_error("log of a series vanishing at the base point");
  const int n = s.order();
  // l' = s'/s
  std::vector<cplx> ds(std::max(n, 1), 0.0);
  for (int m = 1; m <= n; ++m) ds[m - 1] = double(m) * s[m];
  std::vector<cplx> strunc(s.coeffs().begin(), s.coeffs().begin() + std::max(n, 1));
  const Series1 q = Series1(ds) / Series1(strunc);
  std::vector<cplx> l(n + 1, 0.0);
  l[0] = std::log(s[0]);
  for (int m = 1; m <= n; ++m) l[m] = q[m - 1] / double(m);
  return Series1(std::move(l));
}

Series1 pow(const Series1& s, cplx p) {
  const int n = s.order();
  if (s[0] == cplx(0.0)) {
    // Only non-negative integer powers are defined at a zero.
    if (p.imag() != 0 || p.real() < 0 || p.real() != std::floor(p.real()))
      throw std::domain_error("non-integer power of a series vanishing at the base point");
    Series1 r = Series1::constant(1.0, n);
    for (int k = 0; k < static_cast<int>(p.real()); ++k) r = r * s;
    return r;
  }
  std::vector<cplx> y(n + 1, 0.0);
  y[0] = std::pow(s[0], p);
  for (int k = 1; k <= n; ++k) {
    cplx v = 0;
    for (int j = 1; j <= k; ++j) v += ((p + 1.0) * double(j) - double(k)) * s[j] * y[k - j];
    y[k] = v / (double(k) * s[0]);
  }
  return Series1(std::move(y));
}

Series1 sin(const Series1& s) {
  const int n = s.order();
  std::vector<cplx> sn(n + 1, 0.0), cs(n + 1, 0.0);
  sn[0] = std::sin(s[0]);
  cs[0] = std::cos(s[0]);
  for (int k = 1; k <= n; ++k) {
    cplx a = 0, b = 0;
    for (int j = 1; j <= k; ++j) {
      a += double(j) * s[j] * cs[k - j];
      b -= double(j) * s[j] * sn[k - j];
    }
    sn[k] = a / double(k);
    cs[k] = b / double(k);
  }
  return Series1(std::move(sn));
}

Series1 cos(const Series1& s) {
  const cplx half_pi(std::acos(-1.0) / 2);
  return sin(s + Series1::constant(half_pi, s.order()));
}

Series1 atan(const Series1& s) {
  const int n = s.order();
  std::vector<cplx> ds(std::max(n, 1), 0.0);
  for (int m = 1; m <= n; ++m) ds[m - 1] = double(m) * s[m];
  std::vector<cplx> st(s.coeffs().begin(), s.coeffs().begin() + std::max(n, 1));
  const Series1 sq(st);
  const Series1 q = Series1(ds) / (Series1::constant(1.0, sq.order()) + sq * sq);
  std::vector<cplx> a(n + 1, 0.0);
  a[0] = std::atan(s[0]);
  for (int m = 1; m <= n; ++m) a[m] = q[m - 1] / double(m);
  return Series1(std::move(a));
}

Series1 abs(const Series1& s) { return s[0].real() < 0 ? -s : s; }

Series1 cutoff(const Series1& s) {
  const int n = s.order();
  const Series1 t = 2.0 * abs(s) - Series1::constant(1.0, n);
  if (t[0].real() <= 0) return Series1::constant(0.0, n);
  if (t[0].real() >= 1) return Series1::constant(1.0, n);
  const Series1 f = flat_exp(t);
  const Series1 g = flat_exp(Series1::constant(1.0, n) - t);
  return f / (f + g);
}

double cutoff(double xi) {
  const double t = 2 * std::abs(xi) - 1;
  if (t <= 0) return 0;
  if (t >= 1) return 1;
  const double f = std::exp(-1 / t), g = std::exp(-1 / (1 - t));
  return f / (f + g);
}

Jet Jet::constant(cplx v, int nx, int nxi) {
  Jet j(nx, nxi);
  j.c_(0, 0) = v;
  return j;
}

Jet Jet::x_variable(double x0, int nx, int nxi) {
  Jet j = constant(x0, nx, nxi);
  if (nx >= 1) j.c_(1, 0) = 1.0;
  return j;
}

Jet Jet::xi_variable(double xi0, int nx, int nxi) {
  Jet j = constant(xi0, nx, nxi);
  if (nxi >= 1) j.c_(0, 1) = 1.0;
  return j;
}

cplx Jet::derivative(int i, int j) const { return c_(i, j) * factorial(i) * factorial(j); }

Jet Jet::differentiated(int i, int j) const {
  Jet r(nx() - i, nxi() - j);
  for (int a = 0; a <= r.nx(); ++a)
    for (int b = 0; b <= r.nxi(); ++b)
      r.c_(a, b) = c_(a + i, b + j) * (factorial(a + i) / factorial(a)) * (factorial(b + j) / factorial(b));
  return r;
}

Jet Jet::truncated(int nx, int nxi) const {
  Jet r(nx, nxi);
  r.c_ = c_.topLeftCorner(nx + 1, nxi + 1);
  return r;
}

namespace {
void check_shape(const Jet& a, const Jet& b) {
  if (a.nx() != b.nx() || a.nxi() != b.nxi()) throw std::invalid_argument("jet orders differ");
}
}  // namespace

Jet operator+(const Jet& a, const Jet& b) {
  check_shape(a, b);
  Jet r = a;
  r.c_ += b.c_;
  return r;
}

Jet operator-(const Jet& a) {
  Jet r = a;
  r.c_ = -r.c_;
  return r;
}

Jet operator-(const Jet& a, const Jet& b) { return a + (-b); }

Jet operator*(cplx s, const Jet& a) {
  Jet r = a;
  r.c_ *= s;
  return r;
}

Jet operator*(const Jet& a, const Jet& b) {
  check_shape(a, b);
  const int nx = a.nx(), nxi = a.nxi();
  Jet r(nx, nxi);
  for (int i1 = 0; i1 <= nx; ++i1)
    for (int j1 = 0; j1 <= nxi; ++j1) {
      const cplx v = a.c_(i1, j1);
      if (v == cplx(0.0)) continue;
      for (int i2 = 0; i1 + i2 <= nx; ++i2)
        for (int j2 = 0; j1 + j2 <= nxi; ++j2) r.c_(i1 + i2, j1 + j2) += v * b.c_(i2, j2);
    }
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  return a * apply_unary(b, [](const Series1& s) { return Series1::constant(1.0, s.order()) / s; });
}

Jet compose(const Series1& taylor, const Jet& u) {
  const int n = u.nx() + u.nxi();
  if (taylor.order() < n) throw std::invalid_argument("Taylor series too short for composition");
  Jet d = u;
  d.coeffs()(0, 0) = 0;
  Jet r = Jet::constant(taylor[0], u.nx(), u.nxi());
  Jet p = Jet::constant(1.0, u.nx(), u.nxi());
  for (int m = 1; m <= n; ++m) {
    p = p * d;
    r = r + taylor[m] * p;
  }
  return r;
}

}  // namespace fioindex
