#include "fioindex/symbol.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fioindex {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;
constexpr int kSpectralPoints = 64;
constexpr double kFdStep = 1.0 / 16;
constexpr int kFdHalfWidth = 5;

double factorial(int n) {
  double r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

/// Fornberg weights for the m-th derivative at 0 on the given nodes.
std::vector<double> fd_weights(const std::vector<double>& nodes, int m) {
  const int n = static_cast<int>(nodes.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, m + 1);
  double c1 = 1, c4 = nodes[0];
  c(0, 0) = 1;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1;
    const double c5 = c4;
    c4 = nodes[i];
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
        c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
      c(j, 0) = c4 * c(j, 0) / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c(i, m);
  return w;
}

const std::vector<double>& stencil_weights(int m) {
  static const std::vector<std::vector<double>> table = [] {
    std::vector<double> nodes;
    for (int s = -kFdHalfWidth; s <= kFdHalfWidth; ++s) nodes.push_back(s * kFdStep);
    std::vector<std::vector<double>> t;
    for (int k = 0; k <= 8; ++k) t.push_back(fd_weights(nodes, k));
    return t;
  }();
  if (m > 8) throw std::invalid_argument("finite-difference order above 8");
  return table[m];
}

/// d_x^dx of x -> f(x, xi) at x by trigonometric interpolation.
cplx spectral_dx(const Symbol::Eval& f, int dx, double x, double xi) {
  if (dx == 0) return f(x, xi);
  static thread_local Eigen::FFT<double> fft;
  std::vector<cplx> s(kSpectralPoints), hat;
  for (int m = 0; m < kSpectralPoints; ++m) s[m] = f(kTwoPi * m / kSpectralPoints, xi);
  fft.fwd(hat, s);
  cplx acc = 0;
  for (int q = 0; q < kSpectralPoints; ++q) {
    const int p = q <= kSpectralPoints / 2 ? q : q - kSpectralPoints;
    if (2 * std::abs(p) == kSpectralPoints) continue;
    acc += std::pow(cplx(0, p), dx) * hat[q] * std::exp(cplx(0, p * x));
  }
  return acc / double(kSpectralPoints);
}

}  // namespace

SymbolGrid SymbolGrid::uniform(int nx, std::vector<double> xi) {
  SymbolGrid g;
  g.x.resize(nx);
  for (int i = 0; i < nx; ++i) g.x(i) = kTwoPi * i / nx;
  g.xi = Eigen::Map<Eigen::VectorXd>(xi.data(), static_cast<Eigen::Index>(xi.size()));
  return g;
}

SymbolGrid SymbolGrid::lattice(int nx, double step, int n, double min_abs) {
  std::vector<double> xi;
  for (int k = -n; k <= n; ++k)
    if (std::abs(k * step) >= min_abs) xi.push_back(k * step);
  return uniform(nx, xi);
}

cplx numeric_derivative(const Symbol::Eval& f, int dx, int dxi, double x, double xi) {
  if (dxi == 0) return spectral_dx(f, dx, x, xi);
  const auto& w = stencil_weights(dxi);
  cplx acc = 0;
  for (int s = -kFdHalfWidth; s <= kFdHalfWidth; ++s)
    acc += w[s + kFdHalfWidth] * spectral_dx(f, dx, x, xi + s * kFdStep);
  return acc;
}

Symbol::Symbol(Eval f, double order, JetEval jet, std::string name)
    : f_(std::move(f)), jet_(std::move(jet)), order_(order), name_(std::move(name)) {}

Symbol Symbol::constant(cplx c) {
  return Symbol([c](double, double) { return c; }, 0,
                [c](double, double, int nx, int nxi) { return Jet::constant(c, nx, nxi); },
                "const");
}

Jet Symbol::jet(double x, double xi, int nx, int nxi) const {
  if (jet_) return jet_(x, xi, nx, nxi);
  Jet j(nx, nxi);
  for (int a = 0; a <= nx; ++a)
    for (int b = 0; b <= nxi; ++b)
      j.coeffs()(a, b) = numeric_derivative(f_, a, b, x, xi) / (factorial(a) * factorial(b));
  return j;
}

cplx Symbol::derivative(int dx, int dxi, double x, double xi) const {
  if (dx == 0 && dxi == 0) return f_(x, xi);
  if (jet_) return jet_(x, xi, dx, dxi).derivative(dx, dxi);
  return numeric_derivative(f_, dx, dxi, x, xi);
}

GridFunction Symbol::sample(const SymbolGrid& g) const {
  GridFunction out(g.x.size(), g.xi.size());
  for (Eigen::Index j = 0; j < g.xi.size(); ++j)
    for (Eigen::Index i = 0; i < g.x.size(); ++i) out(i, j) = f_(g.x(i), g.xi(j));
  return out;
}

namespace {

Symbol::JetEval combine_jets(const Symbol& a, const Symbol& b, std::function<Jet(const Jet&, const Jet&)> op) {
  if (!a.has_jet() || !b.has_jet()) return {};
  return [a, b, op](double x, double xi, int nx, int nxi) { return op(a.jet(x, xi, nx, nxi), b.jet(x, xi, nx, nxi)); };
}

}  // namespace

Symbol operator+(const Symbol& a, const Symbol& b) {
  Symbol s([a, b](double x, double xi) { return a(x, xi) + b(x, xi); }, std::max(a.order(), b.order()),
           combine_jets(a, b, [](const Jet& p, const Jet& q) { return p + q; }), "(" + a.name() + "+" + b.name() + ")");
  s.set_vanishes_near_zero_section(a.vanishes_near_zero_section() && b.vanishes_near_zero_section());
  return s;
}

Symbol operator*(cplx c, const Symbol& a) {
  Symbol::JetEval je;
  if (a.has_jet()) je = [a, c](double x, double xi, int nx, int nxi) { return c * a.jet(x, xi, nx, nxi); };
  Symbol s([a, c](double x, double xi) { return c * a(x, xi); }, a.order(), je, a.name());
  s.set_vanishes_near_zero_section(a.vanishes_near_zero_section());
  return s;
}

Symbol operator-(const Symbol& a, const Symbol& b) { return a + cplx(-1.0) * b; }

Symbol operator*(const Symbol& a, const Symbol& b) {
  Symbol s([a, b](double x, double xi) { return a(x, xi) * b(x, xi); }, a.order() + b.order(),
           combine_jets(a, b, [](const Jet& p, const Jet& q) { return p * q; }), a.name() + "*" + b.name());
  s.set_vanishes_near_zero_section(a.vanishes_near_zero_section() || b.vanishes_near_zero_section());
  return s;
}

Symbol scale_symbol(const Symbol& a, double hbar) {
  if (!(hbar > 0)) throw std::invalid_argument("hbar must be positive");
  Symbol::JetEval je;
  if (a.has_jet())
    je = [a, hbar](double x, double xi, int nx, int nxi) {
      Jet j = a.jet(x, hbar * xi, nx, nxi);
      double s = 1;
      for (int b = 0; b <= nxi; ++b, s *= hbar) j.coeffs().col(b) *= s;
      return j;
    };
  // For hbar = 1/L the division xi / L is exact on lattice points, so every
  // ladder member samples a at the same xi.
  const double inv = std::round(1 / hbar);
  if (std::abs(inv * hbar - 1) < 1e-14)
    return Symbol([a, inv](double x, double xi) { return a(x, xi / inv); }, a.order(), je, a.name());
  return Symbol([a, hbar](double x, double xi) { return a(x, hbar * xi); }, a.order(), je, a.name());
}

Symbol derivative_symbol(const Symbol& a, int i, int j) {
  Symbol::JetEval je;
  if (a.has_jet())
    je = [a, i, j](double x, double xi, int nx, int nxi) { return a.jet(x, xi, nx + i, nxi + j).differentiated(i, j); };
  Symbol s([a, i, j](double x, double xi) { return a.derivative(i, j, x, xi); }, a.order() - j, je, a.name());
  s.set_vanishes_near_zero_section(a.vanishes_near_zero_section());
  return s;
}

Symbol compose_symbol(const Symbol& a, std::function<std::pair<double, double>(double, double)> map) {
  return Symbol(
      [a, map](double x, double xi) {
        const auto [y, eta] = map(x, xi);
        return a(y, eta);
      },
      a.order(), {}, a.name());
}

double symbol_seminorm(const Symbol& a, double m, const SymbolGrid& g, int max_dx, int max_dxi) {
  double sup = 0;
  for (Eigen::Index j = 0; j < g.xi.size(); ++j) {
    const double xi = g.xi(j);
    for (Eigen::Index i = 0; i < g.x.size(); ++i) {
      const Jet jt = a.jet(g.x(i), xi, max_dx, max_dxi);
      for (int p = 0; p <= max_dx; ++p)
        for (int q = 0; q <= max_dxi; ++q)
          sup = std::max(sup, std::abs(jt.derivative(p, q)) * std::pow(1 + xi * xi, 0.5 * (q - m)));
    }
  }
  return sup;
}

BoundaryLimitReport boundary_limit_check(const Symbol& a, int nx, double tol) {
  BoundaryLimitReport rep;
  std::vector<double> inc;
  for (int j = 4; j < 20; ++j) {
    const double r0 = std::ldexp(1.0, j), r1 = 2 * r0;
    double d = 0;
    for (int i = 0; i < nx; ++i) {
      const double x = kTwoPi * i / nx;
      d = std::max(d, std::abs(a(x, r1) - a(x, r0)));
      d = std::max(d, std::abs(a(x, -r1) - a(x, -r0)));
    }
    inc.push_back(d);
  }
  rep.last_increment = inc.back();
  for (std::size_t k = 1; k < inc.size(); ++k)
    if (inc[k - 1] > 1e-14) rep.max_ratio = std::max(rep.max_ratio, inc[k] / inc[k - 1]);
  rep.converges = rep.last_increment < tol && rep.max_ratio <= 1.0 + 1e-6;
  return rep;
}

int estimate_x_bandwidth(const Symbol& a, const std::vector<double>& xi, double tol, int samples) {
  Eigen::FFT<double> fft;
  int bw = 0;
  for (double e : xi) {
    std::vector<cplx> s(samples), hat;
    double scale = 0;
    for (int m = 0; m < samples; ++m) {
      s[m] = a(kTwoPi * m / samples, e);
      scale = std::max(scale, std::abs(s[m]));
    }
    fft.fwd(hat, s);
    for (int q = 0; q < samples; ++q) {
      const int p = q <= samples / 2 ? q : q - samples;
      if (std::abs(hat[q]) / samples > tol * std::max(scale, 1.0)) bw = std::max(bw, std::abs(p));
    }
  }
  return bw;
}

}  // namespace fioindex
