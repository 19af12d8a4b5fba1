#pragma once

#include "fioindex/jet.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace fioindex {

/// Samples of a function on a (x, xi) grid: rows follow x, columns follow xi.
using GridFunction = Eigen::ArrayXXcd;

struct SymbolGrid {
  Eigen::VectorXd x;
  Eigen::VectorXd xi;

  /// `nx` uniform points on [0, 2 pi) and the given xi values.
  static SymbolGrid uniform(int nx, std::vector<double> xi);
  /// x on `nx` points, xi = step * {-n..n} skipping |xi| < min_abs.
  static SymbolGrid lattice(int nx, double step, int n, double min_abs = 0);
};

/// Classical symbol on the cylinder: an evaluator (x, xi) -> complex with an
/// order and optional exact Taylor jets. Without jets, derivatives fall back to
/// spectral differentiation in x and finite differences in xi.
class Symbol {
 public:
  using Eval = std::function<cplx(double, double)>;
  using JetEval = std::function<Jet(double, double, int, int)>;

  Symbol() = default;
  Symbol(Eval f, double order, JetEval jet = {}, std::string name = {});

  static Symbol constant(cplx c);

  cplx operator()(double x, double xi) const { return f_(x, xi); }
  double order() const { return order_; }
  const std::string& name() const { return name_; }
  bool has_jet() const { return static_cast<bool>(jet_); }
  bool vanishes_near_zero_section() const { return vanishes_near_zero_; }

  Symbol& set_vanishes_near_zero_section(bool v) {
    vanishes_near_zero_ = v;
    return *this;
  }
  Symbol& set_order(double m) {
    order_ = m;
    return *this;
  }
  Symbol& set_name(std::string n) {
    name_ = std::move(n);
    return *this;
  }

  /// Taylor jet at (x, xi); exact when a jet evaluator exists.
  Jet jet(double x, double xi, int nx, int nxi) const;
  cplx derivative(int dx, int dxi, double x, double xi) const;
  GridFunction sample(const SymbolGrid& g) const;

 private:
  Eval f_;
  JetEval jet_;
  double order_ = 0;
  bool vanishes_near_zero_ = false;
  std::string name_;
};

Symbol operator+(const Symbol& a, const Symbol& b);
Symbol operator-(const Symbol& a, const Symbol& b);
Symbol operator*(const Symbol& a, const Symbol& b);
Symbol operator*(cplx s, const Symbol& a);

/// a(x, hbar xi).
Symbol scale_symbol(const Symbol& a, double hbar);
/// d_x^i d_xi^j a as a symbol (order drops by j).
Symbol derivative_symbol(const Symbol& a, int i, int j);
/// a o (x, xi) -> (y(x, xi), eta(x, xi)); no jets.
Symbol compose_symbol(const Symbol& a, std::function<std::pair<double, double>(double, double)> map);

/// Numerical derivative used when no jet is available: spectral in x on
/// `spectral_points` samples, centered finite differences in xi.
cplx numeric_derivative(const Symbol::Eval& f, int dx, int dxi, double x, double xi);

/// sup over the grid of |d_x^a d_xi^b a| (1 + xi^2)^{(b - m)/2}, over a <= max_dx, b <= max_dxi.
double symbol_seminorm(const Symbol& a, double m, const SymbolGrid& g, int max_dx, int max_dxi);

struct BoundaryLimitReport {
  bool converges = false;
  double last_increment = 0;  ///< sup_x |a(x, +-R_last) - a(x, +-R_prev)|
  double max_ratio = 0;       ///< largest ratio of consecutive increments
};

/// Cauchy test along xi -> +-infinity for an order-zero symbol.
BoundaryLimitReport boundary_limit_check(const Symbol& a, int nx = 64, double tol = 1e-3);

/// Largest |p| with a visible Fourier coefficient of x -> a(x, xi) over the given xi.
int estimate_x_bandwidth(const Symbol& a, const std::vector<double>& xi, double tol = 1e-13, int samples = 256);

}  // namespace fioindex
