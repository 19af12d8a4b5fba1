#include <doctest.h>

#include "fioindex/expression.hpp"
#include "fioindex/operator_matrix.hpp"
#include "fioindex/star.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace fioindex;

namespace {

double max_abs(const GridFunction& g) { return g.abs().maxCoeff(); }

StarOptions fast_options() {
  StarOptions o;
  o.K = 256;
  return o;
}

}  // namespace

TEST_CASE("series jets match closed-form derivatives") {
  const Jet u = Jet::xi_variable(0.7, 0, 4);
  const Jet a = apply_unary(u, [](const Series1& s) { return atan(s); });
  // d/dxi atan = 1/(1+xi^2), second derivative -2xi/(1+xi^2)^2.
  const double q = 1 + 0.49;
  CHECK(std::abs(a.derivative(0, 1) - 1.0 / q) < 1e-14);
  CHECK(std::abs(a.derivative(0, 2) - (-2 * 0.7 / (q * q))) < 1e-14);
  const Jet e = apply_unary(Jet::x_variable(0.3, 5, 0), [](const Series1& s) { return exp(s); });
  for (int k = 0; k <= 5; ++k) CHECK(std::abs(e.derivative(k, 0) - std::exp(0.3)) < 1e-13);
}

TEST_CASE("parsed symbols: values and jets") {
  const Symbol s = parse_symbol("sin(2*x)*xi/sqrt(1+xi^2) + chi(xi)*exp(i*x)");
  const double x = 0.4, xi = 1.7;
  const cplx expected =
      std::sin(2 * x) * xi / std::sqrt(1 + xi * xi) + cutoff(xi) * std::exp(cplx(0, x));
  CHECK(std::abs(s(x, xi) - expected) < 1e-14);
  CHECK(s.has_jet());
  // Jets against finite differences of the evaluator.
  const double h = 1e-4;
  const cplx dxi_fd = (s(x, xi + h) - s(x, xi - h)) / (2 * h);
  const cplx dx_fd = (s(x + h, xi) - s(x - h, xi)) / (2 * h);
  CHECK(std::abs(s.derivative(0, 1, x, xi) - dxi_fd) < 1e-7);
  CHECK(std::abs(s.derivative(1, 0, x, xi) - dx_fd) < 1e-7);
  // Mixed derivative of a product with exact value.
  const Symbol p = parse_symbol("cos(x)*xi^3");
  CHECK(std::abs(p.derivative(1, 2, 0.5, 2.0) - (-std::sin(0.5) * 6 * 2.0)) < 1e-13);
}

TEST_CASE("cutoff shape") {
  CHECK(cutoff(0.0) == 0);
  CHECK(cutoff(0.5) == 0);
  CHECK(cutoff(-0.4) == 0);
  CHECK(cutoff(1.0) == 1);
  CHECK(cutoff(-3.0) == 1);
  const double m = cutoff(0.75);
  CHECK(m > 0);
  CHECK(m < 1);
  // Jet of chi agrees with the scalar function and is flat outside the transition.
  const Symbol c = parse_symbol("chi(xi)");
  CHECK(std::abs(c.derivative(0, 1, 0, 2.0)) == doctest::Approx(0).epsilon(1e-15));
  const double h = 1e-5;
  CHECK(std::abs(c.derivative(0, 1, 0, 0.8) - (cutoff(0.8 + h) - cutoff(0.8 - h)) / (2 * h)) < 1e-7);
}

TEST_CASE("expression errors carry an offset") {
  CHECK_THROWS_AS(parse_symbol("sin(x"), ExpressionError);
  CHECK_THROWS_AS(parse_symbol("foo(x)"), ExpressionError);
  CHECK_THROWS_AS(parse_symbol("x +"), ExpressionError);
  CHECK_THROWS_AS(parse_symbol("x $ 2"), ExpressionError);
  try {
    parse_symbol("1 + bar");
  } catch (const ExpressionError& e) {
    CHECK(e.position() == 4);
  }
  CHECK(std::abs(parse_symbol("2^3^2")(0, 0) - 512.0) < 1e-12);
  CHECK(std::abs(parse_symbol("-2^2")(0, 0) + 4.0) < 1e-12);
}

TEST_CASE("quantize: identity, shift and multiplier") {
  const int K = 8;
  const OperatorMatrixd one = quantize(Symbol::constant(1), K);
  CHECK((one.entries() - OperatorMatrixd::Identity(K).entries()).cwiseAbs().maxCoeff() < 1e-14);

  const OperatorMatrixd shift = quantize(parse_symbol("exp(i*x)"), K);
  for (int j = -K; j <= K; ++j)
    for (int k = -K; k <= K; ++k) CHECK(std::abs(shift(j, k) - (j == k + 1 ? 1.0 : 0.0)) < 1e-14);

  const OperatorMatrixd mult = quantize(parse_symbol("xi"), K);
  for (int j = -K; j <= K; ++j)
    for (int k = -K; k <= K; ++k) CHECK(std::abs(mult(j, k) - (j == k ? double(k) : 0.0)) < 1e-13);
}

TEST_CASE("full symbol round trip") {
  const int K = 32;
  const LatticeSymbol one = full_symbol(quantize(Symbol::constant(1), K));
  const LatticeSymbol e = full_symbol(quantize(parse_symbol("exp(i*x)"), K));
  for (int k = -K + 1; k < K; k += 5)
    for (double x : {0.0, 1.1, 4.0}) {
      CHECK(std::abs(one(x, k) - 1.0) < 1e-13);
      CHECK(std::abs(e(x, k) - std::exp(cplx(0, x))) < 1e-13);
    }

  std::mt19937_64 rng(7);
  const int band = 3;
  for (int trial = 0; trial < 5; ++trial) {
    const Symbol a = parse_symbol(random_symbol_expression(rng, band, 4));
    const LatticeSymbol r = full_symbol(quantize(a, K));
    double err = 0;
    for (int k = -K + band; k <= K - band; ++k)
      for (int m = 0; m < 16; ++m) {
        const double x = 2 * std::numbers::pi * m / 16 + 0.1;
        err = std::max(err, std::abs(r(x, k) - a(x, k)));
      }
    CHECK(err < 1e-12);
  }
}

TEST_CASE("scale_symbol laws") {
  const Symbol xi = parse_symbol("xi");
  CHECK(std::abs(scale_symbol(xi, 0.25)(1.0, 3.0) - 0.75) < 1e-15);
  const Symbol a = parse_symbol("cos(x)*atan(xi)");
  CHECK(std::abs(scale_symbol(a, 1)(0.3, 2.0) - a(0.3, 2.0)) < 1e-15);
  CHECK(std::abs(scale_symbol(scale_symbol(a, 0.5), 0.2)(0.3, 7.0) - scale_symbol(a, 0.1)(0.3, 7.0)) < 1e-15);
}

TEST_CASE("symbol estimates and boundary continuity") {
  const SymbolGrid g = SymbolGrid::uniform(32, {-100, -10, -1, 0, 1, 10, 100, 1000});
  CHECK(std::isfinite(symbol_seminorm(parse_symbol("xi/sqrt(1+xi^2)*cos(x)"), 0, g, 2, 3)));
  CHECK(boundary_limit_check(parse_symbol("xi/sqrt(1+xi^2)*cos(x)")).converges);
  CHECK_FALSE(boundary_limit_check(parse_symbol("sin(log(1+xi^2))")).converges);
  CHECK(estimate_x_bandwidth(parse_symbol("cos(3*x)*atan(xi)+exp(i*x)"), {0.5, 2.0}) == 3);
}

TEST_CASE("star product: unit and leading term") {
  const SymbolGrid g = default_star_grid();
  const Symbol a = parse_symbol("exp(i*x)*chi(xi) + 0.3*cos(2*x)*atan(xi)");
  const Symbol b = parse_symbol("sin(x)/(1+(xi-0.2)^2)");
  const StarOptions opt = fast_options();

  const GridSeries unit = star_numeric(a, Symbol::constant(1), 3, g, opt);
  CHECK(max_abs(unit.series.coeff(0) - a.sample(g)) < 1e-8);
  for (int n = 1; n <= 3; ++n) CHECK(max_abs(unit.series.coeff(n)) < 1e-8);

  // Leading term for a pair whose hbar-coefficients the ladder resolves.
  const Symbol c = parse_symbol("exp(i*x)*atan(0.5*xi) + 0.3*cos(x)");
  const Symbol d = parse_symbol("sin(x)/(1+(0.4*xi-0.2)^2)");
  const GridSeries cd = star_numeric(c, d, 3, g, opt);
  CHECK(max_abs(cd.series.coeff(0) - c.sample(g) * d.sample(g)) < 1e-8);
}

TEST_CASE("star commutator gives the Poisson bracket") {
  const SymbolGrid g = default_star_grid();
  const Symbol a = parse_symbol("exp(i*x)*chi(xi)");
  const Symbol b = parse_symbol("atan(xi)");
  const GridSeries ab = star_numeric(a, b, 3, g, fast_options());
  const GridSeries ba = star_numeric(b, a, 3, g, fast_options());
  // (1/i){a, b} with {a, b} = d_xi a d_x b - d_x a d_xi b = -i e^{ix} chi / (1 + xi^2).
  const Symbol expected = parse_symbol("-exp(i*x)*chi(xi)/(1+xi^2)");
  CHECK(max_abs(ab.series.coeff(1) - ba.series.coeff(1) - expected.sample(g)) < 1e-6);
}

TEST_CASE("star numeric and analytic agree on random symbols") {
  const SymbolGrid g = default_star_grid();
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 2; ++trial) {
    const Symbol a = parse_symbol(random_symbol_expression(rng, 1, 3));
    const Symbol b = parse_symbol(random_symbol_expression(rng, 1, 3));
    const GridSeries num = star_numeric(a, b, 3, g, fast_options());
    const FormalSeries<GridFunction> ana = star_analytic(a, b, 3, g);
    for (int n = 0; n <= 3; ++n) CHECK(max_abs(num.series.coeff(n) - ana.coeff(n)) < 1e-6);
  }
}

TEST_CASE("star product of multipliers is pointwise") {
  const SymbolGrid g = default_star_grid();
  const Symbol a = parse_symbol("atan(xi)"), b = parse_symbol("1/(1+xi^2)");
  const FormalSeries<GridFunction> ana = star_analytic(a, b, 3, g);
  CHECK(max_abs(ana.coeff(0) - a.sample(g) * b.sample(g)) < 1e-15);
  for (int n = 1; n <= 3; ++n) CHECK(max_abs(ana.coeff(n)) == 0);
  const GridSeries num = star_numeric(a, b, 3, g, fast_options());
  for (int n = 1; n <= 3; ++n) CHECK(max_abs(num.series.coeff(n)) < 1e-9);
}

TEST_CASE("star associativity") {
  const SymbolGrid g = default_star_grid();
  const Symbol a = parse_symbol("exp(i*x)*atan(0.4*xi)");
  const Symbol b = parse_symbol("cos(x)/(1+(0.3*xi+0.3)^2)");
  const Symbol c = parse_symbol("sin(x)*0.5*xi/sqrt(1+0.25*xi^2)");
  const int N = 3;

  // Analytic: both bracketings of the formal series.
  const std::vector<Symbol> ab = star_series({a}, {b}, N), bc = star_series({b}, {c}, N);
  const std::vector<Symbol> left = star_series(ab, {c}, N), right = star_series({a}, bc, N);
  for (int n = 0; n <= N; ++n) CHECK(max_abs(left[n].sample(g) - right[n].sample(g)) < 1e-10);

  // Numeric triple product against the analytic bracketing.
  const GridSeries triple = star_numeric_triple(a, b, c, N, g, fast_options());
  for (int n = 0; n <= N; ++n) CHECK(max_abs(triple.series.coeff(n) - left[n].sample(g)) < 1e-6);
}

TEST_CASE("boundary extension of order-zero coefficients") {
  const SymbolGrid shells = shell_grid(32);
  const Symbol f = parse_symbol("exp(i*x)*chi(xi)");
  const Symbol g = parse_symbol("xi/(1+abs(xi))");
  const BoundaryExtensionReport rep = boundary_extension_check(star_coefficients(f, g, 3, shells));
  CHECK(rep.pass);
  CHECK(rep.orders[1].sup < 1.0);
  CHECK(rep.orders[1].measured_order < -1.5);

  const BoundaryExtensionReport consts =
      boundary_extension_check(star_coefficients(Symbol::constant(2), Symbol::constant(3), 3, shells));
  CHECK(consts.pass);
  for (int n = 1; n <= 3; ++n) CHECK(consts.orders[n].sup == 0);

  CHECK_THROWS_AS(star_numeric(f, g, 2, SymbolGrid::lattice(16, 0.25, 80), fast_options()), ModeCutError);
}
