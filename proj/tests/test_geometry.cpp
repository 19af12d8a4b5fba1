#include <doctest.h>

#include "fioindex/expression.hpp"
#include "fioindex/geometry.hpp"
#include "fioindex/traces.hpp"

#include <cmath>
#include <numbers>

using namespace fioindex;

namespace {

constexpr double kPi = std::numbers::pi;

Symbol winding(int m) { return parse_symbol("exp(i*" + std::to_string(m) + "*x)"); }

double bump(double s) { return std::abs(s) < 1 ? std::exp(-1 / (1 - s * s)) : 0.0; }
double bump_derivative(double s) {
  if (std::abs(s) >= 1) return 0;
  const double q = 1 - s * s;
  return bump(s) * (-2 * s / (q * q));
}

}  // namespace

TEST_CASE("windings of transition data") {
  const CanonicalTransformation id;
  auto gb = compute_theta0_windings(id, Symbol::constant(1), Symbol::constant(1), 256);
  CHECK(gb.w_plus == 0);
  CHECK(gb.w_minus == 0);
  CHECK(gb.gap < 1e-9);

  for (int m = -2; m <= 2; ++m) {
    gb = compute_theta0_windings(id, winding(m), Symbol::constant(1), 256);
    CHECK(gb.w_plus == m);
    CHECK(gb.w_minus == 0);
    CHECK(gb.gap < 1e-9);
  }

  // Diffeomorphisms alone never wind.
  const CanonicalTransformation ct{CircleDiffeo::sine(0.5), CircleDiffeo::sine(-0.4, 1.0)};
  gb = compute_theta0_windings(ct, Symbol::constant(1), Symbol::constant(1), 256);
  CHECK(gb.w_plus == 0);
  CHECK(gb.w_minus == 0);
  CHECK(gb.derivative_plus == 0);
}

TEST_CASE("boundary limits come from the top lattice modes") {
  // b -> exp(ix) as xi -> +inf with a 1/xi tail.
  const Symbol b = parse_symbol("exp(i*x)*(1+2/(1+abs(xi)))");
  double corr = 0;
  const auto lim = boundary_limit(b, 1, 256, &corr);
  CHECK(std::abs(lim(0.3) - std::exp(cplx(0, 0.3))) < 1e-4);
  CHECK(corr > 0);
  const auto gb = compute_theta0_windings(CanonicalTransformation{}, b, Symbol::constant(1), 256);
  CHECK(gb.w_plus == 1);
}

TEST_CASE("windings are homotopy invariant") {
  const CanonicalTransformation ct{CircleDiffeo::sine(0.3), CircleDiffeo::identity()};
  for (double s : {0.0, 0.2, 0.4, 0.6}) {  // 1 + s (pi/2) cos x stays nonzero
    const Symbol b = parse_symbol("exp(2*i*x)*(1+" + std::to_string(s) + "*cos(x)*atan(xi))");
    const auto gb = compute_theta0_windings(ct, b, Symbol::constant(1), 256);
    CHECK(gb.w_plus == 2);
    CHECK(gb.gap < 1e-9);
  }
}

TEST_CASE("vanishing transition data is an ellipticity violation") {
  CHECK_THROWS_AS(compute_theta0_windings(CanonicalTransformation{}, parse_symbol("cos(x)"), Symbol::constant(1), 64),
                  GeometryError);
}

TEST_CASE("glued manifold model") {
  const auto m = GluedManifoldModel::from({CircleDiffeo::sine(0.4), CircleDiffeo::flow(CircleFunction::parse("0.2*cos(x)"))});
  CHECK(m.consistency_defect() < 1e-10);
  CHECK(m.frames.size() == 2);
}

TEST_CASE("characteristic evaluator on a surface") {
  const CharacteristicEvaluator ev;
  CHECK(ev.reduces_to_one_plus_theta());
  CHECK(ev.a_hat() == ClassPolynomial::constant(2, 1));
  CHECK(ev.integrand().coeff({1, 0, 0}) == 1.0);
  CharacteristicEvaluator four;
  four.dimension = 4;
  CHECK_FALSE(four.reduces_to_one_plus_theta());
  // e^theta A-hat in degree 4: theta^2/2 - p1/24.
  CHECK(four.integrand().coeff({2, 0, 0}) == 0.5);
  CHECK(std::abs(four.integrand().coeff({0, 1, 0}) + 1.0 / 24) < 1e-15);
}

TEST_CASE("index formula against the analytic index") {
  // One-time orientation calibration on m = 1.
  const CanonicalTransformation id;
  const auto F1 = build_clutched_fio(id, winding(1), Symbol::constant(1), 128);
  const int s = calibrate_orientation(analytic_index(F1).nearest_integer, compute_theta0_windings(F1));
  CHECK(s == kIndexOrientation);

  CHECK(evaluate_index_formula(GluedBundleModel{}) == 0);
  for (int m = -2; m <= 2; ++m) {
    const auto F = build_clutched_fio({CircleDiffeo::sine(0.3), CircleDiffeo::identity()}, winding(m),
                                      winding(1), 128);
    IndexReport r = analytic_index(F);
    r.attach_prediction(evaluate_index_formula(compute_theta0_windings(F)));
    CHECK(r.match);
    CHECK(r.nearest_integer == -m + 1);
  }
  // Extends over the zero section with equal amplitudes: index 0.
  const CanonicalTransformation same{CircleDiffeo::sine(0.3), CircleDiffeo::sine(0.3)};
  const auto F0 = build_clutched_fio(same, winding(1), winding(1), 128);
  CHECK(same.extends_to_zero_section());
  CHECK(evaluate_index_formula(compute_theta0_windings(F0)) == 0);
  CHECK(analytic_index(F0).nearest_integer == 0);
}

TEST_CASE("exterior algebra") {
  const auto a = ExteriorForm::basis2(4, 0, 1), b = ExteriorForm::basis2(4, 2, 3);
  CHECK((a ^ b)[0b1111] == 1);
  CHECK((b ^ a)[0b1111] == 1);  // even forms commute
  CHECK((a ^ a).max_abs() == 0);
  const auto e0 = ExteriorForm::basis2(4, 1, 0);
  CHECK(e0[0b11] == -1);
}

TEST_CASE("A-hat forms") {
  const int dim = 4;
  auto block = [dim](const ExteriorForm& f1, const ExteriorForm& f2) {
    CurvatureMatrix o(4, std::vector<ExteriorForm>(4, ExteriorForm(dim)));
    o[0][1] = f1;
    o[1][0] = -1.0 * f1;
    o[2][3] = f2;
    o[3][2] = -1.0 * f2;
    return o;
  };
  const ExteriorForm zero(dim);
  auto r = a_hat_series(block(zero, zero));
  CHECK((r.total - ExteriorForm::scalar(dim, 1)).max_abs() == 0);

  // Product connection on T*T^2: each factor's curvature lives in its own plane.
  const auto f1 = ExteriorForm::basis2(dim, 0, 1), f2 = ExteriorForm::basis2(dim, 2, 3);
  r = a_hat_series(block(0.7 * f1, -1.3 * f2));
  CHECK(r.p1.max_abs() < 1e-15);
  CHECK((r.total - ExteriorForm::scalar(dim, 1)).max_abs() < 1e-15);

  // A curvature with F ^ F != 0: tr O^2 = -4 F^F, F^F = 2 vol, so p1 = vol / pi^2.
  const auto F = f1 + f2;
  r = a_hat_series(block(F, F));
  CHECK(std::abs(r.p1[0b1111] - 1 / (kPi * kPi)) < 1e-15);
  CHECK(std::abs(r.total[0b1111] + 1 / (24 * kPi * kPi)) < 1e-15);

  // Surfaces carry no degree-4 forms.
  CurvatureMatrix s(2, std::vector<ExteriorForm>(2, ExteriorForm(2)));
  s[0][1] = 3.0 * ExteriorForm::basis2(2, 0, 1);
  s[1][0] = -1.0 * s[0][1];
  CHECK((a_hat_series(s).total - ExteriorForm::scalar(2, 1)).max_abs() == 0);

  CurvatureMatrix bad = block(f1, f2);
  bad[1][0] = f1;
  CHECK_THROWS_AS(a_hat_series(bad), GeometryError);
}

TEST_CASE("regularized integral") {
  const auto zero = ChartDensity::zero(64, 3, 201);
  CHECK(regularized_integral(zero, zero) == 0);

  auto g = [](double x, double xi) { return (1 + 0.5 * std::cos(x)) * bump(xi / 2); };
  const auto a = ChartDensity::sample(g, 64, 3, 301);
  CHECK(std::abs(regularized_integral(a, a)) < 1e-14);
  CHECK(chart_integral(a) > 0);

  // d(u dx + v dxi) with u = cos x b(xi/2), v = xi sin 2x b(xi/2).
  auto exact = [](double x, double xi) {
    const double dv_dx = 2 * std::cos(2 * x) * xi * bump(xi / 2);
    const double du_dxi = std::cos(x) * 0.5 * bump_derivative(xi / 2);
    return dv_dx - du_dxi;
  };
  const auto d = ChartDensity::sample(exact, 64, 2.5, 801);
  CHECK(std::abs(regularized_integral(d, zero)) < 1e-8);

  // Linearity.
  ChartDensity sum = a;
  sum.values = a.values + 2 * ChartDensity::sample(exact, 64, 3, 301).values;
  CHECK(std::abs(chart_integral(sum) - chart_integral(a)) < 1e-8);

  const auto slow = ChartDensity::sample([](double, double xi) { return 1 / (1 + xi * xi); }, 32, 3, 101);
  CHECK_THROWS_AS(chart_integral(slow), GeometryError);
}

TEST_CASE("half c1 on circle gluings") {
  const CharacteristicEvaluator ev;
  CHECK(half_c1_evaluator(GluedBundleModel{}, ev) == 0);
  const CanonicalTransformation ct{CircleDiffeo::sine(0.4), CircleDiffeo::sine(0.2, 0.5)};
  const auto gb = compute_theta0_windings(ct, Symbol::constant(1), Symbol::constant(1), 128);
  CHECK(half_c1_evaluator(gb, ev) == 0);
  // Toeplitz: the metalinear part of the theta windings agrees with the half c1 value.
  const auto t = compute_theta0_windings(CanonicalTransformation{}, winding(2), Symbol::constant(1), 128);
  CHECK(half_c1_evaluator(t, ev) == ev.orientation * (t.derivative_plus - t.derivative_minus));
  CHECK(half_c1_evaluator(t, ev) == 0);
  GluedBundleModel odd;
  odd.squared_plus = 1;
  CHECK_THROWS_AS(half_c1_evaluator(odd, ev), GeometryError);
}
