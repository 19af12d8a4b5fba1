#include <doctest.h>

#include "fioindex/expression.hpp"
#include "fioindex/fio.hpp"

#include <cmath>
#include <numbers>

using namespace fioindex;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

double max_entry(const OperatorMatrixd& a) { return a.entries().cwiseAbs().maxCoeff(); }

Symbol winding(int m) { return parse_symbol("exp(i*" + std::to_string(m) + "*x)"); }

// Compactly transitioned test symbols keep the conjugation away from the cutoff region.
const char* kSymbolA = "chi(4*xi)*(cos(x)+2+0.5*sin(2*x))*atan(xi)";
const char* kSymbolB = "chi(4*xi)*exp(i*x)/(1+0.1*xi^2)";

}  // namespace

TEST_CASE("circle diffeomorphisms invert and lift correctly") {
  const CircleDiffeo g = CircleDiffeo::sine(0.4, 0.3);
  for (double x : {-1.0, 0.2, 2.9, 6.0}) {
    CHECK(std::abs(g.inverse(g(x)) - x) < 1e-12);
    CHECK(std::abs(g(x + kTwoPi) - g(x) - kTwoPi) < 1e-12);
  }
  const CircleDiffeo f = CircleDiffeo::flow(CircleFunction::parse("0.3*sin(x)+0.1"));
  for (double x : {0.1, 1.5, 4.0}) {
    CHECK(std::abs(f.inverse(f(x)) - x) < 1e-10);
    const double fd = (f(x + 1e-5) - f(x - 1e-5)) / 2e-5;
    CHECK(std::abs(f.derivative(x) - fd) < 1e-8);
  }
  // Constant speed flows are rotations.
  const CircleDiffeo r = CircleDiffeo::flow(CircleFunction::constant(0.7));
  CHECK(std::abs(r(1.0) - 1.7) < 1e-12);
}

TEST_CASE("homogeneous lifts are symplectic") {
  CanonicalTransformation ct{CircleDiffeo::sine(0.3), CircleDiffeo::identity()};
  CHECK(ct.symplectic_defect() < 1e-10);
  CHECK_FALSE(ct.extends_to_zero_section());
  const auto [y, eta] = ct.apply(0.8, 2.0);
  const auto [x, xi] = ct.inverse(y, eta);
  CHECK(std::abs(x - 0.8) < 1e-12);
  CHECK(std::abs(xi - 2.0) < 1e-12);
  CanonicalTransformation same{CircleDiffeo::sine(0.2), CircleDiffeo::sine(0.2)};
  CHECK(same.extends_to_zero_section());
}

TEST_CASE("homogeneous Hamiltonians") {
  HomogeneousHamiltonian H{CircleFunction::parse("0.3*sin(x)"), CircleFunction::parse("0.2*cos(x)")};
  CHECK(H.homogeneity_defect() < 1e-12);
  const CanonicalTransformation ct = H.time_one_map();
  // x' = -h_plus on the positive side.
  const CircleDiffeo expected = CircleDiffeo::flow(CircleFunction::parse("-0.3*sin(x)"));
  CHECK(std::abs(ct.plus(1.0) - expected(1.0)) < 1e-12);
}

TEST_CASE("identity clutching gives the identity operator") {
  const auto F = build_clutched_fio(CanonicalTransformation{}, Symbol::constant(1), Symbol::constant(1), 64);
  CHECK(max_entry(F.matrix - OperatorMatrixd::Identity(64)) < 1e-12);
}

TEST_CASE("unitarize keeps the polar part above the threshold") {
  OperatorMatrixd a(4);
  for (int k = -4; k <= 4; ++k) a(k, k) = k == 2 ? 1e-3 : 2.0 + 0.1 * k;
  a(1, -1) = 0.3;
  const OperatorMatrixd u = unitarize(a, 0.1);
  CHECK(std::abs(u(2, 2)) < 1e-14);
  const OperatorMatrixd p = u.adjoint() * u;
  for (int k = -4; k <= 4; ++k) CHECK(std::abs(p(k, k) - (k == 2 ? 0.0 : 1.0)) < 1e-12);
}

TEST_CASE("clutched FIOs are unitary up to a smoothing block") {
  CanonicalTransformation ct{CircleDiffeo::sine(0.3), CircleDiffeo::identity()};
  const auto F = build_clutched_fio(ct, winding(1), Symbol::constant(1), 128);
  const DefectProfile p = defect_profile(F.matrix);
  CHECK(p.smoothing());
  CHECK(p.inside > 0.5);  // the kernel sits in the block
  const int k0 = smoothing_block(F.matrix);
  CHECK(k0 <= 32);
  CHECK(k0 > 0);
  CHECK_FALSE(defect_profile(F.matrix, k0 - 1).smoothing());
}

TEST_CASE("ODE route with zero Hamiltonian is the identity") {
  const auto T = build_ode_fio(HomogeneousHamiltonian{}, 64);
  CHECK(max_entry(T.matrix - OperatorMatrixd::Identity(64)) < 1e-14);
  CHECK(T.route == FioRoute::Ode);
}

TEST_CASE("ODE route is unitary and matches its time-one map") {
  HomogeneousHamiltonian H{CircleFunction::parse("0.3*sin(x)"), CircleFunction::constant(0)};
  const auto T = build_ode_fio(H, 256);
  CHECK(T.unitarity_defect < 1e-9);
  CHECK(defect_profile(T.matrix).smoothing());
  const auto F = build_clutched_fio(T.canonical, Symbol::constant(1), Symbol::constant(1), 256);
  const SymbolGrid g = egorov_grid(32);
  const Symbol a = parse_symbol(kSymbolA);
  const auto r1 = egorov_residual(T, a, 2, g);
  const auto r2 = egorov_residual(F, a, 2, g);
  CHECK(r1.slope >= 0.9);
  CHECK(r2.slope >= 0.9);
  CHECK(r1.leading_residual < 1e-6);
  CHECK((r1.series.series.coeff(0) - r2.series.series.coeff(0)).abs().maxCoeff() < 1e-6);
}

TEST_CASE("rotations conjugate without corrections") {
  CanonicalTransformation ct{CircleDiffeo::rotation(0.7), CircleDiffeo::rotation(0.7)};
  const auto F = build_clutched_fio(ct, Symbol::constant(1), Symbol::constant(1), 256);
  const SymbolGrid g = egorov_grid(32);
  const auto s = egorov_conjugate(F, parse_symbol(kSymbolA), 2, g);
  CHECK(s.series.coeff(1).abs().maxCoeff() < 1e-8);
  // The second coefficient sits at the ladder's noise floor.
  CHECK(s.series.coeff(2).abs().maxCoeff() < 1e-6);
  const GridFunction target = egorov_target(ct, parse_symbol(kSymbolA)).sample(g);
  CHECK((s.series.coeff(0) - target).abs().maxCoeff() < 1e-8);
}

TEST_CASE("Egorov residual decays linearly for a sine clutching") {
  CanonicalTransformation ct{CircleDiffeo::sine(0.3), CircleDiffeo::identity()};
  const auto F = build_clutched_fio(ct, winding(1), Symbol::constant(1), 256);
  const auto r = egorov_residual(F, parse_symbol(kSymbolA), 2, egorov_grid(32));
  CHECK(r.slope >= 0.9);
  CHECK(r.leading_residual < 1e-6);
}

TEST_CASE("conjugation is an algebra homomorphism") {
  CanonicalTransformation ct{CircleDiffeo::sine(0.3), CircleDiffeo::identity()};
  const auto F = build_clutched_fio(ct, Symbol::constant(1), Symbol::constant(1), 256);
  const auto h = egorov_homomorphism_check(F, parse_symbol(kSymbolA), parse_symbol(kSymbolB), 2, egorov_grid(32));
  CHECK(h.pass);
  for (double d : h.product_defect) CHECK(d <= 1e-5);
  CHECK(h.bracket_transport <= 1e-5);
}

TEST_CASE("conjugation refuses lattice points that spread past the mode cut") {
  CanonicalTransformation ct{CircleDiffeo::sine(0.9), CircleDiffeo::identity()};
  const auto F = build_clutched_fio(ct, Symbol::constant(1), Symbol::constant(1), 128);
  CHECK_THROWS_AS(egorov_conjugate(F, parse_symbol(kSymbolA), 1, egorov_grid(16)), ModeCutError);
}

TEST_CASE("conjugation refuses maps whose pullback tail crosses the mode cut") {
  HomogeneousHamiltonian H{CircleFunction::parse("0.2*cos(x)+0.1*sin(2*x)"), CircleFunction::constant(0)};
  const CanonicalTransformation ct = H.time_one_map();
  CHECK(pullback_tail(ct, 160, 256) > kPullbackTailTol);
  CHECK(pullback_tail(ct, 160, 320) < kPullbackTailTol);
  CHECK(pullback_tail(CanonicalTransformation{CircleDiffeo::rotation(0.7), CircleDiffeo::rotation(0.7)}, 160, 200) < 1e-12);
  const auto F = build_clutched_fio(ct, Symbol::constant(1), Symbol::constant(1), 256);
  CHECK_THROWS_AS(egorov_residual(F, parse_symbol(kSymbolA), 2, egorov_grid(16)), ModeCutError);
}
