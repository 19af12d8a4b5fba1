#include <doctest.h>

#include "fioindex/weyl.hpp"

#include <random>

using namespace fioindex::weyl;

namespace {

Monomial hat_mono(int xe, int xie, int hb = 0, int l = 0) {
  Monomial m;
  m.hat[x_var(l)] = static_cast<std::int8_t>(xe);
  m.hat[xi_var(l)] = static_cast<std::int8_t>(xie);
  m.hbar = hb;
  return m;
}

Monomial base_mono(std::array<int, 4> e, int hb = 0) {
  Monomial m;
  for (int v = 0; v < 4; ++v) m.base[v] = static_cast<std::int8_t>(e[v]);
  m.hbar = hb;
  return m;
}

/// Exponents ordered x1, x2, xi1, xi2.
PolynomialHamiltonian ham(int dim, std::vector<std::pair<std::array<int, 4>, Gaussian>> terms) {
  WeylElement p(dim, PolynomialHamiltonian::kCap);
  for (auto& [e, c] : terms) p.add_term(base_mono(e), c);
  return PolynomialHamiltonian(p);
}

const Gaussian I = Gaussian::i();

}  // namespace

TEST_CASE("exact rationals") {
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
  CHECK(Rational(-3, -9) == Rational(1, 3));
  CHECK((Gaussian::i() * Gaussian::i()) == Gaussian(-1));
  CHECK_THROWS(Rational(1, 0));
  CHECK_THROWS(Rational(INT64_MAX / 2) * Rational(4));
}

TEST_CASE("defining relations of the generators") {
  for (int n = 1; n <= 2; ++n) {
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) {
        const auto c = commutator(WeylElement::xihat(n, k), WeylElement::xhat(n, l));
        const auto expected = k == l ? I * WeylElement::hbar(n) : WeylElement(n);
        CHECK(c == expected);
        CHECK(commutator(WeylElement::xhat(n, k), WeylElement::xhat(n, l)).is_zero());
        CHECK(commutator(WeylElement::xihat(n, k), WeylElement::xihat(n, l)).is_zero());
      }
    }
  }
}

TEST_CASE("products of symmetrized monomials match the differential-operator realization") {
  // Reference values obtained by realizing xhat = x, xihat = i hbar d/dx on
  // test functions, symmetrizing the words and re-expanding.
  auto a = WeylElement::monomial(1, hat_mono(1, 2), 1);
  auto b = WeylElement::monomial(1, hat_mono(2, 1), 1);
  WeylElement ref(1);
  ref.add_term(hat_mono(3, 3), 1);
  ref.add_term(hat_mono(2, 2, 1), Gaussian(0, Rational(3, 2)));
  ref.add_term(hat_mono(1, 1, 2), Gaussian(Rational(1, 2)));
  ref.add_term(hat_mono(0, 0, 3), Gaussian(0, Rational(1, 4)));
  CHECK(weyl_mul(a, b) == ref);

  WeylElement ref2(1);
  ref2.add_term(hat_mono(2, 2), 1);
  ref2.add_term(hat_mono(1, 1, 1), Gaussian(0, 2));
  ref2.add_term(hat_mono(0, 0, 2), Gaussian(Rational(-1, 2)));
  CHECK(weyl_mul(WeylElement::monomial(1, hat_mono(0, 2), 1), WeylElement::monomial(1, hat_mono(2, 0), 1)) == ref2);
}

TEST_CASE("unit and associativity instance") {
  auto a = WeylElement::monomial(1, hat_mono(2, 1, 1), Gaussian(3, -1));
  CHECK(weyl_mul(a, WeylElement::constant(1, 1)) == a);
  auto x = WeylElement::xhat(1, 0), xi = WeylElement::xihat(1, 0);
  CHECK(weyl_mul(x, weyl_mul(x, xi)) == weyl_mul(weyl_mul(x, x), xi));
}

TEST_CASE("associativity on random elements below the cap") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 2;
    auto a = random_test_element(rng, n, 3), b = random_test_element(rng, n, 3), c = random_test_element(rng, n, 2);
    CHECK(weyl_mul(weyl_mul(a, b), c) == weyl_mul(a, weyl_mul(b, c)));
  }
}

TEST_CASE("degree cap drops high terms") {
  auto x = WeylElement::xhat(1, 0, 2);
  auto x3 = weyl_mul(weyl_mul(x, x), x);
  CHECK(x3.is_zero());
  CHECK(WeylElement::monomial(1, hat_mono(0, 0, 5), 1).is_zero());
}

TEST_CASE("Taylor lift decomposition") {
  auto h = ham(1, {{{1, 0, 0, 0}, 1}});  // x1
  auto d = build_H_decomposition(h);
  CHECK(d.h0 == WeylElement::base_x(1, 0));
  CHECK(d.h1 == WeylElement::xhat(1, 0));
  CHECK(d.htilde == WeylElement::base_x(1, 0) + WeylElement::xhat(1, 0));

  auto c = ham(1, {{{0, 0, 0, 0}, 7}});
  auto dc = build_H_decomposition(c);
  CHECK(dc.h1.is_zero());
  CHECK(dc.htilde == WeylElement::constant(1, 7));

  auto xxi = ham(1, {{{1, 0, 1, 0}, 1}});
  auto dx = build_H_decomposition(xxi);
  WeylElement expected(1);
  expected.add_term(base_mono({1, 0, 1, 0}), 1);
  Monomial m1;
  m1.base[xi_var(0)] = 1;
  m1.hat[x_var(0)] = 1;
  expected.add_term(m1, 1);
  Monomial m2;
  m2.base[x_var(0)] = 1;
  m2.hat[xi_var(0)] = 1;
  expected.add_term(m2, 1);
  expected.add_term(hat_mono(1, 1), 1);
  CHECK(dx.htilde == expected);
}

TEST_CASE("lift evaluated at zero hats returns the Hamiltonian") {
  std::mt19937 rng(5);
  for (int t = 0; t < 10; ++t) {
    auto h = random_hamiltonian(rng, 1 + t % 2, 4);
    auto d = build_H_decomposition(h);
    CHECK(d.htilde.at_zero_hats() == h.poly().with_cap(kDefaultDegreeCap));
    auto tail = d.htilde - d.h0 - d.h1;
    // Constant and linear hat parts cancel except for hbar-dependent terms of H.
    for (const auto& [m, c] : tail.terms()) CHECK((m.hat_degree() >= 2 || m.hbar > 0));
  }
}

TEST_CASE("lifted derivation of a constant vanishes") {
  auto c = ham(2, {{{0, 0, 0, 0}, 3}});
  for (auto v : {LiftVariant::D, LiftVariant::D0}) {
    LiftedDerivation d(c, v);
    CHECK(d.weyl_part().is_zero());
    std::mt19937 rng(1);
    CHECK(d.apply(random_test_element(rng, 2, 4)).is_zero());
  }
}

TEST_CASE("lift of x1 acts as -d/dxi1 on base polynomials") {
  auto d = lift_D(ham(1, {{{1, 0, 0, 0}, 1}}));
  WeylElement w(1);
  w.add_term(base_mono({2, 0, 3, 0}), 1);  // x^2 xi^3
  WeylElement expected(1);
  expected.add_term(base_mono({2, 0, 2, 0}), -3);
  CHECK(d.apply(w) == expected);
}

TEST_CASE("bracket of the lifts of x^2 and xi^2") {
  auto h = ham(1, {{{2, 0, 0, 0}, 1}});
  auto k = ham(1, {{{0, 0, 2, 0}, 1}});
  auto l = star_bracket(h, k);
  // (1/(i hbar))(x^2 * xi^2 - xi^2 * x^2) = {x^2, xi^2} = -4 x xi
  WeylElement ref(1, PolynomialHamiltonian::kCap);
  ref.add_term(base_mono({1, 0, 1, 0}), -4);
  CHECK(l.poly() == ref);
  std::mt19937 rng(3);
  auto rep = bracket_identity_check(h, k, random_test_element(rng, 1, 4));
  CHECK(rep.derivation_pass);
  CHECK(rep.vector_parts_agree);
}

TEST_CASE("Fedosov commutators for fixed sample Hamiltonians") {
  std::mt19937 rng(9);
  auto w = random_test_element(rng, 1, 4);
  auto xxi = ham(1, {{{1, 0, 1, 0}, 1}});
  auto r = fedosov_connection_check(xxi, w);
  CHECK(r.d0.pass);
  CHECK(r.d.pass);

  auto c = ham(1, {{{0, 0, 0, 0}, 2}});
  CHECK(fedosov_connection_check(c, w).pass);

  // H = x^2 xi: the D commutator is -1/2 d(2x) = -dx, nonzero.
  auto h = ham(1, {{{2, 0, 1, 0}, 1}});
  auto rh = fedosov_connection_check(h, w);
  CHECK(rh.pass);
  LiftedDerivation d(h, LiftVariant::D);
  CHECK_FALSE(mixed_laplacian(d.vector_part()).is_zero());
}

TEST_CASE("random Fedosov and bracket identities") {
  std::mt19937 rng(2024);
  for (int t = 0; t < 20; ++t) {
    const int n = 1 + t % 2;
    auto h = random_hamiltonian(rng, n, 4);
    auto k = random_hamiltonian(rng, n, 4);
    auto w = random_test_element(rng, n, 4);
    CHECK(fedosov_connection_check(h, w).pass);
    auto b = bracket_identity_check(h, k, w);
    CHECK(b.derivation_pass);
    CHECK(b.vector_parts_agree);
    CHECK(b.defect_central);
  }
}

TEST_CASE("lift-level bracket identity holds for momentum-linear Hamiltonians") {
  std::mt19937 rng(77);
  for (int t = 0; t < 10; ++t) {
    const int n = 1 + t % 2;
    auto h = random_hamiltonian(rng, n, 3, true);
    auto k = random_hamiltonian(rng, n, 3, true);
    REQUIRE(h.is_linear_in_momenta());
    auto b = bracket_identity_check(h, k, random_test_element(rng, n, 4));
    CHECK(b.lift_level_pass);
  }
}

TEST_CASE("lift-level bracket identity has a central defect for quadratic momenta") {
  auto h = ham(1, {{{0, 0, 2, 0}, 1}});  // xi^2
  auto k = ham(1, {{{2, 0, 0, 0}, 1}});  // x^2
  std::mt19937 rng(4);
  auto b = bracket_identity_check(h, k, random_test_element(rng, 1, 4));
  CHECK(b.derivation_pass);
  CHECK(b.defect_central);
  // Hat parts cancel; what is left is -1/2 of the mixed Laplacian of {H, K} = 4 x xi.
  CHECK(b.weyl_defect == WeylElement::constant(1, -2));
}
