#include <doctest.h>

#include "fioindex/expression.hpp"
#include "fioindex/traces.hpp"

#include <cmath>
#include <numbers>

using namespace fioindex;

namespace {

Symbol winding(int m) { return parse_symbol("exp(i*" + std::to_string(m) + "*x)"); }

FourierIntegralOperator toeplitz(int m_plus, int m_minus, double eps, int K) {
  CanonicalTransformation ct{CircleDiffeo::sine(eps), CircleDiffeo::identity()};
  return build_clutched_fio(ct, winding(m_plus), winding(m_minus), K);
}

}  // namespace

TEST_CASE("index of Toeplitz-type clutchings") {
  struct Case {
    int m_plus, m_minus;
    double eps;
    long expected;
  };
  // Ind = -m_plus + m_minus.
  for (const Case c : {Case{0, 0, 0.0, 0}, Case{1, 0, 0.0, -1}, Case{2, 0, 0.3, -2}, Case{0, 1, 0.3, 1},
                       Case{-1, 1, 0.0, 2}}) {
    const IndexReport r = analytic_index(toeplitz(c.m_plus, c.m_minus, c.eps, 128));
    CHECK(r.integrality_gap < 1e-6);
    CHECK(r.nearest_integer == c.expected);
    CHECK(r.route == "clutched");
  }
}

TEST_CASE("index report matching") {
  IndexReport r = analytic_index(toeplitz(1, 0, 0, 64));
  r.attach_prediction(-1);
  CHECK(r.match);
  r.attach_prediction(1);
  CHECK_FALSE(r.match);
}

TEST_CASE("regularized trace vanishes on commutators") {
  std::mt19937_64 rng(11);
  const auto F = toeplitz(1, 0, 0.3, 128);
  for (int i = 0; i < 3; ++i) {
    const TracePair p = random_trace_pair(F.matrix, rng), q = random_trace_pair(F.matrix, rng);
    CHECK(p.membership_defect() < 1e-6);
    CHECK(std::abs(regularized_trace(commutator(p, q))) < 1e-6);
  }
}

TEST_CASE("non-members are rejected") {
  const int K = 128;
  const auto F = toeplitz(0, 0, 0, K);
  const OperatorMatrixd A = quantize(parse_symbol("atan(xi)"), K);
  const TracePair bad{A, OperatorMatrixd::Identity(K), F.matrix};
  CHECK_THROWS_AS(regularized_trace(bad), MembershipError);
}

TEST_CASE("smoothing perturbations have the requested norm and support") {
  std::mt19937_64 rng(3);
  const OperatorMatrixd s = random_smoothing(32, 0.4, rng, 5);
  CHECK(std::abs(Eigen::JacobiSVD<Eigen::MatrixXcd>(s.entries()).singularValues()(0) - 0.4) < 1e-12);
  CHECK(band_max(s, 5, 32) == 0);
}

TEST_CASE("Wodzicki residue") {
  const int K = 256;
  ResidueOptions o;
  o.order = -1;
  const auto r = wodzicki_residue(quantize(parse_symbol("(1+xi^2)^(-0.5)", -1), K), o);
  CHECK(std::abs(r.value - 2) < 1e-8);
  CHECK(std::abs(r.plus - 1.0) < 1e-8);
  // Smoothing and order -2 operators carry no residue.
  o.order = 0;
  CHECK(std::abs(wodzicki_residue(quantize(parse_symbol("(1-chi(0.5*xi))*cos(x)"), K), o).complex_value) < 1e-8);
  o.order = -2;
  CHECK(std::abs(wodzicki_residue(quantize(parse_symbol("(2+sin(x))/(1+xi^2)", -2), K), o).complex_value) < 1e-6);
  // x-dependence averages out: the residue integrates the |k|^-1 part over x.
  o.order = -1;
  const auto w = wodzicki_residue(quantize(parse_symbol("(3+cos(x))*chi(xi)*(1+xi^2)^(-0.5)", -1), K), o);
  CHECK(std::abs(w.value - 6) < 1e-7);
}

TEST_CASE("residue scales like 1/hbar under semiclassical scaling") {
  const int K = 256;
  const Symbol a = parse_symbol("(2+cos(x))*(1+xi^2)^(-0.5)", -1);
  ResidueOptions o;
  o.order = -1;
  const double base = wodzicki_residue(quantize(a, K), o).value;
  for (double h : {0.5, 0.25}) {
    const double v = wodzicki_residue(quantize(scale_symbol(a, h), K), o).value;
    CHECK(std::abs(h * v - base) < 1e-6);
  }
}

TEST_CASE("canonical trace leading term") {
  const int K = 256;
  CanonicalTraceOptions co;
  co.trace.window = K - 16;
  co.trace.check = false;
  const Symbol a = parse_symbol("(1-chi(0.5*xi))*(1+0.5*cos(x))");
  const auto t = tau_can(OperatorMatrixd::Identity(K), a, Symbol::constant(0), 2, co);
  // c int a dx dxi with c = 1/(2 pi) reduces to int (1 - chi(xi/2)) dxi.
  double integral = 0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const double xi = -2 + 4 * (i + 0.5) / n;
    integral += (1 - cutoff(0.5 * xi)) * 4.0 / n;
  }
  CHECK(std::abs(t.series.coeff(-1) - integral) < 1e-6);
  CHECK(std::abs(kCanonicalTraceConstant - 1 / (2 * std::numbers::pi)) < 1e-16);
}

TEST_CASE("trace space probe") {
  std::mt19937_64 rng(5);
  const auto F = toeplitz(1, 0, 0.3, 256);
  const TraceSpaceReport r = trace_space_probe(F.matrix, rng, 2);
  CHECK(r.tau_commutator < 1e-6);
  CHECK(r.residue_commutator < 1e-6);
  CHECK(r.traces_vanish_on_commutators);
  CHECK(r.independent);
  CHECK(std::abs(r.tail_residue - 2) < 1e-6);
}
