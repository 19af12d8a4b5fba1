#include "fioindex/traces.hpp"

#include "fioindex/expression.hpp"
#include "fioindex/jet.hpp"
#include "fioindex/parallel.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <cstdio>

namespace fioindex {

namespace {

void check_same_cut(const TracePair& p, const TracePair& q) {
  if (p.A.mode_cut() != q.A.mode_cut()) throw std::invalid_argument("trace pairs with different mode cuts");
  if ((p.F.entries() - q.F.entries()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("trace pairs coupled through different FIOs");
}

OperatorMatrixd conjugated(const TracePair& p) { return p.F.adjoint() * p.B * p.F; }

}  // namespace

double TracePair::membership_defect(const TraceOptions& opt) const {
  const int W = opt.resolved_window(A.mode_cut());
  if (opt.k0 >= W) return 0;
  return band_max(A - conjugated(*this), opt.k0, W);
}

TracePair operator*(const TracePair& p, const TracePair& q) {
  check_same_cut(p, q);
  return {p.A * q.A, p.B * q.B, p.F};
}
TracePair operator+(const TracePair& p, const TracePair& q) {
  check_same_cut(p, q);
  return {p.A + q.A, p.B + q.B, p.F};
}
TracePair operator-(const TracePair& p, const TracePair& q) {
  check_same_cut(p, q);
  return {p.A - q.A, p.B - q.B, p.F};
}
TracePair operator*(cplx s, const TracePair& p) { return {s * p.A, s * p.B, p.F}; }

TracePair commutator(const TracePair& p, const TracePair& q) { return p * q - q * p; }

double pair_norm(const TracePair& p) { return std::hypot(p.A.entries().norm(), p.B.entries().norm()); }

cplx regularized_trace(const TracePair& p, const TraceOptions& opt) {
  const int K = p.A.mode_cut();
  const int W = opt.resolved_window(K);
  if (W > K) throw std::invalid_argument("trace window beyond mode cut");
  if (opt.check) {
    const double d = p.membership_defect(opt);
    if (d > opt.tol) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "A - F* B F is not smoothing: entry %.3e outside the %d-mode block", d, opt.k0);
      throw MembershipError(buf, d);
    }
  }
  const OperatorMatrixd ffstar = p.F * p.F.adjoint();
  const OperatorMatrixd defect = OperatorMatrixd::Identity(K) - ffstar;
  return windowed_trace(p.A - conjugated(p), W) - windowed_trace(p.B * defect, W);
}

OperatorMatrixd random_smoothing(int K, double norm, std::mt19937_64& rng, int block) {
  block = std::min(block, K);
  std::normal_distribution<double> nd;
  const int n = 2 * block + 1;
  Eigen::MatrixXcd s(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s(i, j) = cplx(nd(rng), nd(rng));
  const double sigma = Eigen::JacobiSVD<Eigen::MatrixXcd>(s).singularValues()(0);
  s *= norm / sigma;
  OperatorMatrixd out(K);
  out.entries().block(K - block, K - block, n, n) = s;
  return out;
}

TracePair random_trace_pair(const OperatorMatrixd& F, std::mt19937_64& rng, int bandwidth) {
  const int K = F.mode_cut();
  const Symbol b = parse_symbol(random_symbol_expression(rng, bandwidth, 3));
  TracePair p;
  p.B = quantize(b, K);
  p.F = F;
  p.A = conjugated(p) + random_smoothing(K, 1.0, rng);
  return p;
}

void IndexReport::attach_prediction(long prediction, double tol) {
  topological_prediction = prediction;
  match = integrality_gap <= tol && nearest_integer == prediction;
}

IndexReport analytic_index(const OperatorMatrixd& f, const TraceOptions& opt) {
  const int K = f.mode_cut();
  TraceOptions o = opt;
  o.check = false;  // (Id, Id) is always a pair
  const TracePair id{OperatorMatrixd::Identity(K), OperatorMatrixd::Identity(K), f};
  IndexReport r;
  r.window = o.resolved_window(K);
  r.tau_id = regularized_trace(id, o);
  r.nearest_integer = std::lround(r.tau_id.real());
  r.integrality_gap = std::abs(r.tau_id - cplx(static_cast<double>(r.nearest_integer), 0));
  r.route = "matrix";
  return r;
}

IndexReport analytic_index(const FourierIntegralOperator& f, const TraceOptions& opt) {
  IndexReport r = analytic_index(f.matrix, opt);
  r.route = route_name(f.route);
  return r;
}

CanonicalTraceResult tau_can(const std::function<TracePair(double)>& pair, int N, const CanonicalTraceOptions& opt) {
  if (N < 0) throw std::invalid_argument("negative truncation order");
  const auto& ladder = opt.hbar_ladder;
  std::vector<std::pair<double, cplx>> samples(ladder.size());
  CanonicalTraceResult out;
  out.membership.assign(ladder.size(), 0);
  parallel_for(static_cast<int>(ladder.size()), opt.jobs, [&](int i) {
    const double h = ladder[i];
    const TracePair p = pair(h);
    out.membership[i] = p.membership_defect(opt.trace);
    samples[i] = {h, h * regularized_trace(p, opt.trace)};
  });
  // hbar * tau is regular; shift the fitted powers down by one.
  const auto fit = extrapolate_series(samples, N, opt.fit);
  out.series = FormalSeries<cplx>(fit.series.coeffs(), -1, N - 1);
  out.residual = fit.residual;
  out.condition = fit.condition;
  return out;
}

CanonicalTraceResult tau_can(const OperatorMatrixd& F, const Symbol& a, const Symbol& b, int N,
                             const CanonicalTraceOptions& opt) {
  const int K = F.mode_cut();
  return tau_can(
      [&](double h) {
        return TracePair{quantize(scale_symbol(a, h), K), quantize(scale_symbol(b, h), K), F};
      },
      N, opt);
}

template <typename Scalar>
ResidueResult wodzicki_residue(const OperatorMatrix<Scalar>& p, const ResidueOptions& opt) {
  using Real = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using RealVec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const int K = p.mode_cut();
  const int lo = opt.first_mode < 0 ? K / 4 : opt.first_mode, hi = K - opt.guard;
  const int top = std::max(-1, static_cast<int>(std::floor(opt.order + 1e-9)));
  if (opt.lowest_power > -1) throw std::invalid_argument("residue fit must include the |k|^-1 power");
  const int nb = top - opt.lowest_power + 1;
  const int ns = hi - lo + 1;
  if (ns < 2 * nb) throw std::invalid_argument("too few modes for the residue fit");
  // Columns (k/K)^q keep the basis well scaled; coefficient of k^q is beta_q K^-q.
  Real V(ns, nb);
  for (int i = 0; i < ns; ++i)
    for (int c = 0; c < nb; ++c) V(i, c) = std::pow(static_cast<Scalar>(lo + i) / K, static_cast<Scalar>(top - c));
  const Eigen::ColPivHouseholderQR<Real> qr(V);
  const int idx = top + 1;  // column of q = -1

  ResidueResult r;
  double scale = 0;
  for (int sign : {1, -1}) {
    RealVec re(ns), im(ns);
    for (int i = 0; i < ns; ++i) {
      const auto d = p(sign * (lo + i), sign * (lo + i));
      re(i) = d.real();
      im(i) = d.imag();
      scale = std::max(scale, static_cast<double>(std::abs(d)));
    }
    const RealVec cr = qr.solve(re), ci = qr.solve(im);
    const double misfit = static_cast<double>(
        std::max((V * cr - re).cwiseAbs().maxCoeff(), (V * ci - im).cwiseAbs().maxCoeff()));
    r.fit_residual = std::max(r.fit_residual, misfit);
    (sign > 0 ? r.plus : r.minus) =
        cplx(static_cast<double>(cr(idx) * K), static_cast<double>(ci(idx) * K));
  }
  r.fit_residual /= std::max(1.0, scale);
  r.complex_value = r.plus + r.minus;
  r.value = r.complex_value.real();
  return r;
}

template ResidueResult wodzicki_residue<double>(const OperatorMatrix<double>&, const ResidueOptions&);
template ResidueResult wodzicki_residue<long double>(const OperatorMatrix<long double>&, const ResidueOptions&);

TraceSpaceReport trace_space_probe(const OperatorMatrixd& F, std::mt19937_64& rng, int pairs) {
  const int K = F.mode_cut();
  TraceSpaceReport rep;
  for (int i = 0; i < pairs; ++i) {
    const TracePair p = random_trace_pair(F, rng), q = random_trace_pair(F, rng);
    rep.tau_commutator = std::max(rep.tau_commutator, std::abs(regularized_trace(commutator(p, q))));
  }

  const Symbol a = parse_symbol("sqrt(1+xi^2)*(" + random_symbol_expression(rng, 1, 3) + ")", 1);
  const Symbol b = parse_symbol(random_symbol_expression(rng, 1, 3));
  const auto A = quantize<long double>(a, K), B = quantize<long double>(b, K);
  ResidueOptions ro;
  ro.order = 1;
  rep.residue_commutator = std::abs(wodzicki_residue(A * B - B * A, ro).complex_value);

  // Compactly supported symbol: canonical trace sees it, the residue does not.
  const Symbol compact = parse_symbol("(1-chi(0.5*xi))*(1+0.5*cos(x))");
  CanonicalTraceOptions co;
  co.trace.window = K - 16;
  co.trace.check = false;
  const OperatorMatrixd id = OperatorMatrixd::Identity(K);
  const auto tc = tau_can(id, compact, Symbol::constant(0), 2, co);
  rep.compact_tau = tc.series.coeff(-1);
  rep.compact_residue = std::abs(wodzicki_residue(quantize(compact, K)).complex_value);

  // Classical tail of order -1 paired with itself: the residue sees it, tau does not.
  const Symbol tail = parse_symbol("chi(xi)*(1+xi^2)^(-0.5)", -1);
  const OperatorMatrixd T = quantize(tail, K);
  rep.tail_tau = regularized_trace(TracePair{T, T, id});
  ro.order = 0;
  rep.tail_residue = wodzicki_residue(T, ro).value;
  rep.tau1_identity = std::abs(wodzicki_residue(id).complex_value);

  rep.traces_vanish_on_commutators = rep.tau_commutator <= 1e-6 && rep.residue_commutator <= 1e-6;
  rep.independent = std::abs(rep.compact_tau) > 1e-3 && rep.compact_residue <= 1e-6 &&
                    std::abs(rep.tail_tau) <= 1e-6 && std::abs(rep.tail_residue) > 1e-3 && rep.tau1_identity <= 1e-6;
  return rep;
}

}  // namespace fioindex
