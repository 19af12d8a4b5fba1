#include "fioindex/fio.hpp"

#include "fioindex/expression.hpp"
#include "fioindex/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>

namespace fioindex {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// One RK4 step for x' = v(x) together with the variational equation d' = v'(x) d.
void rk4_step(const CircleFunction& v, double dt, double& x, double& d) {
  const double k1 = v.f(x), m1 = v.df(x) * d;
  const double x2 = x + 0.5 * dt * k1, d2 = d + 0.5 * dt * m1;
  const double k2 = v.f(x2), m2 = v.df(x2) * d2;
  const double x3 = x + 0.5 * dt * k2, d3 = d + 0.5 * dt * m2;
  const double k3 = v.f(x3), m3 = v.df(x3) * d3;
  const double x4 = x + dt * k3, d4 = d + dt * m3;
  const double k4 = v.f(x4), m4 = v.df(x4) * d4;
  x += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  d += dt / 6 * (m1 + 2 * m2 + 2 * m3 + m4);
}

std::pair<double, double> integrate_flow(const CircleFunction& v, double t, int steps, double x) {
  double d = 1;
  const double dt = t / steps;
  for (int s = 0; s < steps; ++s) rk4_step(v, dt, x, d);
  return {x, d};
}

double max_entry(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

CircleFunction CircleFunction::constant(double c) {
  return {[c](double) { return c; }, [](double) { return 0.0; }, std::to_string(c)};
}

CircleFunction CircleFunction::parse(const std::string& text) {
  const Symbol s = parse_symbol(text);
  return {[s](double x) { return s(x, 0).real(); }, [s](double x) { return s.derivative(1, 0, x, 0).real(); }, text};
}

double CircleDiffeo::inverse(double y) const {
  if (inverse_map) return inverse_map(y);
  // g(x) - x is 2 pi periodic and g is increasing, so the root lies in [y - 2 pi, y + 2 pi].
  double lo = y - kTwoPi, hi = y + kTwoPi, x = y;
  for (int it = 0; it < 200; ++it) {
    const double r = map(x) - y;
    if (std::abs(r) < 1e-15 * (1 + std::abs(y))) break;
    if (r > 0) hi = x;
    else lo = x;
    const double step = r / derivative(x);
    double nx = x - step;
    if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
    if (nx == x) break;
    x = nx;
  }
  return x;
}

CircleDiffeo CircleDiffeo::identity() {
  return {[](double x) { return x; }, [](double) { return 1.0; }, [](double y) { return y; }, "id"};
}

CircleDiffeo CircleDiffeo::sine(double eps, double phase) {
  if (!(std::abs(eps) < 1)) throw FioError("x + eps sin(x + phase) needs |eps| < 1");
  CircleDiffeo g{[eps, phase](double x) { return x + eps * std::sin(x + phase); },
                 [eps, phase](double x) { return 1 + eps * std::cos(x + phase); }, {}, {}};
  g.name = "x+" + std::to_string(eps) + "*sin(x+" + std::to_string(phase) + ")";
  return g;
}

CircleDiffeo CircleDiffeo::rotation(double c) {
  return {[c](double x) { return x + c; }, [](double) { return 1.0; }, [c](double y) { return y - c; },
          "x+" + std::to_string(c)};
}

CircleDiffeo CircleDiffeo::flow(const CircleFunction& v, double t, int steps) {
  CircleDiffeo g;
  g.map = [v, t, steps](double x) { return integrate_flow(v, t, steps, x).first; };
  g.derivative = [v, t, steps](double x) { return integrate_flow(v, t, steps, x).second; };
  g.inverse_map = [v, t, steps](double y) { return integrate_flow(v, -t, steps, y).first; };
  g.name = "flow(" + v.name + ")";
  return g;
}

std::pair<double, double> CanonicalTransformation::apply(double x, double xi) const {
  const CircleDiffeo& g = xi >= 0 ? plus : minus;
  return {g(x), xi / g.derivative(x)};
}

std::pair<double, double> CanonicalTransformation::inverse(double y, double eta) const {
  const CircleDiffeo& g = eta >= 0 ? plus : minus;
  const double x = g.inverse(y);
  return {x, eta * g.derivative(x)};
}

bool CanonicalTransformation::extends_to_zero_section(int n, double tol) const {
  for (int i = 0; i < n; ++i) {
    const double x = kTwoPi * i / n;
    if (std::abs(plus(x) - minus(x)) > tol) return false;
  }
  return true;
}

double CanonicalTransformation::symplectic_defect(int n) const {
  const double h = 1e-5;
  double worst = 0;
  for (int i = 0; i < n; ++i)
    for (double xi : {-3.0, -1.0, 1.0, 3.0}) {
      const double x = kTwoPi * i / n;
      const auto px = apply(x + h, xi), mx = apply(x - h, xi);
      const auto pxi = apply(x, xi + h), mxi = apply(x, xi - h);
      const double a = (px.first - mx.first) / (2 * h), b = (pxi.first - mxi.first) / (2 * h);
      const double c = (px.second - mx.second) / (2 * h), d = (pxi.second - mxi.second) / (2 * h);
      worst = std::max(worst, std::abs(a * d - b * c - 1));
    }
  return worst;
}

Symbol HomogeneousHamiltonian::symbol() const {
  const CircleFunction hp = h_plus, hm = h_minus;
  return Symbol([hp, hm](double x, double xi) -> cplx { return (xi >= 0 ? hp(x) : hm(x)) * std::abs(xi) * cutoff(xi); },
                1, {}, "H");
}

double HomogeneousHamiltonian::homogeneity_defect() const {
  const Symbol H = symbol();
  double worst = 0;
  for (int i = 0; i < 32; ++i)
    for (double xi : {-4.0, -1.5, -1.0, 1.0, 1.5, 4.0})
      for (double l : {2.0, 3.5}) {
        const double x = kTwoPi * i / 32;
        worst = std::max(worst, std::abs(H(x, l * xi) - l * H(x, xi)));
      }
  return worst;
}

CanonicalTransformation HomogeneousHamiltonian::time_one_map(int steps) const {
  const CircleFunction hp = h_plus;
  const CircleFunction neg{[hp](double x) { return -hp(x); }, [hp](double x) { return -hp.df(x); }, "-" + hp.name};
  return {CircleDiffeo::flow(neg, 1, steps), CircleDiffeo::flow(h_minus, 1, steps)};
}

std::string route_name(FioRoute r) { return r == FioRoute::Clutched ? "clutched" : "ode"; }

double ellipticity_margin(const Symbol& b, int nx) {
  double m = INFINITY;
  for (int i = 0; i < nx; ++i)
    for (double xi : {-1e6, -64.0, -8.0, -2.0, -1.0, 1.0, 2.0, 8.0, 64.0, 1e6}) m = std::min(m, std::abs(b(kTwoPi * i / nx, xi)));
  return m;
}

OperatorMatrixd pullback_matrix(const CircleDiffeo& g, int K, int fft_size) {
  const int M = fft_size > 0 ? fft_size : next_pow2(8 * K);
  std::vector<double> y(M), w(M);
  for (int m = 0; m < M; ++m) {
    y[m] = g.inverse(kTwoPi * m / M);
    w[m] = std::sqrt(1 / g.derivative(y[m]));
  }
  Eigen::FFT<double> fft;
  std::vector<cplx> buf(M), hat;
  OperatorMatrixd u(K);
  for (int k = -K; k <= K; ++k) {
    for (int m = 0; m < M; ++m) buf[m] = std::polar(w[m], k * y[m]);
    fft.fwd(hat, buf);
    for (int j = -K; j <= K; ++j) u(j, k) = hat[((j % M) + M) % M] / double(M);
  }
  return u;
}

OperatorMatrixd unitarize(const OperatorMatrixd& a, double threshold) {
  const Eigen::MatrixXcd gram = a.entries().adjoint() * a.entries();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
  const Eigen::VectorXd lam = es.eigenvalues();
  Eigen::VectorXd scale(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    scale(i) = lam(i) > threshold * threshold ? 1 / std::sqrt(lam(i)) : 0.0;
  const Eigen::MatrixXcd& V = es.eigenvectors();
  return OperatorMatrixd(a.mode_cut(), a.entries() * (V * scale.asDiagonal() * V.adjoint()));
}

FourierIntegralOperator build_clutched_fio(const CanonicalTransformation& ct, const Symbol& b_plus,
                                           const Symbol& b_minus, int K) {
  const double margin = std::min(ellipticity_margin(b_plus), ellipticity_margin(b_minus));
  if (!(margin > 1e-6)) throw FioError("amplitude is not elliptic (min |b| = " + std::to_string(margin) + ")");
  const OperatorMatrixd pp = mode_projector(K, 1), pm = mode_projector(K, -1), p0 = mode_projector(K, 0);
  const OperatorMatrixd up = pullback_matrix(ct.plus, K), um = pullback_matrix(ct.minus, K);
  const OperatorMatrixd raw = pp * up * quantize(b_plus, K) * pp + pm * um * quantize(b_minus, K) * pm + p0;

  FourierIntegralOperator f;
  f.canonical = ct;
  f.b_plus = b_plus;
  f.b_minus = b_minus;
  f.route = FioRoute::Clutched;
  f.unitarization_threshold = 0.5 * std::min(1.0, margin);
  f.matrix = unitarize(raw, f.unitarization_threshold);
  return f;
}

FourierIntegralOperator build_ode_fio(const HomogeneousHamiltonian& H, int K, const OdeOptions& opt) {
  const Symbol iH = cplx(0, 1) * H.symbol();
  const Eigen::MatrixXcd q = quantize(iH, K).entries();
  const Eigen::MatrixXcd G = 0.5 * (q - q.adjoint());
  const int n = 2 * K + 1;
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
  // Row-sum bound on the spectral radius of G.
  const double norm = G.cwiseAbs().rowwise().sum().maxCoeff();

  // Per-step modulus defect of the RK4 polynomial on i lambda is x^6 / 72; pick
  // the smallest power of two meeting the tolerance, then verify.
  int s = opt.min_log2_steps;
  while (s < opt.max_log2_steps &&
         std::ldexp(1.0, s) * std::pow(norm / std::ldexp(1.0, s), 6) / 72 > 0.1 * opt.unitarity_tol)
    ++s;
  for (; s <= opt.max_log2_steps; ++s) {
    const Eigen::MatrixXcd A = G / std::ldexp(1.0, s);
    const Eigen::MatrixXcd A2 = A * A;
    Eigen::MatrixXcd T = I + A + A2 / 2.0 + (A2 * A) / 6.0 + (A2 * A2) / 24.0;
    for (int k = 0; k < s; ++k) T = T * T;
    const double defect = max_entry(T.adjoint() * T - I);
    if (defect <= opt.unitarity_tol) {
      FourierIntegralOperator f;
      f.matrix = OperatorMatrixd(K, T);
      f.canonical = H.time_one_map(opt.flow_steps);
      f.route = FioRoute::Ode;
      f.ode_steps = 1 << s;
      f.unitarity_defect = defect;
      return f;
    }
  }
  throw FioError("RK4 propagator did not reach the unitarity tolerance");
}

DefectProfile defect_profile(const OperatorMatrixd& f, int k0, int window) {
  const int K = f.mode_cut();
  DefectProfile p;
  p.k0 = k0;
  p.window = window < 0 ? K / 2 : window;
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(f.dim(), f.dim());
  for (const Eigen::MatrixXcd& d : {Eigen::MatrixXcd(I - f.entries().adjoint() * f.entries()),
                                    Eigen::MatrixXcd(I - f.entries() * f.entries().adjoint())}) {
    for (int j = -p.window; j <= p.window; ++j)
      for (int k = -p.window; k <= p.window; ++k) {
        const double v = std::abs(d(j + K, k + K));
        if (std::max(std::abs(j), std::abs(k)) > k0) p.outside = std::max(p.outside, v);
        else p.inside = std::max(p.inside, v);
      }
  }
  return p;
}

int smoothing_block(const OperatorMatrixd& f, double tol, int window) {
  const int K = f.mode_cut();
  const int W = window < 0 ? K / 2 : window;
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(f.dim(), f.dim());
  const Eigen::MatrixXcd d1 = I - f.entries().adjoint() * f.entries(), d2 = I - f.entries() * f.entries().adjoint();
  // reach[r]: largest defect entry with max(|j|, |k|) == r.
  std::vector<double> reach(W + 1, 0.0);
  for (int j = -W; j <= W; ++j)
    for (int k = -W; k <= W; ++k) {
      const int r = std::max(std::abs(j), std::abs(k));
      reach[r] = std::max({reach[r], std::abs(d1(j + K, k + K)), std::abs(d2(j + K, k + K))});
    }
  int k0 = W;
  while (k0 > 0 && reach[k0] <= tol) --k0;
  return k0;
}

SymbolGrid egorov_grid(int nx) { return SymbolGrid::uniform(nx, {-2.5, -2.25, -2.0, 2.0, 2.25, 2.5}); }

double mode_spread(const CanonicalTransformation& ct, int n) {
  double s = 1;
  for (const CircleDiffeo* g : {&ct.plus, &ct.minus})
    for (int i = 0; i < n; ++i) {
      const double d = g->derivative(kTwoPi * i / n);
      s = std::max({s, d, 1 / d});
    }
  return s;
}

double pullback_tail(const CanonicalTransformation& ct, int k, int K) {
  const int M = next_pow2(4 * std::max(K, std::abs(k)));
  Eigen::FFT<double> fft;
  std::vector<cplx> buf(M), hat;
  auto tail = [&](auto&& phase_and_weight) {
    for (int m = 0; m < M; ++m) {
      const auto [phase, weight] = phase_and_weight(kTwoPi * m / M);
      buf[m] = std::polar(weight, k * phase);
    }
    fft.fwd(hat, buf);
    double total = 0, out = 0;
    for (int j = 0; j < M; ++j) {
      const int mode = j < M / 2 ? j : j - M;
      total += std::norm(hat[j]);
      if (std::abs(mode) > K) out += std::norm(hat[j]);
    }
    return std::sqrt(out / total);
  };
  double worst = 0;
  for (const CircleDiffeo* g : {&ct.plus, &ct.minus})
    worst = std::max(worst, tail([g](double x) { return std::pair{(*g)(x), std::sqrt(g->derivative(x))}; }));
  return worst;
}

Symbol egorov_target(const CanonicalTransformation& ct, const Symbol& a) {
  return compose_symbol(a, [ct](double y, double eta) { return ct.inverse(y, eta); });
}

namespace {

/// Full symbol on the grid of product columns: column c is lattice mode ks[c].
GridFunction columns_to_grid(const Eigen::MatrixXcd& cols, int K, const std::vector<int>& ks, const SymbolGrid& g) {
  GridFunction out(g.x.size(), g.xi.size());
  for (std::size_t c = 0; c < ks.size(); ++c) {
    const Eigen::VectorXcd col = cols.col(static_cast<Eigen::Index>(c));
    out.col(static_cast<Eigen::Index>(c)) = full_symbol_column(col, K, ks[c], g.x);
  }
  return out;
}

/// Lattice columns for a conjugation by f: mode k is spread over k / g' by the
/// pullbacks, so the whole spread must stay clear of the mode cut.
std::vector<int> conjugation_columns(const FourierIntegralOperator& f, const SymbolGrid& g, double h,
                                     const StarOptions& opt) {
  const int K = f.mode_cut();
  const std::vector<int> ks = lattice_columns(g, h, K, opt.edge_guard);
  const double spread = mode_spread(f.canonical);
  for (int k : ks)
    if (std::abs(k) * spread + opt.edge_guard > K)
      throw ModeCutError("conjugated lattice mode " + std::to_string(k) + " spreads beyond the mode cut; increase K");
  return ks;
}

/// The polar factor of a clutched FIO couples columns whose pullback image is
/// cut off at K, so the truncated tail of the outermost lattice mode bounds
/// the conjugation error.
void check_pullback_tail(const FourierIntegralOperator& f, const SymbolGrid& g, const StarOptions& opt) {
  const double h = *std::min_element(opt.hbar_ladder.begin(), opt.hbar_ladder.end());
  int kmax = 0;
  for (int k : lattice_columns(g, h, f.mode_cut(), opt.edge_guard)) kmax = std::max(kmax, std::abs(k));
  const double t = pullback_tail(f.canonical, kmax, f.mode_cut());
  if (t > kPullbackTailTol)
    throw ModeCutError("pullback of lattice mode " + std::to_string(kmax) + " leaves " + std::to_string(t) +
                       " of its mass beyond the mode cut; increase K");
}

Eigen::MatrixXcd adjoint_columns(const Eigen::MatrixXcd& f, int K, const std::vector<int>& ks) {
  Eigen::MatrixXcd out(f.rows(), static_cast<Eigen::Index>(ks.size()));
  for (std::size_t c = 0; c < ks.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = f.row(ks[c] + K).adjoint();
  return out;
}

template <typename Sampler>
std::vector<std::pair<double, std::vector<GridFunction>>> ladder_samples(const StarOptions& opt, Sampler&& sample) {
  std::vector<std::pair<double, std::vector<GridFunction>>> out(opt.hbar_ladder.size());
  parallel_for(static_cast<int>(out.size()), opt.jobs,
               [&](int i) { out[i] = {opt.hbar_ladder[i], sample(opt.hbar_ladder[i])}; });
  return out;
}

GridSeries fit_component(const std::vector<std::pair<double, std::vector<GridFunction>>>& s, std::size_t c, int N,
                         const ExtrapolationOptions& fit) {
  std::vector<std::pair<double, GridFunction>> v;
  for (const auto& [h, gs] : s) v.push_back({h, gs[c]});
  return extrapolate_series(v, N, fit);
}

}  // namespace

GridSeries egorov_conjugate(const FourierIntegralOperator& f, const Symbol& a, int N, const SymbolGrid& g,
                            const StarOptions& opt) {
  const int K = f.mode_cut();
  check_pullback_tail(f, g, opt);
  const auto samples = ladder_samples(opt, [&](double h) {
    const std::vector<int> ks = conjugation_columns(f, g, h, opt);
    const Eigen::MatrixXcd A = quantize(scale_symbol(a, h), K).entries();
    const Eigen::MatrixXcd cols = f.matrix.entries() * (A * adjoint_columns(f.matrix.entries(), K, ks));
    return std::vector<GridFunction>{columns_to_grid(cols, K, ks, g)};
  });
  return fit_component(samples, 0, N, opt.fit);
}

EgorovResidualReport egorov_residual(const FourierIntegralOperator& f, const Symbol& a, int N, const SymbolGrid& g,
                                     const StarOptions& opt) {
  const int K = f.mode_cut();
  const GridFunction target = egorov_target(f.canonical, a).sample(g);
  check_pullback_tail(f, g, opt);
  const auto samples = ladder_samples(opt, [&](double h) {
    const std::vector<int> ks = conjugation_columns(f, g, h, opt);
    const Eigen::MatrixXcd A = quantize(scale_symbol(a, h), K).entries();
    const Eigen::MatrixXcd cols = f.matrix.entries() * (A * adjoint_columns(f.matrix.entries(), K, ks));
    return std::vector<GridFunction>{columns_to_grid(cols, K, ks, g)};
  });
  EgorovResidualReport rep;
  rep.series = fit_component(samples, 0, N, opt.fit);
  rep.leading_residual = (rep.series.series.coeff(0) - target).abs().maxCoeff();
  Eigen::VectorXd lx(samples.size()), ly(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    rep.hbar.push_back(samples[i].first);
    rep.sup_residual.push_back((samples[i].second[0] - target).abs().maxCoeff());
    lx(i) = std::log(samples[i].first);
    ly(i) = std::log(std::max(rep.sup_residual.back(), 1e-300));
  }
  const double mx = lx.mean(), my = ly.mean();
  rep.slope = ((lx.array() - mx) * (ly.array() - my)).sum() / (lx.array() - mx).square().sum();
  return rep;
}

HomomorphismReport egorov_homomorphism_check(const FourierIntegralOperator& f, const Symbol& a, const Symbol& b,
                                             int N, const SymbolGrid& g, const StarOptions& opt) {
  const int K = f.mode_cut();
  const Eigen::MatrixXcd& F = f.matrix.entries();
  const Eigen::MatrixXcd Fa = F.adjoint();
  check_pullback_tail(f, g, opt);
  const auto samples = ladder_samples(opt, [&](double h) {
    const std::vector<int> ks = conjugation_columns(f, g, h, opt);
    const Eigen::MatrixXcd A = quantize(scale_symbol(a, h), K).entries();
    const Eigen::MatrixXcd B = quantize(scale_symbol(b, h), K).entries();
    const Eigen::MatrixXcd X = adjoint_columns(F, K, ks);
    // F A B F*, F B A F* and the split forms (F A F*)(F B F*), (F B F*)(F A F*).
    const Eigen::MatrixXcd BX = B * X, AX = A * X;
    const Eigen::MatrixXcd ab = F * (A * BX), ba = F * (B * AX);
    const Eigen::MatrixXcd ab_split = F * (A * (Fa * (F * BX))), ba_split = F * (B * (Fa * (F * AX)));
    return std::vector<GridFunction>{columns_to_grid(ab, K, ks, g), columns_to_grid(ab_split, K, ks, g),
                                     columns_to_grid(ab - ba, K, ks, g),
                                     columns_to_grid(ab_split - ba_split, K, ks, g)};
  });
  const GridSeries ab = fit_component(samples, 0, N, opt.fit), ab_split = fit_component(samples, 1, N, opt.fit);
  const GridSeries comm = fit_component(samples, 2, N, opt.fit), comm_split = fit_component(samples, 3, N, opt.fit);

  HomomorphismReport rep;
  rep.order = N;
  rep.pass = true;
  for (int n = 0; n <= N; ++n) {
    rep.product_defect.push_back((ab.series.coeff(n) - ab_split.series.coeff(n)).abs().maxCoeff());
    rep.commutator_defect.push_back((comm.series.coeff(n) - comm_split.series.coeff(n)).abs().maxCoeff());
    rep.pass = rep.pass && rep.product_defect.back() <= rep.tol && rep.commutator_defect.back() <= rep.tol;
  }
  if (N >= 1) {
    // {a, b} = d_xi a d_x b - d_x a d_xi b; the hbar^1 coefficient of the commutator is (1/i){a, b} o phi^{-1}.
    const Symbol bracket = derivative_symbol(a, 0, 1) * derivative_symbol(b, 1, 0) -
                           derivative_symbol(a, 1, 0) * derivative_symbol(b, 0, 1);
    const GridFunction expected = cplx(0, -1) * egorov_target(f.canonical, bracket).sample(g);
    rep.bracket_transport = (comm.series.coeff(1) - expected).abs().maxCoeff();
    rep.pass = rep.pass && rep.bracket_transport <= rep.tol;
  }
  return rep;
}

}  // namespace fioindex
