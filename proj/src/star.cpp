#include "fioindex/star.hpp"

#include "fioindex/parallel.hpp"

#include <cmath>

namespace fioindex {

namespace {

double factorial(int n) {
  double r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

/// Composition, symbol synthesis and the hbar fit run in long double: the fit
/// amplifies sample rounding by ~1e8 in the hbar^3 coefficient.
using Wide = long double;
using WideGrid = Eigen::Array<std::complex<Wide>, Eigen::Dynamic, Eigen::Dynamic>;

/// Full symbol of the product columns at the grid points:
/// out(i, c) = e^{-i k_c x_i} sum_j P(j, c) e^{i j x_i}.
WideGrid columns_to_grid(const ComplexMatrix<Wide>& cols, int K, const std::vector<int>& ks, const SymbolGrid& g) {
  const Eigen::Index nx = g.x.size();
  ComplexMatrix<Wide> E(nx, 2 * K + 1);
  for (Eigen::Index i = 0; i < nx; ++i)
    for (int j = -K; j <= K; ++j) E(i, j + K) = std::polar(Wide(1), Wide(j) * Wide(g.x(i)));
  WideGrid out = (E * cols).array();
  for (std::size_t c = 0; c < ks.size(); ++c)
    for (Eigen::Index i = 0; i < nx; ++i)
      out(i, static_cast<Eigen::Index>(c)) *= std::polar(Wide(1), -Wide(ks[c]) * Wide(g.x(i)));
  return out;
}

/// Modes j whose row of `cols` rises above `rel` times its largest entry; the
/// rest is rounding noise of the column quantization (symbols are evaluated in
/// double, so that noise sits near 1e-16 of the column maximum).
std::vector<int> support_modes(const ComplexMatrix<Wide>& cols, int K, Wide rel = 1e-15L) {
  const Wide cut = rel * cols.cwiseAbs().maxCoeff();
  std::vector<int> js;
  for (int j = -K; j <= K; ++j)
    if (cols.row(j + K).cwiseAbs().maxCoeff() > cut) js.push_back(j);
  return js;
}

ComplexMatrix<Wide> gather_rows(const ComplexMatrix<Wide>& m, int K, const std::vector<int>& js) {
  ComplexMatrix<Wide> out(static_cast<Eigen::Index>(js.size()), m.cols());
  for (std::size_t r = 0; r < js.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(js[r] + K);
  return out;
}

/// Columns ks of Op(a) * cols, quantizing only the columns of Op(a) that meet
/// the support of `cols`.
ComplexMatrix<Wide> apply_left(const Symbol& a, const ComplexMatrix<Wide>& cols, int K) {
  const std::vector<int> js = support_modes(cols, K);
  if (js.empty()) return ComplexMatrix<Wide>::Zero(2 * K + 1, cols.cols());
  return quantize_columns<Wide>(a, K, js) * gather_rows(cols, K, js);
}

template <typename Sampler>
GridSeries fit_ladder(const std::vector<double>& ladder, int N, int jobs, const ExtrapolationOptions& fit,
                      Sampler&& sample) {
  std::vector<std::pair<double, WideGrid>> samples(ladder.size());
  parallel_for(static_cast<int>(ladder.size()), jobs, [&](int i) { samples[i] = {ladder[i], sample(ladder[i])}; });
  const ExtrapolationResult<WideGrid> wide = extrapolate_series(samples, N, fit);
  std::vector<GridFunction> cs;
  for (const WideGrid& c : wide.series.coeffs()) cs.push_back(c.cast<cplx>());
  GridSeries out;
  out.series = FormalSeries<GridFunction>(std::move(cs), wide.series.min_power(), wide.series.trunc_order());
  out.residual = wide.residual;
  out.tail = wide.tail;
  out.condition = wide.condition;
  out.fit_degree = wide.fit_degree;
  return out;
}

}  // namespace

SymbolGrid default_star_grid() { return SymbolGrid::lattice(128, 0.25, 10); }

std::vector<int> lattice_columns(const SymbolGrid& g, double hbar, int K, int edge_guard) {
  std::vector<int> ks;
  for (Eigen::Index j = 0; j < g.xi.size(); ++j) {
    const double k = g.xi(j) / hbar;
    const double r = std::round(k);
    if (std::abs(k - r) > 1e-8) throw ModeCutError("grid xi/hbar is not a lattice point");
    if (std::abs(r) > K - edge_guard) throw ModeCutError("grid xi/hbar too close to the mode cut; increase K");
    ks.push_back(static_cast<int>(r));
  }
  return ks;
}

GridSeries star_numeric(const Symbol& a, const Symbol& b, int N, const SymbolGrid& g, const StarOptions& opt) {
  return fit_ladder(opt.hbar_ladder, N, opt.jobs, opt.fit, [&](double h) {
    const std::vector<int> ks = lattice_columns(g, h, opt.K, opt.edge_guard);
    const ComplexMatrix<Wide> B = quantize_columns<Wide>(scale_symbol(b, h), opt.K, ks);
    return columns_to_grid(apply_left(scale_symbol(a, h), B, opt.K), opt.K, ks, g);
  });
}

GridSeries star_numeric_triple(const Symbol& a, const Symbol& b, const Symbol& c, int N, const SymbolGrid& g,
                               const StarOptions& opt) {
  return fit_ladder(opt.hbar_ladder, N, opt.jobs, opt.fit, [&](double h) {
    const std::vector<int> ks = lattice_columns(g, h, opt.K, opt.edge_guard);
    const ComplexMatrix<Wide> C = quantize_columns<Wide>(scale_symbol(c, h), opt.K, ks);
    const ComplexMatrix<Wide> BC = apply_left(scale_symbol(b, h), C, opt.K);
    return columns_to_grid(apply_left(scale_symbol(a, h), BC, opt.K), opt.K, ks, g);
  });
}

Symbol star_coefficient_symbol(const Symbol& a, const Symbol& b, int n) {
  const cplx coef = std::pow(cplx(0, -1), n) / factorial(n);
  Symbol::JetEval je;
  if (a.has_jet() && b.has_jet())
    je = [a, b, n, coef](double x, double xi, int nx, int nxi) {
      const Jet da = a.jet(x, xi, nx, nxi + n).differentiated(0, n);
      const Jet db = b.jet(x, xi, nx + n, nxi).differentiated(n, 0);
      return coef * (da * db);
    };
  Symbol s(
      [a, b, n, coef](double x, double xi) {
        return n == 0 ? a(x, xi) * b(x, xi) : coef * a.derivative(0, n, x, xi) * b.derivative(n, 0, x, xi);
      },
      a.order() + b.order() - n, je, "A" + std::to_string(n) + "(" + a.name() + "," + b.name() + ")");
  return s;
}

std::vector<Symbol> star_series(const std::vector<Symbol>& a, const std::vector<Symbol>& b, int N) {
  std::vector<Symbol> out;
  for (int n = 0; n <= N; ++n) {
    Symbol acc;
    bool first = true;
    for (int i = 0; i <= n && i < static_cast<int>(a.size()); ++i)
      for (int j = 0; i + j <= n && j < static_cast<int>(b.size()); ++j) {
        Symbol t = star_coefficient_symbol(a[i], b[j], n - i - j);
        acc = first ? t : acc + t;
        first = false;
      }
    out.push_back(first ? Symbol::constant(0) : acc);
  }
  return out;
}

FormalSeries<GridFunction> star_analytic(const Symbol& a, const Symbol& b, int N, const SymbolGrid& g) {
  std::vector<GridFunction> cs;
  for (int n = 0; n <= N; ++n) cs.push_back(star_coefficient_symbol(a, b, n).sample(g));
  return FormalSeries<GridFunction>(std::move(cs), 0, N);
}

StarCoefficient star_coefficients(const Symbol& f, const Symbol& g, int N, const SymbolGrid& grid) {
  StarCoefficient sc{grid, {}};
  for (int n = 0; n <= N; ++n) sc.terms.push_back(star_coefficient_symbol(f, g, n).sample(grid));
  return sc;
}

SymbolGrid shell_grid(int nx) {
  std::vector<double> xi;
  for (int j = 24; j >= 0; --j) xi.push_back(-std::pow(2.0, j / 2.0));
  for (int j = 0; j <= 24; ++j) xi.push_back(std::pow(2.0, j / 2.0));
  return SymbolGrid::uniform(nx, xi);
}

BoundaryExtensionReport boundary_extension_check(const StarCoefficient& coeffs, double cutoff_radius) {
  BoundaryExtensionReport rep;
  rep.pass = true;
  const auto& g = coeffs.grid;
  // Distinct |xi| values in increasing order with their column indices on each ray.
  std::vector<double> radii;
  for (Eigen::Index j = 0; j < g.xi.size(); ++j)
    if (g.xi(j) > 0) radii.push_back(g.xi(j));
  std::sort(radii.begin(), radii.end());
  auto column_of = [&](double xi) -> Eigen::Index {
    for (Eigen::Index j = 0; j < g.xi.size(); ++j)
      if (g.xi(j) == xi) return j;
    return -1;
  };

  for (std::size_t n = 0; n < coeffs.terms.size(); ++n) {
    const GridFunction& t = coeffs.terms[n];
    BoundaryOrderReport r;
    r.order = static_cast<int>(n);
    for (double R : radii) {
      double s = 0;
      for (double sign : {1.0, -1.0}) {
        const Eigen::Index c = column_of(sign * R);
        if (c >= 0) s = std::max(s, t.col(c).abs().maxCoeff());
      }
      r.shell_sups.push_back(s);
      if (R >= cutoff_radius) r.sup = std::max(r.sup, s);
    }
    r.non_increasing = true;
    if (n >= 1) {
      // Beyond the transition region of the cutoff the coefficients are of negative order.
      for (std::size_t k = 1; k < radii.size(); ++k)
        if (radii[k - 1] >= 2 * cutoff_radius && r.shell_sups[k] > r.shell_sups[k - 1] * (1 + 1e-6) + 1e-12)
          r.non_increasing = false;
    }
    // Ray convergence: increments between consecutive radii must shrink.
    std::vector<double> inc;
    for (std::size_t k = 1; k < radii.size(); ++k) {
      if (radii[k - 1] < 2 * cutoff_radius) continue;
      double d = 0;
      for (double sign : {1.0, -1.0}) {
        const Eigen::Index c0 = column_of(sign * radii[k - 1]), c1 = column_of(sign * radii[k]);
        if (c0 >= 0 && c1 >= 0) d = std::max(d, (t.col(c1) - t.col(c0)).abs().maxCoeff());
      }
      inc.push_back(d);
    }
    r.last_ray_increment = inc.empty() ? 0 : inc.back();
    r.ray_converges = !inc.empty() && r.last_ray_increment <= 1e-2 * std::max(1.0, r.sup);
    for (std::size_t k = 1; k < inc.size(); ++k)
      if (inc[k] > inc[k - 1] * (1 + 1e-6) + 1e-12) r.ray_converges = false;
    const std::size_t m = r.shell_sups.size();
    if (m >= 2 && r.shell_sups[m - 1] > 1e-300 && r.shell_sups[m - 2] > 1e-300)
      r.measured_order = std::log(r.shell_sups[m - 1] / r.shell_sups[m - 2]) / std::log(radii[m - 1] / radii[m - 2]);
    else
      r.measured_order = -INFINITY;
    rep.pass = rep.pass && std::isfinite(r.sup) && r.non_increasing && r.ray_converges;
    rep.orders.push_back(r);
  }
  return rep;
}

}  // namespace fioindex
