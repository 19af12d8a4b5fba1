#include "fioindex/geometry.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace fioindex {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

void check_diffeo(const CircleDiffeo& g, int n) {
  for (int i = 0; i < n; ++i) {
    const double x = kTwoPi * i / n;
    if (!(g.derivative(x) > 0)) throw GeometryError("gluing map " + g.name + " is not orientation preserving");
  }
}

}  // namespace

GluedManifoldModel GluedManifoldModel::from(const CanonicalTransformation& ct, int nx) {
  GluedManifoldModel m;
  m.nx = nx;
  m.gluing = ct;
  return m;
}

double GluedManifoldModel::consistency_defect() const {
  double d = 0;
  for (const CircleDiffeo* g : {&gluing.plus, &gluing.minus}) {
    check_diffeo(*g, nx);
    for (int i = 0; i < nx; ++i) {
      const double x = kTwoPi * i / nx;
      d = std::max(d, std::abs((*g)(g->inverse(x)) - x));
      d = std::max(d, std::abs((*g)(x + kTwoPi) - (*g)(x) - kTwoPi));
    }
  }
  return d;
}

double winding_number(const std::function<cplx(double)>& f, int n, double* min_modulus) {
  for (;; n *= 2) {
    std::vector<cplx> v(n);
    double lo = 1e300, hi = 0;
    for (int i = 0; i < n; ++i) {
      v[i] = f(kTwoPi * i / n);
      lo = std::min(lo, std::abs(v[i]));
      hi = std::max(hi, std::abs(v[i]));
    }
    if (!(lo > 1e-12 * std::max(hi, 1e-300))) throw GeometryError("transition data vanishes: ellipticity violated");
    double total = 0, worst = 0;
    for (int i = 0; i < n; ++i) {
      const double step = std::arg(v[(i + 1) % n] / v[i]);
      worst = std::max(worst, std::abs(step));
      total += step;
    }
    // Steps well below pi cannot hide a full turn between samples.
    if (worst < 0.5 || n >= (1 << 20)) {
      if (min_modulus) *min_modulus = lo;
      return total / kTwoPi;
    }
  }
}

std::function<cplx(double)> boundary_limit(const Symbol& b, int sign, int K, double* correction) {
  const double top = sign * K, half = sign * (K / 2);
  if (correction) {
    double c = 0;
    for (int i = 0; i < 64; ++i) {
      const double x = kTwoPi * i / 64;
      c = std::max(c, std::abs(b(x, top) - b(x, half)));
    }
    *correction = c;
  }
  // a(k) = a_inf + c/k + O(k^-2): eliminate the 1/k term.
  return [b, top, half](double x) { return 2.0 * b(x, top) - b(x, half); };
}

GluedBundleModel compute_theta0_windings(const CanonicalTransformation& ct, const Symbol& b_plus,
                                         const Symbol& b_minus, int K, int n) {
  GluedBundleModel gb;
  gb.samples = n;
  gb.min_modulus = 1e300;
  auto integer = [&gb](double w) {
    const long r = std::lround(w);
    gb.gap = std::max(gb.gap, std::abs(w - static_cast<double>(r)));
    return r;
  };
  double corr_p = 0, corr_m = 0;
  const auto lim_p = boundary_limit(b_plus, 1, K, &corr_p), lim_m = boundary_limit(b_minus, -1, K, &corr_m);
  gb.limit_correction = std::max(corr_p, corr_m);

  double mm = 0;
  gb.amplitude_plus = integer(winding_number(lim_p, n, &mm));
  gb.amplitude_minus = integer(winding_number(lim_m, n, &mm));

  check_diffeo(ct.plus, n);
  check_diffeo(ct.minus, n);
  // g' > 0, so the square-root branch continued from g = id is the positive root.
  auto dp = [&ct](double x) { return cplx(ct.plus.derivative(x), 0); };
  auto dm = [&ct](double x) { return cplx(ct.minus.derivative(x), 0); };
  gb.squared_plus = integer(winding_number(dp, n));
  gb.squared_minus = integer(winding_number(dm, n));
  if (gb.squared_plus % 2 != 0 || gb.squared_minus % 2 != 0)
    throw GeometryError("odd winding of g': no continuous square root");
  gb.derivative_plus = gb.squared_plus / 2;
  gb.derivative_minus = gb.squared_minus / 2;

  auto lp = [&](double x) { return lim_p(x) * std::sqrt(ct.plus.derivative(x)); };
  auto lm = [&](double x) { return lim_m(x) * std::sqrt(ct.minus.derivative(x)); };
  gb.w_plus = integer(winding_number(lp, n, &mm));
  gb.min_modulus = std::min(gb.min_modulus, mm);
  gb.w_minus = integer(winding_number(lm, n, &mm));
  gb.min_modulus = std::min(gb.min_modulus, mm);
  return gb;
}

GluedBundleModel compute_theta0_windings(const FourierIntegralOperator& f, int n) {
  return compute_theta0_windings(f.canonical, f.b_plus, f.b_minus, f.mode_cut(), n);
}

// ---------------------------------------------------------------------------

ClassPolynomial ClassPolynomial::constant(int dimension, double c) {
  ClassPolynomial p(dimension);
  p.add({}, c);
  return p;
}

ClassPolynomial ClassPolynomial::generator(int dimension, Monomial m) {
  ClassPolynomial p(dimension);
  p.add(m, 1);
  return p;
}

void ClassPolynomial::add(Monomial m, double c) {
  if (m.degree() > dim_ || c == 0) return;
  const double v = terms_[m] += c;
  if (v == 0) terms_.erase(m);
}

double ClassPolynomial::coeff(Monomial m) const {
  const auto it = terms_.find(m);
  return it == terms_.end() ? 0 : it->second;
}

ClassPolynomial ClassPolynomial::degree_part(int degree) const {
  ClassPolynomial p(dim_);
  for (const auto& [m, c] : terms_)
    if (m.degree() == degree) p.add(m, c);
  return p;
}

ClassPolynomial operator+(const ClassPolynomial& a, const ClassPolynomial& b) {
  ClassPolynomial p(std::min(a.dim_, b.dim_));
  for (const auto& [m, c] : a.terms_) p.add(m, c);
  for (const auto& [m, c] : b.terms_) p.add(m, c);
  return p;
}

ClassPolynomial operator*(const ClassPolynomial& a, const ClassPolynomial& b) {
  ClassPolynomial p(std::min(a.dim_, b.dim_));
  for (const auto& [ma, ca] : a.terms_)
    for (const auto& [mb, cb] : b.terms_) p.add({ma.theta + mb.theta, ma.p1 + mb.p1, ma.p2 + mb.p2}, ca * cb);
  return p;
}

ClassPolynomial operator*(double s, const ClassPolynomial& a) {
  ClassPolynomial p(a.dim_);
  for (const auto& [m, c] : a.terms_) p.add(m, s * c);
  return p;
}

bool operator==(const ClassPolynomial& a, const ClassPolynomial& b) { return a.terms_ == b.terms_; }

ClassPolynomial CharacteristicEvaluator::exp_theta() const {
  ClassPolynomial p(dimension);
  double fact = 1;
  for (int k = 0; 2 * k <= dimension; ++k) {
    if (k > 0) fact *= k;
    p = p + (1 / fact) * ClassPolynomial::generator(dimension, {k, 0, 0});
  }
  return p;
}

ClassPolynomial CharacteristicEvaluator::a_hat() const {
  const int d = std::min(dimension, a_hat_degree);
  const auto p1 = ClassPolynomial::generator(d, {0, 1, 0});
  const auto p2 = ClassPolynomial::generator(d, {0, 0, 1});
  return ClassPolynomial::constant(d, 1) + (-1.0 / 24) * p1 + (7.0 / 5760) * (p1 * p1) + (-4.0 / 5760) * p2;
}

ClassPolynomial CharacteristicEvaluator::integrand() const { return (exp_theta() * a_hat()).degree_part(dimension); }

bool CharacteristicEvaluator::reduces_to_one_plus_theta() const {
  if (dimension != 2) return false;
  const auto one_plus_theta = ClassPolynomial::constant(2, 1) + ClassPolynomial::generator(2, {1, 0, 0});
  return exp_theta() * a_hat() == one_plus_theta;
}

long evaluate_index_formula(const GluedBundleModel& gb, const CharacteristicEvaluator& ev) {
  if (ev.dimension != 2) throw GeometryError("the glued circle model is two dimensional");
  // On a surface only the theta coefficient of the integrand survives; its
  // integral is the winding of the transition data, the two balls with opposite signs.
  const double c = ev.integrand().coeff({1, 0, 0});
  return std::lround(c * ev.orientation * static_cast<double>(gb.total()));
}

int calibrate_orientation(long analytic_index, const GluedBundleModel& gb) {
  if (gb.total() == 0 || std::abs(analytic_index) != std::abs(gb.total()))
    throw GeometryError("calibration needs a configuration with |index| = |total winding| != 0");
  return analytic_index == gb.total() ? 1 : -1;
}

// ---------------------------------------------------------------------------

ExteriorForm ExteriorForm::scalar(int dim, double s) {
  ExteriorForm f(dim);
  f.c_(0) = s;
  return f;
}

ExteriorForm ExteriorForm::basis2(int dim, int i, int j) {
  if (i == j || i < 0 || j < 0 || i >= dim || j >= dim) throw std::invalid_argument("bad 2-form indices");
  ExteriorForm f(dim);
  f[(1u << i) | (1u << j)] = i < j ? 1 : -1;
  return f;
}

ExteriorForm ExteriorForm::degree_part(int degree) const {
  ExteriorForm f(dim_);
  for (std::uint32_t m = 0; m < (1u << dim_); ++m)
    if (std::popcount(m) == degree) f.c_(m) = c_(m);
  return f;
}

ExteriorForm operator+(const ExteriorForm& a, const ExteriorForm& b) {
  ExteriorForm f(a.dim_);
  f.c_ = a.c_ + b.c_;
  return f;
}

ExteriorForm operator-(const ExteriorForm& a, const ExteriorForm& b) {
  ExteriorForm f(a.dim_);
  f.c_ = a.c_ - b.c_;
  return f;
}

ExteriorForm operator*(double s, const ExteriorForm& a) {
  ExteriorForm f(a.dim_);
  f.c_ = s * a.c_;
  return f;
}

ExteriorForm operator^(const ExteriorForm& a, const ExteriorForm& b) {
  if (a.dim_ != b.dim_) throw std::invalid_argument("forms of different dimension");
  ExteriorForm f(a.dim_);
  const std::uint32_t n = 1u << a.dim_;
  for (std::uint32_t p = 0; p < n; ++p) {
    if (a.c_(p) == 0) continue;
    for (std::uint32_t q = 0; q < n; ++q) {
      if (b.c_(q) == 0 || (p & q)) continue;
      // Sign of sorting e_p e_q: count pairs (i in p, j in q) with i > j.
      int swaps = 0;
      for (std::uint32_t qq = q; qq; qq &= qq - 1) swaps += std::popcount(p >> (std::countr_zero(qq) + 1));
      f.c_(p | q) += (swaps % 2 ? -1 : 1) * a.c_(p) * b.c_(q);
    }
  }
  return f;
}

namespace {

using FormMatrix = std::vector<std::vector<ExteriorForm>>;

FormMatrix multiply(const FormMatrix& a, const FormMatrix& b) {
  const std::size_t r = a.size();
  const int dim = a[0][0].dim();
  FormMatrix c(r, std::vector<ExteriorForm>(r, ExteriorForm(dim)));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j)
      for (std::size_t k = 0; k < r; ++k) c[i][j] = c[i][j] + (a[i][k] ^ b[k][j]);
  return c;
}

ExteriorForm trace(const FormMatrix& a) {
  ExteriorForm t(a[0][0].dim());
  for (std::size_t i = 0; i < a.size(); ++i) t = t + a[i][i];
  return t;
}

ExteriorForm truncate(const ExteriorForm& f, int degree) {
  ExteriorForm t(f.dim());
  for (int d = 0; d <= std::min(degree, f.dim()); ++d) t = t + f.degree_part(d);
  return t;
}

}  // namespace

CharacteristicForm a_hat_series(const CurvatureMatrix& curvature, int degree) {
  if (curvature.empty()) throw GeometryError("empty curvature matrix");
  const std::size_t r = curvature.size();
  const int dim = curvature[0][0].dim();
  for (std::size_t i = 0; i < r; ++i) {
    if (curvature[i].size() != r) throw GeometryError("curvature matrix is not square");
    for (std::size_t j = 0; j < r; ++j) {
      if ((curvature[i][j] + curvature[j][i]).max_abs() > 1e-12) throw GeometryError("curvature is not antisymmetric");
      if ((curvature[i][j] - curvature[i][j].degree_part(2)).max_abs() > 0)
        throw GeometryError("curvature entries must be 2-forms");
    }
  }
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const FormMatrix o2 = multiply(curvature, curvature);
  const FormMatrix o4 = multiply(o2, o2);
  const ExteriorForm tr2 = trace(o2), tr4 = trace(o4);
  // p1 = -tr(O^2) / (8 pi^2), p2 = ((tr O^2)^2 - 2 tr O^4) / (128 pi^4).
  ExteriorForm p1 = (-1.0 / (8 * pi2)) * tr2;
  ExteriorForm p2 = (1.0 / (128 * pi2 * pi2)) * ((tr2 ^ tr2) - 2.0 * tr4);
  ExteriorForm total = ExteriorForm::scalar(dim, 1) + (-1.0 / 24) * p1 + (7.0 / 5760) * (p1 ^ p1) + (-4.0 / 5760) * p2;
  return {truncate(total, degree), p1, p2};
}

// ---------------------------------------------------------------------------

ChartDensity ChartDensity::sample(const std::function<double(double, double)>& f, int nx, double radius, int nxi) {
  if (nx < 1 || nxi < 2) throw std::invalid_argument("chart grid too small");
  ChartDensity c;
  c.x = Eigen::VectorXd::LinSpaced(nx, 0, kTwoPi * (nx - 1) / nx);
  c.xi = Eigen::VectorXd::LinSpaced(nxi, -radius, radius);
  c.values.resize(nx, nxi);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nxi; ++j) c.values(i, j) = f(c.x(i), c.xi(j));
  return c;
}

ChartDensity ChartDensity::zero(int nx, double radius, int nxi) {
  return sample([](double, double) { return 0.0; }, nx, radius, nxi);
}

double chart_integral(const ChartDensity& a, double decay_tol) {
  const Eigen::Index nx = a.values.rows(), nxi = a.values.cols();
  const double peak = a.values.abs().maxCoeff();
  const double edge = std::max(a.values.col(0).abs().maxCoeff(), a.values.col(nxi - 1).abs().maxCoeff());
  if (edge > decay_tol * std::max(peak, 1.0)) throw GeometryError("form does not decay towards the boundary");
  const double dx = kTwoPi / static_cast<double>(nx);
  const double dxi = (a.xi(nxi - 1) - a.xi(0)) / static_cast<double>(nxi - 1);
  Eigen::ArrayXd w = Eigen::ArrayXd::Constant(nxi, dxi);
  w(0) = w(nxi - 1) = dxi / 2;
  return dx * (a.values.rowwise() * w.transpose()).sum();
}

double regularized_integral(const ChartDensity& alpha, const ChartDensity& beta, double decay_tol) {
  return chart_integral(alpha, decay_tol) - chart_integral(beta, decay_tol);
}

long half_c1_evaluator(const GluedBundleModel& gb, const CharacteristicEvaluator& ev) {
  const long twice = gb.squared_plus - gb.squared_minus;
  if (twice % 2 != 0) throw GeometryError("inconsistent metalinear choice: odd total winding of g'");
  return ev.orientation * (twice / 2);
}

}  // namespace fioindex
