#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fioindex {

/// Raised when two series cannot be combined (shape or layout mismatch).
class SeriesError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the Vandermonde fit behind an extrapolation is too ill-conditioned.
class ConditioningError : public std::runtime_error {
 public:
  ConditioningError(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

// Coefficient-space hooks. Scalars are always compatible; dense Eigen objects
// must agree in shape.
inline bool series_compatible(double, double) { return true; }
template <typename S>
bool series_compatible(const std::complex<S>&, const std::complex<S>&) { return true; }
template <typename D>
bool series_compatible(const Eigen::DenseBase<D>& a, const Eigen::DenseBase<D>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols();
}

inline double series_zero_like(double) { return 0.0; }
template <typename S>
std::complex<S> series_zero_like(const std::complex<S>&) { return {}; }
template <typename D>
typename D::PlainObject series_zero_like(const Eigen::DenseBase<D>& a) {
  return D::PlainObject::Zero(a.rows(), a.cols());
}

inline double series_norm(double a) { return std::abs(a); }
template <typename S>
S series_norm(const std::complex<S>& a) { return std::abs(a); }
template <typename D>
double series_norm(const Eigen::DenseBase<D>& a) {
  return a.size() == 0 ? 0.0 : static_cast<double>(a.derived().cwiseAbs().maxCoeff());
}

/// w * v with w converted to the real scalar of v.
inline double series_scaled(long double w, double v) { return static_cast<double>(w) * v; }
template <typename S>
std::complex<S> series_scaled(long double w, const std::complex<S>& v) { return static_cast<S>(w) * v; }
template <typename D>
typename D::PlainObject series_scaled(long double w, const Eigen::DenseBase<D>& v) {
  using Real = typename Eigen::NumTraits<typename D::Scalar>::Real;
  return v.derived() * static_cast<Real>(w);
}

/// Truncated Laurent series sum_{k=min_power}^{trunc_order} c_k hbar^k.
template <typename T>
class FormalSeries {
 public:
  FormalSeries() = default;

  FormalSeries(std::vector<T> coeffs, int min_power, int trunc_order)
      : coeffs_(std::move(coeffs)), min_power_(min_power), trunc_order_(trunc_order) {
    if (trunc_order_ < 0) throw SeriesError("trunc_order must be non-negative");
    if (static_cast<int>(coeffs_.size()) != trunc_order_ - min_power_ + 1)
      throw SeriesError("coefficient count does not match [min_power, trunc_order]");
    for (std::size_t i = 1; i < coeffs_.size(); ++i)
      if (!series_compatible(coeffs_[0], coeffs_[i]))
        throw SeriesError("coefficients live in different spaces");
  }

  /// The series c + 0*hbar + ... up to `trunc_order`.
  static FormalSeries constant(const T& c, int trunc_order) {
    std::vector<T> cs(trunc_order + 1, series_zero_like(c));
    cs[0] = c;
    return FormalSeries(std::move(cs), 0, trunc_order);
  }

  int min_power() const { return min_power_; }
  int trunc_order() const { return trunc_order_; }
  const std::vector<T>& coeffs() const { return coeffs_; }
  bool empty() const { return coeffs_.empty(); }

  bool has_power(int p) const { return p >= min_power_ && p <= trunc_order_; }

  /// Coefficient of hbar^p. Powers below min_power are zero; powers above
  /// trunc_order are unknown and throw.
  T coeff(int p) const {
    if (p > trunc_order_) throw SeriesError("power beyond truncation order");
    if (p < min_power_) return series_zero_like(coeffs_.front());
    return coeffs_[p - min_power_];
  }

  const T& operator[](int p) const {
    if (!has_power(p)) throw SeriesError("power outside stored range");
    return coeffs_[p - min_power_];
  }

 private:
  std::vector<T> coeffs_;
  int min_power_ = 0;
  int trunc_order_ = 0;
};

template <typename T>
FormalSeries<T> series_add(const FormalSeries<T>& a, const FormalSeries<T>& b) {
  if (!series_compatible(a.coeffs().front(), b.coeffs().front()))
    throw SeriesError("incompatible coefficient spaces");
  const int lo = std::min(a.min_power(), b.min_power());
  const int hi = std::min(a.trunc_order(), b.trunc_order());
  std::vector<T> cs;
  cs.reserve(hi - lo + 1);
  for (int p = lo; p <= hi; ++p) {
    T v = a.coeff(p);
    v = v + b.coeff(p);
    cs.push_back(std::move(v));
  }
  return FormalSeries<T>(std::move(cs), lo, hi);
}

/// Cauchy product. A factor known through hbar^N with lowest power m only
/// determines the product through N + (lowest power of the other factor).
template <typename T>
FormalSeries<T> series_mul(const FormalSeries<T>& a, const FormalSeries<T>& b) {
  const int lo = a.min_power() + b.min_power();
  const int hi = std::min(a.trunc_order() + b.min_power(), b.trunc_order() + a.min_power());
  if (hi < 0) throw SeriesError("product has no determined non-negative order");
  std::vector<T> cs;
  for (int p = lo; p <= hi; ++p) {
    // i = a.min_power() always pairs with an in-range j, so acc starts there.
    T acc = a[a.min_power()] * b[p - a.min_power()];
    for (int i = a.min_power() + 1; i <= a.trunc_order(); ++i) {
      const int j = p - i;
      if (j < b.min_power() || j > b.trunc_order()) continue;
      acc = acc + a[i] * b[j];
    }
    cs.push_back(std::move(acc));
  }
  return FormalSeries<T>(std::move(cs), lo, hi);
}

template <typename T>
FormalSeries<T> operator+(const FormalSeries<T>& a, const FormalSeries<T>& b) { return series_add(a, b); }
template <typename T>
FormalSeries<T> operator*(const FormalSeries<T>& a, const FormalSeries<T>& b) { return series_mul(a, b); }

/// The hbar ladder hbar = 1/L shared by every extrapolation.
inline std::vector<double> default_hbar_ladder() {
  std::vector<double> h;
  for (int L : {8, 12, 16, 20, 24, 32, 40, 48, 64}) h.push_back(1.0 / L);
  return h;
}

struct ExtrapolationOptions {
  double max_condition = 1e10;
  /// Polynomial degree of the fit; -1 picks samples - 2 (capped at 8).
  int fit_degree = -1;
};

template <typename T>
struct ExtrapolationResult {
  FormalSeries<T> series;
  double residual = 0;   ///< max fit misfit over the samples
  double tail = 0;       ///< size of the first dropped term at the smallest hbar
  double condition = 0;  ///< of the scaled Vandermonde matrix
  int fit_degree = 0;
};

/// Least-squares polynomial fit in hbar, returning the first N+1 coefficients.
/// The fit degree exceeds N so the O(hbar^{N+1}) remainder does not leak into
/// the retained coefficients.
template <typename T>
ExtrapolationResult<T> extrapolate_series(const std::vector<std::pair<double, T>>& samples, int N,
                                          const ExtrapolationOptions& opt = {}) {
  const int n = static_cast<int>(samples.size());
  if (N < 0) throw SeriesError("negative truncation order");
  if (n < N + 2) throw SeriesError("need at least N+2 samples");
  double hmax = 0, hmin = 1e300;
  for (int i = 0; i < n; ++i) {
    const double h = samples[i].first;
    if (!(h > 0)) throw SeriesError("hbar samples must be positive");
    for (int j = 0; j < i; ++j)
      if (samples[j].first == h) throw SeriesError("hbar samples must be distinct");
    if (!series_compatible(samples[0].second, samples[i].second))
      throw SeriesError("sample values live in different spaces");
    hmax = std::max(hmax, h);
    hmin = std::min(hmin, h);
  }
  int deg = opt.fit_degree >= 0 ? opt.fit_degree : std::min(n - 2, 8);
  deg = std::max(deg, N);
  if (deg > n - 1) throw SeriesError("fit degree exceeds sample count");

  // The fit runs in long double; coefficients are combined in the scalar type of T.
  using Wide = long double;
  Eigen::Matrix<Wide, Eigen::Dynamic, Eigen::Dynamic> V(n, deg + 1);
  for (int i = 0; i < n; ++i) {
    const Wide t = static_cast<Wide>(samples[i].first) / hmax;
    Wide p = 1;
    for (int d = 0; d <= deg; ++d, p *= t) V(i, d) = p;
  }
  Eigen::JacobiSVD<decltype(V)> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cond = static_cast<double>(s(0) / s(s.size() - 1));
  if (!(cond <= opt.max_condition))
    throw ConditioningError("Vandermonde fit ill-conditioned", cond);
  // W maps sample values to scaled coefficients: c = W * y.
  const decltype(V) W = svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();

  // Fit y - y_ref and add y_ref back to the constant term. The rows of W for
  // d >= 1 annihilate constants only up to eps * |W|, which is large on
  // wide ladders; centering keeps that error proportional to the variation
  // of the samples instead of their size.
  const T& ref = samples[n - 1].second;
  auto combine = [&](int d) {
    T acc = series_zero_like(ref);
    for (int i = 0; i < n - 1; ++i) {
      T centered = samples[i].second;
      centered = centered - ref;
      acc = acc + series_scaled(W(d, i), centered);
    }
    if (d == 0) acc = acc + ref;
    return acc;
  };
  std::vector<T> all;
  for (int d = 0; d <= deg; ++d) all.push_back(series_scaled(std::pow(static_cast<Wide>(hmax), -d), combine(d)));

  ExtrapolationResult<T> out;
  for (int i = 0; i < n; ++i) {
    const Wide h = samples[i].first;
    T fit = series_zero_like(samples[0].second);
    for (int d = 0; d <= deg; ++d) fit = fit + series_scaled(std::pow(h, d), all[d]);
    T diff = samples[i].second;
    diff = diff - fit;
    out.residual = std::max(out.residual, static_cast<double>(series_norm(diff)));
  }
  if (N + 1 <= deg) out.tail = static_cast<double>(series_norm(all[N + 1])) * std::pow(hmin, N + 1);
  out.condition = cond;
  out.fit_degree = deg;
  all.resize(N + 1);
  out.series = FormalSeries<T>(std::move(all), 0, N);
  return out;
}

}  // namespace fioindex
