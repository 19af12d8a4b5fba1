#pragma once

#include "fioindex/fio.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fioindex {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Orientation of the split index formula, fixed by calibrating against the
/// analytic index of the m = 1 Toeplitz clutching: Ind = -(w_plus - w_minus).
inline constexpr int kIndexOrientation = -1;

/// Two compactified cylinders [0, 2pi) x [0, 1] in (x, t = 1/|xi|), glued along
/// their boundary circles t = 0. The xi = +inf circle of the source chart is
/// glued to the xi = -inf circle of the target chart by g_plus, and the
/// xi = -inf circle to the xi = +inf circle by g_minus.
struct GluedManifoldModel {
  int nx = 256;
  int nt = 64;
  CanonicalTransformation gluing;
  /// Local frames near t = 0 spanning the tangent algebroid.
  std::vector<std::string> frames{"t*d/dx", "t^2*d/dt"};

  static GluedManifoldModel from(const CanonicalTransformation& ct, int nx = 256);
  /// Max over both gluing maps of |g(g^-1 y) - y| and |g(x + 2 pi) - g(x) - 2 pi|.
  /// Throws GeometryError if a map is not an orientation-preserving diffeomorphism.
  double consistency_defect() const;
};

/// Transition data of the glued line bundle on the two gluing circles:
/// lambda_pm(x) = b_pm(x, +-inf) (g_pm'(x))^{1/2}.
struct GluedBundleModel {
  long w_plus = 0;
  long w_minus = 0;
  long amplitude_plus = 0;   ///< winding of b_plus(x, +inf)
  long amplitude_minus = 0;
  long derivative_plus = 0;  ///< winding of (g_plus')^{1/2}
  long derivative_minus = 0;
  long squared_plus = 0;     ///< winding of g_plus', twice derivative_plus
  long squared_minus = 0;
  double gap = 0;            ///< max distance of a raw winding from its integer
  double min_modulus = 0;    ///< smallest |lambda| on either circle
  double limit_correction = 0;  ///< size of the Richardson step in the boundary limit
  int samples = 0;

  long total() const { return w_plus - w_minus; }
};

/// Winding number of a closed curve sampled on [0, 2 pi); refines until the
/// steps are resolved. Throws GeometryError on a zero crossing.
double winding_number(const std::function<cplx(double)>& f, int n = 1024, double* min_modulus = nullptr);

/// b(x, +-inf) from the symbol at lattice modes K/2 and K, extrapolated in 1/k.
std::function<cplx(double)> boundary_limit(const Symbol& b, int sign, int K, double* correction = nullptr);

GluedBundleModel compute_theta0_windings(const CanonicalTransformation& ct, const Symbol& b_plus,
                                         const Symbol& b_minus, int K, int n = 1024);
GluedBundleModel compute_theta0_windings(const FourierIntegralOperator& f, int n = 1024);

/// Polynomial in the classes theta (degree 2), p1 (degree 4), p2 (degree 8),
/// truncated above the manifold dimension.
class ClassPolynomial {
 public:
  struct Monomial {
    int theta = 0, p1 = 0, p2 = 0;
    int degree() const { return 2 * theta + 4 * p1 + 8 * p2; }
    auto operator<=>(const Monomial&) const = default;
  };

  explicit ClassPolynomial(int dimension) : dim_(dimension) {}
  static ClassPolynomial constant(int dimension, double c);
  static ClassPolynomial generator(int dimension, Monomial m);

  int dimension() const { return dim_; }
  const std::map<Monomial, double>& terms() const { return terms_; }
  double coeff(Monomial m) const;
  /// Terms of exactly the given degree.
  ClassPolynomial degree_part(int degree) const;

  friend ClassPolynomial operator+(const ClassPolynomial& a, const ClassPolynomial& b);
  friend ClassPolynomial operator*(const ClassPolynomial& a, const ClassPolynomial& b);
  friend ClassPolynomial operator*(double s, const ClassPolynomial& a);
  friend bool operator==(const ClassPolynomial& a, const ClassPolynomial& b);

 private:
  void add(Monomial m, double c);
  int dim_;
  std::map<Monomial, double> terms_;
};

struct CharacteristicEvaluator {
  int dimension = 2;
  int a_hat_degree = 8;  ///< highest form degree kept in the A-hat series
  int orientation = kIndexOrientation;

  ClassPolynomial exp_theta() const;
  /// 1 - p1/24 + (7 p1^2 - 4 p2)/5760, truncated.
  ClassPolynomial a_hat() const;
  /// Top-degree part of e^theta A-hat.
  ClassPolynomial integrand() const;
  /// True iff e^theta A-hat equals 1 + theta (checked on the polynomial, dimension 2 only).
  bool reduces_to_one_plus_theta() const;
};

/// Signed sum of the boundary windings weighted by the theta coefficient of the
/// integrand; the two balls enter with opposite signs.
long evaluate_index_formula(const GluedBundleModel& gb, const CharacteristicEvaluator& ev = {});

/// Orientation making the formula agree with `analytic_index` on a calibration
/// configuration with nonzero total winding.
int calibrate_orientation(long analytic_index, const GluedBundleModel& gb);

/// Differential form at a point of R^n (n <= 8), stored on the 2^n basis monomials.
class ExteriorForm {
 public:
  explicit ExteriorForm(int dim) : dim_(dim), c_(Eigen::VectorXd::Zero(1 << dim)) {
    if (dim < 0 || dim > 8) throw std::invalid_argument("form dimension must be in 0..8");
  }
  static ExteriorForm scalar(int dim, double s);
  /// Basis 2-form e_i ^ e_j.
  static ExteriorForm basis2(int dim, int i, int j);

  int dim() const { return dim_; }
  double& operator[](std::uint32_t mask) { return c_(mask); }
  double operator[](std::uint32_t mask) const { return c_(mask); }
  /// Part of the given degree.
  ExteriorForm degree_part(int degree) const;
  double max_abs() const { return c_.cwiseAbs().maxCoeff(); }

  friend ExteriorForm operator+(const ExteriorForm& a, const ExteriorForm& b);
  friend ExteriorForm operator-(const ExteriorForm& a, const ExteriorForm& b);
  friend ExteriorForm operator*(double s, const ExteriorForm& a);
  /// Wedge product.
  friend ExteriorForm operator^(const ExteriorForm& a, const ExteriorForm& b);

 private:
  int dim_;
  Eigen::VectorXd c_;
};

/// Curvature matrix: an r x r antisymmetric array of 2-forms.
using CurvatureMatrix = std::vector<std::vector<ExteriorForm>>;

struct CharacteristicForm {
  ExteriorForm total;  ///< the truncated A-hat form
  ExteriorForm p1;
  ExteriorForm p2;
};

/// A-hat form of a curvature matrix, keeping form degrees <= degree. Throws
/// GeometryError if the matrix is not antisymmetric.
CharacteristicForm a_hat_series(const CurvatureMatrix& curvature, int degree = 8);

/// Top-degree form density f(x, xi) dx ^ dxi sampled on a chart, x periodic.
struct ChartDensity {
  Eigen::VectorXd x;   ///< uniform on [0, 2 pi)
  Eigen::VectorXd xi;  ///< uniform on [-R, R]
  Eigen::ArrayXXd values;  ///< values(i, j) = f(x_i, xi_j)

  static ChartDensity sample(const std::function<double(double, double)>& f, int nx, double radius, int nxi);
  static ChartDensity zero(int nx, double radius, int nxi);
};

/// Integral over one chart: periodic rule in x, trapezoid in xi. Throws
/// GeometryError unless the edge columns are below decay_tol times the maximum.
double chart_integral(const ChartDensity& a, double decay_tol = 1e-12);
/// int alpha over the source chart minus int beta over the target chart.
double regularized_integral(const ChartDensity& alpha, const ChartDensity& beta, double decay_tol = 1e-12);

/// Integer int_M (1/2) c1 of the complexified tangent algebroid: the signed
/// windings of the squared cochain g_pm', halved. Zero for every circle gluing.
/// Throws GeometryError if the halved total is not an integer.
long half_c1_evaluator(const GluedBundleModel& gb, const CharacteristicEvaluator& ev = {});

}  // namespace fioindex
