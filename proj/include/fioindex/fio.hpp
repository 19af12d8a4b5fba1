#pragma once

#include "fioindex/formal_series.hpp"
#include "fioindex/operator_matrix.hpp"
#include "fioindex/star.hpp"
#include "fioindex/symbol.hpp"

#include <functional>
#include <stdexcept>
#include <string>

namespace fioindex {

class FioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Real function on the circle with its derivative.
struct CircleFunction {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::string name;

  double operator()(double x) const { return f(x); }
  static CircleFunction constant(double c);
  /// Real part of an expression in x (xi is set to 0); derivative from its jet.
  static CircleFunction parse(const std::string& text);
};

/// Orientation-preserving circle diffeomorphism, lifted to R with
/// g(x + 2 pi) = g(x) + 2 pi.
struct CircleDiffeo {
  std::function<double(double)> map;
  std::function<double(double)> derivative;
  /// g^{-1}; if empty, inverse() falls back to safeguarded Newton.
  std::function<double(double)> inverse_map;
  std::string name;

  double operator()(double x) const { return map(x); }
  double inverse(double y) const;

  static CircleDiffeo identity();
  /// x + eps sin(x + phase), |eps| < 1.
  static CircleDiffeo sine(double eps, double phase = 0);
  /// Rigid rotation x + c.
  static CircleDiffeo rotation(double c);
  /// Time-t map of the flow of x' = v(x), by fixed-step RK4 with the
  /// variational equation for the derivative. The inverse integrates backwards.
  static CircleDiffeo flow(const CircleFunction& v, double t = 1, int steps = 256);
};

/// The pair of homogeneous lifts (x, xi) -> (g(x), xi / g'(x)), with g_plus
/// on xi > 0 and g_minus on xi < 0.
struct CanonicalTransformation {
  CircleDiffeo plus = CircleDiffeo::identity();
  CircleDiffeo minus = CircleDiffeo::identity();

  std::pair<double, double> apply(double x, double xi) const;
  std::pair<double, double> inverse(double y, double eta) const;
  /// True iff g_plus and g_minus agree to `tol` on an `n`-point grid.
  bool extends_to_zero_section(int n = 256, double tol = 1e-12) const;
  /// Max |det D(lift) - 1| over a grid; the lift preserves d xi ^ dx iff this vanishes.
  double symplectic_defect(int n = 64) const;
};

/// H = h_plus(x) |xi| on xi > 0 and h_minus(x) |xi| on xi < 0, times chi(xi).
struct HomogeneousHamiltonian {
  CircleFunction h_plus = CircleFunction::constant(0);
  CircleFunction h_minus = CircleFunction::constant(0);

  Symbol symbol() const;
  /// max |H(x, l xi) - l H(x, xi)| over a grid with |xi| >= 1, l in {2, 3.5}.
  double homogeneity_defect() const;
  /// The canonical transformation of exp(Op(i H)): g_plus is the time-1 flow of
  /// x' = -h_plus, g_minus that of x' = +h_minus.
  CanonicalTransformation time_one_map(int steps = 256) const;
};

enum class FioRoute { Clutched, Ode };
std::string route_name(FioRoute r);

struct FourierIntegralOperator {
  OperatorMatrixd matrix;
  CanonicalTransformation canonical;
  Symbol b_plus = Symbol::constant(1);
  Symbol b_minus = Symbol::constant(1);
  FioRoute route = FioRoute::Clutched;

  // Construction diagnostics.
  double unitarization_threshold = 0;  ///< singular values below are treated as kernel
  int ode_steps = 0;                   ///< fixed RK4 steps, ODE route only
  double unitarity_defect = 0;         ///< max |T*T - I| before truncation, ODE route only

  int mode_cut() const { return matrix.mode_cut(); }
  OperatorMatrixd adjoint() const { return matrix.adjoint(); }
};

/// Smallest |b| over an nx x xi grid (ellipticity margin).
double ellipticity_margin(const Symbol& b, int nx = 64);

/// Half-density pullback (U u)(x) = u(g^{-1}(x)) |(g^{-1})'(x)|^{1/2} on modes -K..K.
OperatorMatrixd pullback_matrix(const CircleDiffeo& g, int K, int fft_size = 0);

/// Polar part of a: a (a* a)^{-1/2} on singular values above `threshold`, zero on the rest.
OperatorMatrixd unitarize(const OperatorMatrixd& a, double threshold);

/// Pi_+ U_+ Op(b_+) Pi_+ + Pi_- U_- Op(b_-) Pi_- + P_0, unitarized. Mode 0 is
/// routed through the identity on that mode.
FourierIntegralOperator build_clutched_fio(const CanonicalTransformation& ct, const Symbol& b_plus,
                                           const Symbol& b_minus, int K);

struct OdeOptions {
  /// Step counts are powers of two; the smallest with unitarity defect <= tol is used.
  int min_log2_steps = 4;
  int max_log2_steps = 24;
  double unitarity_tol = 1e-9;
  int flow_steps = 256;
};

/// T(1) for T' = G T, T(0) = I, where G is the skew-adjoint part of Op(i H).
FourierIntegralOperator build_ode_fio(const HomogeneousHamiltonian& H, int K, const OdeOptions& opt = {});

/// Largest entry of I - F*F and I - F F* with max(|j|, |k|) in (k0, window].
struct DefectProfile {
  int k0 = 32;
  int window = 0;
  double outside = 0;  ///< largest entry outside the low-mode block, inside the window
  double inside = 0;   ///< largest entry inside the block
  bool smoothing(double tol = 1e-8) const { return outside <= tol; }
};
DefectProfile defect_profile(const OperatorMatrixd& f, int k0 = 32, int window = -1);
/// Smallest k0 whose profile is below tol inside the window (the window itself if
/// the outermost ring already fails).
int smoothing_block(const OperatorMatrixd& f, double tol = 1e-8, int window = -1);

/// Grid for conjugation checks: x on nx points, xi = +-{2, 2.25, 2.5}. With
/// K = 256 and the default ladder this leaves room for pullbacks up to the
/// sine clutchings with eps = 0.3.
SymbolGrid egorov_grid(int nx = 64);
/// max over x of max(g', 1/g') for both components.
double mode_spread(const CanonicalTransformation& ct, int n = 256);

/// Relative l2 mass beyond mode K of e^{ik g(x)} g'(x)^{1/2}, maximized over
/// both components. This is the stretched side (local frequency k g'); the
/// compressed side k / g' is covered by the edge guard alone.
double pullback_tail(const CanonicalTransformation& ct, int k, int K);
/// Conjugation refuses lattice modes whose pullback tail exceeds this. The
/// hbar^0 error of a conjugation runs at about 200 times the tail.
inline constexpr double kPullbackTailTol = 1e-9;

/// a o phi^{-1}.
Symbol egorov_target(const CanonicalTransformation& ct, const Symbol& a);

/// Expansion of sigma(F Op(a_hbar) F*) at (x, xi/hbar), fitted in hbar.
GridSeries egorov_conjugate(const FourierIntegralOperator& f, const Symbol& a, int N, const SymbolGrid& g,
                            const StarOptions& opt = {});

struct EgorovResidualReport {
  std::vector<double> hbar;
  std::vector<double> sup_residual;  ///< sup |sigma_hbar - a o phi^{-1}| per ladder point
  double slope = 0;                  ///< least-squares slope of log residual against log hbar
  double leading_residual = 0;       ///< sup |hbar^0 coefficient - a o phi^{-1}|
  GridSeries series;
};
EgorovResidualReport egorov_residual(const FourierIntegralOperator& f, const Symbol& a, int N, const SymbolGrid& g,
                                     const StarOptions& opt = {});

struct HomomorphismReport {
  int order = 0;
  std::vector<double> product_defect;     ///< per hbar order: F(a * b) vs F(a) * F(b)
  std::vector<double> commutator_defect;  ///< per hbar order: F([a, b]) vs [F a, F b]
  double bracket_transport = 0;           ///< hbar^1 of F([a, b]) vs (1/i){a, b} o phi^{-1}
  double tol = 1e-5;
  bool pass = false;
};
HomomorphismReport egorov_homomorphism_check(const FourierIntegralOperator& f, const Symbol& a, const Symbol& b,
                                             int N, const SymbolGrid& g, const StarOptions& opt = {});

}  // namespace fioindex
