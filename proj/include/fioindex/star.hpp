#pragma once

#include "fioindex/formal_series.hpp"
#include "fioindex/operator_matrix.hpp"
#include "fioindex/symbol.hpp"

#include <stdexcept>
#include <vector>

namespace fioindex {

class ModeCutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StarOptions {
  int K = 256;
  std::vector<double> hbar_ladder = default_hbar_ladder();
  /// Lattice points closer than this to the mode cut are refused.
  int edge_guard = 16;
  int jobs = 1;
  ExtrapolationOptions fit;
};

using GridSeries = ExtrapolationResult<GridFunction>;

/// The verification grid used by the star-product checks: 128 points in x and
/// xi in (1/4)Z on [-2.5, 2.5], so xi/hbar is an integer on the whole ladder.
SymbolGrid default_star_grid();

/// Lattice modes xi/hbar for every grid column; throws if any is not an integer
/// or falls within `edge_guard` of the mode cut.
std::vector<int> lattice_columns(const SymbolGrid& g, double hbar, int K, int edge_guard);

/// Expansion of sigma(Op(a_hbar) Op(b_hbar)) evaluated at (x, xi/hbar), fitted in hbar.
GridSeries star_numeric(const Symbol& a, const Symbol& b, int N, const SymbolGrid& g, const StarOptions& opt = {});
/// Same for the triple product Op(a_hbar) Op(b_hbar) Op(c_hbar).
GridSeries star_numeric_triple(const Symbol& a, const Symbol& b, const Symbol& c, int N, const SymbolGrid& g,
                               const StarOptions& opt = {});

/// (1/i)^n / n! d_xi^n a d_x^n b: the n-th bidifferential coefficient for
/// the left quantization.
Symbol star_coefficient_symbol(const Symbol& a, const Symbol& b, int n);
/// Star product of two symbol-valued series, truncated at order N.
std::vector<Symbol> star_series(const std::vector<Symbol>& a, const std::vector<Symbol>& b, int N);
FormalSeries<GridFunction> star_analytic(const Symbol& a, const Symbol& b, int N, const SymbolGrid& g);

/// Grid samples of each bidifferential coefficient A^(n)(f, g).
struct StarCoefficient {
  SymbolGrid grid;
  std::vector<GridFunction> terms;
};

StarCoefficient star_coefficients(const Symbol& f, const Symbol& g, int N, const SymbolGrid& grid);
/// xi on +-{1, sqrt2, 2, ...} up to 2^12: shells for growth and boundary checks.
SymbolGrid shell_grid(int nx = 32);

struct BoundaryOrderReport {
  int order = 0;
  double sup = 0;                    ///< over |xi| >= cutoff radius
  std::vector<double> shell_sups;    ///< sup over each |xi| value, increasing |xi|
  bool non_increasing = false;
  bool ray_converges = false;
  double last_ray_increment = 0;
  double measured_order = 0;         ///< log-log slope of shell sups at the outer end
};

struct BoundaryExtensionReport {
  std::vector<BoundaryOrderReport> orders;
  bool pass = false;
};

/// Checks that the coefficients of order-zero inputs stay bounded, do not grow
/// towards the boundary and converge along each ray.
BoundaryExtensionReport boundary_extension_check(const StarCoefficient& coeffs, double cutoff_radius = 1.0);

}  // namespace fioindex
