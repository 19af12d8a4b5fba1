#pragma once

#include "fioindex/rational.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

/// Exact model of the Weyl algebra on R^{2n}, its trivial bundle over the
/// phase space, the flat connection and the lifts of Hamiltonian derivations.
///
/// Conventions used throughout: the fiber generators satisfy
/// [xihat_k, xhat_l] = i hbar delta_kl, the Poisson bracket is
/// {f, g} = sum_l d_xi f d_x g - d_x f d_xi g, and elements are stored by their
/// Weyl (fully symmetrized) symbols so the Moyal formula is exact.
namespace fioindex::weyl {

inline constexpr int kMaxDim = 2;
inline constexpr int kDefaultDegreeCap = 8;

class WeylError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Index of a phase-space variable: x_l -> l, xi_l -> kMaxDim + l.
inline constexpr int x_var(int l) { return l; }
inline constexpr int xi_var(int l) { return kMaxDim + l; }

/// Exponents of one monomial base^a hat^b hbar^k.
struct Monomial {
  std::array<std::int8_t, 2 * kMaxDim> base{};
  std::array<std::int8_t, 2 * kMaxDim> hat{};
  int hbar = 0;

  int hat_degree() const;
  int base_degree() const;
  /// Grading: each hat counts 1, hbar counts 2; base variables are weightless.
  int degree() const { return hat_degree() + 2 * hbar; }

  auto operator<=>(const Monomial&) const = default;
};

/// Section of the trivial Weyl bundle with polynomial coefficients. Elements
/// with no base exponents are plain Weyl-algebra elements; elements with no
/// hat exponents are functions (possibly hbar-dependent) on phase space.
class WeylElement {
 public:
  using Terms = std::map<Monomial, Gaussian>;

  explicit WeylElement(int dim = 1, int degree_cap = kDefaultDegreeCap);

  static WeylElement constant(int dim, Gaussian c, int degree_cap = kDefaultDegreeCap);
  static WeylElement xhat(int dim, int l, int degree_cap = kDefaultDegreeCap);
  static WeylElement xihat(int dim, int l, int degree_cap = kDefaultDegreeCap);
  static WeylElement hbar(int dim, int degree_cap = kDefaultDegreeCap);
  static WeylElement base_x(int dim, int l, int degree_cap = kDefaultDegreeCap);
  static WeylElement base_xi(int dim, int l, int degree_cap = kDefaultDegreeCap);
  static WeylElement monomial(int dim, const Monomial& m, Gaussian c, int degree_cap = kDefaultDegreeCap);

  int dim() const { return dim_; }
  int degree_cap() const { return degree_cap_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  /// Adds c * m; terms above the degree cap are dropped.
  void add_term(const Monomial& m, const Gaussian& c);
  Gaussian coefficient(const Monomial& m) const;

  bool hat_free() const;
  int max_degree() const;
  int min_hat_degree() const;
  /// Sets every hat generator to zero.
  WeylElement at_zero_hats() const;
  /// Keeps only terms of degree <= d.
  WeylElement truncated(int d) const;
  WeylElement with_cap(int degree_cap) const;

  std::string str() const;

  friend bool operator==(const WeylElement& a, const WeylElement& b) {
    return a.dim_ == b.dim_ && a.terms_ == b.terms_;
  }

 private:
  int dim_;
  int degree_cap_;
  Terms terms_;
};

WeylElement operator+(const WeylElement& a, const WeylElement& b);
WeylElement operator-(const WeylElement& a, const WeylElement& b);
WeylElement operator-(const WeylElement& a);
WeylElement operator*(const Gaussian& c, const WeylElement& a);

/// Moyal product in the hat variables; base coefficients multiply pointwise.
WeylElement weyl_mul(const WeylElement& a, const WeylElement& b);
inline WeylElement operator*(const WeylElement& a, const WeylElement& b) { return weyl_mul(a, b); }
WeylElement commutator(const WeylElement& a, const WeylElement& b);

/// Multiplies by hbar^p (p may be negative).
WeylElement hbar_shift(const WeylElement& a, int p);
WeylElement base_derivative(const WeylElement& a, int var);
WeylElement hat_derivative(const WeylElement& a, int var);
/// Pointwise (commutative) product; only meaningful when one factor is hat-free.
WeylElement pointwise_mul(const WeylElement& a, const WeylElement& b);

/// Polynomial in commuting (x, xi) with hbar-polynomial coefficients.
class PolynomialHamiltonian {
 public:
  static constexpr int kCap = 64;

  explicit PolynomialHamiltonian(int dim = 1);
  explicit PolynomialHamiltonian(const WeylElement& poly);

  int dim() const { return poly_.dim(); }
  const WeylElement& poly() const { return poly_; }
  PolynomialHamiltonian at_hbar_zero() const;
  int total_degree() const;
  bool is_linear_in_momenta() const;

 private:
  WeylElement poly_;
};

/// Moyal product of Hamiltonians in the base variables, with [xi, x] = i hbar.
PolynomialHamiltonian hamiltonian_star(const PolynomialHamiltonian& h, const PolynomialHamiltonian& k);
/// (1/(i hbar)) (h*k - k*h); its hbar^0 part is the Poisson bracket.
PolynomialHamiltonian star_bracket(const PolynomialHamiltonian& h, const PolynomialHamiltonian& k);
/// Sum_l d^2 H / dx_l dxi_l.
WeylElement mixed_laplacian(const WeylElement& h);

struct HDecomposition {
  WeylElement h0;      ///< H at hbar = 0
  WeylElement h1;      ///< linear Taylor term of H0 in the hats
  WeylElement htilde;  ///< full symmetric Taylor lift of H
};

HDecomposition build_H_decomposition(const PolynomialHamiltonian& h, int degree_cap = kDefaultDegreeCap);

enum class LiftVariant { D, D0 };

/// V + F acting on sections, with V = {H0, .} on base coefficients and F a
/// Weyl-valued function. `apply` is the derivation V(w) + [F, w];
/// `apply_left` is the module action V(w) + F w.
class LiftedDerivation {
 public:
  LiftedDerivation(const PolynomialHamiltonian& h, LiftVariant variant, int degree_cap = kDefaultDegreeCap);

  LiftVariant variant() const { return variant_; }
  const WeylElement& vector_part() const { return h0_; }  ///< generating function of V
  const WeylElement& weyl_part() const { return f_; }
  /// Components V^v of the Hamiltonian vector field, indexed by variable.
  const std::vector<WeylElement>& field() const { return field_; }

  WeylElement vector_apply(const WeylElement& w) const;
  WeylElement apply(const WeylElement& w) const;
  WeylElement apply_left(const WeylElement& w) const;

 private:
  LiftVariant variant_;
  WeylElement h0_;
  WeylElement f_;
  std::vector<WeylElement> field_;
};

LiftedDerivation lift_D(const PolynomialHamiltonian& h, int degree_cap = kDefaultDegreeCap);
LiftedDerivation lift_D0(const PolynomialHamiltonian& h, int degree_cap = kDefaultDegreeCap);

/// One-form with Weyl-valued components, indexed by variable (x_var / xi_var).
using WeylForm = std::array<WeylElement, 2 * kMaxDim>;

/// The flat connection d + A with A = (1/(i hbar)) sum_l (xhat_l dxi_l - xihat_l dx_l).
WeylForm connection_form(int dim, int degree_cap = kDefaultDegreeCap);
/// Action of d + A on a section (left multiplication).
WeylForm connection_apply(const WeylElement& w);

struct FormComponentCheck {
  std::string component;  ///< "dx1", "dxi2", ...
  bool pass = false;
  std::string residual;   ///< empty when exact
};

struct CommutatorCheck {
  LiftVariant variant = LiftVariant::D;
  /// Curvature-level identity L_V A - dF + [F, A] == expected, per component.
  std::vector<FormComponentCheck> form_level;
  /// [D, nabla] w == expected * w on the test element, per component.
  std::vector<FormComponentCheck> on_test;
  bool pass = false;
};

struct FedosovReport {
  int checked_degree = 0;  ///< terms above this degree are not compared
  bool cap_overflow = false;
  CommutatorCheck d0;  ///< expected 0
  CommutatorCheck d;   ///< expected -1/2 d(mixed laplacian of H0)
  bool pass = false;
};

FedosovReport fedosov_connection_check(const PolynomialHamiltonian& h, const WeylElement& test);

struct BracketReport {
  /// [D_H, D_K](w) == D_L(w) with the derivation action.
  bool derivation_pass = false;
  /// Weyl-part defect V_H F_K - V_K F_H + [F_H, F_K] - F_L, and vector-part defect.
  WeylElement weyl_defect;
  bool vector_parts_agree = false;
  bool defect_central = false;  ///< defect is hat-free
  bool lift_level_pass = false; ///< defect vanishes identically
  std::string derivation_residual;
};

/// Random Hamiltonian with 2..5 terms of total degree <= max_deg and small
/// Gaussian-integer coefficients; optionally at most linear in the momenta.
PolynomialHamiltonian random_hamiltonian(std::mt19937& rng, int dim, int max_deg, bool linear_in_momenta = false);
/// Random section with hat degree <= max_deg.
WeylElement random_test_element(std::mt19937& rng, int dim, int max_deg);

BracketReport bracket_identity_check(const PolynomialHamiltonian& h, const PolynomialHamiltonian& k,
                                     const WeylElement& w, LiftVariant variant = LiftVariant::D);

}  // namespace fioindex::weyl
