#include "fioindex/weyl.hpp"

#include <algorithm>
#include <sstream>

namespace fioindex::weyl {

namespace {

using Exps = std::array<std::int8_t, 2 * kMaxDim>;

std::int64_t falling(int n, int k) {
  std::int64_t r = 1;
  for (int i = 0; i < k; ++i) r *= (n - i);
  return r;
}

std::int64_t factorial(int n) { return falling(n, n); }

/// Powers of i/2.
Gaussian half_i_power(int r) {
  Gaussian g(Rational(1, std::int64_t{1} << r));
  switch (r % 4) {
    case 0: return g;
    case 1: return Gaussian::i() * g;
    case 2: return -g;
    default: return -(Gaussian::i() * g);
  }
}

/// Enumerates the Moyal contractions between exponent vectors fa and fb:
/// sum_{gamma, delta} (-1)^|delta| / (gamma! delta!) (d_xi^gamma d_x^delta f)(d_x^gamma d_xi^delta g).
/// `emit(coef, out, r)` receives the rational weight, the result exponents and
/// the total contraction order r.
template <typename Emit>
void moyal_contract(const Exps& fa, const Exps& fb, int dim, Emit&& emit) {
  Exps out{};
  auto rec = [&](auto&& self, int l, Rational coef, int r) -> void {
    if (l == dim) {
      for (int v = 0; v < 2 * kMaxDim; ++v)
        if ((v % kMaxDim) >= dim) out[v] = static_cast<std::int8_t>(fa[v] + fb[v]);
      emit(coef, out, r);
      return;
    }
    const int ax = fa[x_var(l)], axi = fa[xi_var(l)];
    const int bx = fb[x_var(l)], bxi = fb[xi_var(l)];
    for (int g = 0; g <= std::min(axi, bx); ++g) {
      for (int d = 0; d <= std::min(ax, bxi); ++d) {
        const std::int64_t num = falling(axi, g) * falling(bx, g) * falling(ax, d) * falling(bxi, d);
        Rational c = coef * Rational(d % 2 ? -num : num, factorial(g) * factorial(d));
        out[x_var(l)] = static_cast<std::int8_t>(ax - d + bx - g);
        out[xi_var(l)] = static_cast<std::int8_t>(axi - g + bxi - d);
        self(self, l + 1, c, r + g + d);
      }
    }
  };
  rec(rec, 0, Rational(1), 0);
}

void check_dim(const WeylElement& a, const WeylElement& b) {
  if (a.dim() != b.dim()) throw WeylError("dimension mismatch");
}

std::string var_name(int v, bool hat) {
  const int l = v % kMaxDim + 1;
  std::string s = v < kMaxDim ? "x" : "xi";
  if (hat) s += "^";
  return s + std::to_string(l);
}

std::string component_name(int v) {
  return std::string(v < kMaxDim ? "dx" : "dxi") + std::to_string(v % kMaxDim + 1);
}

}  // namespace

int Monomial::hat_degree() const {
  int d = 0;
  for (auto e : hat) d += e;
  return d;
}

int Monomial::base_degree() const {
  int d = 0;
  for (auto e : base) d += e;
  return d;
}

WeylElement::WeylElement(int dim, int degree_cap) : dim_(dim), degree_cap_(degree_cap) {
  if (dim < 1 || dim > kMaxDim) throw WeylError("dimension must be 1.." + std::to_string(kMaxDim));
}

WeylElement WeylElement::constant(int dim, Gaussian c, int cap) {
  return monomial(dim, Monomial{}, c, cap);
}

WeylElement WeylElement::monomial(int dim, const Monomial& m, Gaussian c, int cap) {
  WeylElement e(dim, cap);
  e.add_term(m, c);
  return e;
}

WeylElement WeylElement::xhat(int dim, int l, int cap) {
  Monomial m;
  m.hat[x_var(l)] = 1;
  return monomial(dim, m, 1, cap);
}

WeylElement WeylElement::xihat(int dim, int l, int cap) {
  Monomial m;
  m.hat[xi_var(l)] = 1;
  return monomial(dim, m, 1, cap);
}

WeylElement WeylElement::hbar(int dim, int cap) {
  Monomial m;
  m.hbar = 1;
  return monomial(dim, m, 1, cap);
}

WeylElement WeylElement::base_x(int dim, int l, int cap) {
  Monomial m;
  m.base[x_var(l)] = 1;
  return monomial(dim, m, 1, cap);
}

WeylElement WeylElement::base_xi(int dim, int l, int cap) {
  Monomial m;
  m.base[xi_var(l)] = 1;
  return monomial(dim, m, 1, cap);
}

void WeylElement::add_term(const Monomial& m, const Gaussian& c) {
  if (c.is_zero() || m.degree() > degree_cap_) return;
  for (int v = 0; v < 2 * kMaxDim; ++v)
    if ((m.hat[v] || m.base[v]) && (v % kMaxDim) >= dim_) throw WeylError("variable index beyond dim");
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

Gaussian WeylElement::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? Gaussian() : it->second;
}

bool WeylElement::hat_free() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.first.hat_degree() == 0; });
}

int WeylElement::max_degree() const {
  int d = -1000;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
  return d;
}

int WeylElement::min_hat_degree() const {
  int d = 1000;
  for (const auto& [m, c] : terms_) d = std::min(d, m.hat_degree());
  return d;
}

WeylElement WeylElement::at_zero_hats() const {
  WeylElement r(dim_, degree_cap_);
  for (const auto& [m, c] : terms_)
    if (m.hat_degree() == 0) r.add_term(m, c);
  return r;
}

WeylElement WeylElement::truncated(int d) const {
  WeylElement r(dim_, degree_cap_);
  for (const auto& [m, c] : terms_)
    if (m.degree() <= d) r.add_term(m, c);
  return r;
}

WeylElement WeylElement::with_cap(int cap) const {
  WeylElement r(dim_, cap);
  for (const auto& [m, c] : terms_) r.add_term(m, c);
  return r;
}

std::string WeylElement::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << c.str();
    for (int v = 0; v < 2 * kMaxDim; ++v) {
      if (m.base[v]) os << "*" << var_name(v, false) << (m.base[v] > 1 ? "^" + std::to_string(m.base[v]) : "");
      if (m.hat[v]) os << "*" << var_name(v, true) << (m.hat[v] > 1 ? "^" + std::to_string(m.hat[v]) : "");
    }
    if (m.hbar) os << "*h" << (m.hbar != 1 ? "^" + std::to_string(m.hbar) : "");
  }
  return os.str();
}

WeylElement operator+(const WeylElement& a, const WeylElement& b) {
  check_dim(a, b);
  WeylElement r = a.with_cap(std::min(a.degree_cap(), b.degree_cap()));
  for (const auto& [m, c] : b.terms()) r.add_term(m, c);
  return r;
}

WeylElement operator-(const WeylElement& a) {
  WeylElement r(a.dim(), a.degree_cap());
  for (const auto& [m, c] : a.terms()) r.add_term(m, -c);
  return r;
}

WeylElement operator-(const WeylElement& a, const WeylElement& b) { return a + (-b); }

WeylElement operator*(const Gaussian& s, const WeylElement& a) {
  WeylElement r(a.dim(), a.degree_cap());
  for (const auto& [m, c] : a.terms()) r.add_term(m, s * c);
  return r;
}

WeylElement weyl_mul(const WeylElement& a, const WeylElement& b) {
  check_dim(a, b);
  const int cap = std::min(a.degree_cap(), b.degree_cap());
  WeylElement r(a.dim(), cap);
  for (const auto& [ma, ca] : a.terms()) {
    for (const auto& [mb, cb] : b.terms()) {
      if (ma.degree() + mb.degree() > cap) continue;
      const Gaussian cab = ca * cb;
      Monomial base_part;
      for (int v = 0; v < 2 * kMaxDim; ++v) base_part.base[v] = static_cast<std::int8_t>(ma.base[v] + mb.base[v]);
      moyal_contract(ma.hat, mb.hat, a.dim(), [&](const Rational& w, const Exps& out, int rr) {
        Monomial m = base_part;
        m.hat = out;
        m.hbar = ma.hbar + mb.hbar + rr;
        r.add_term(m, cab * Gaussian(w) * half_i_power(rr));
      });
    }
  }
  return r;
}

WeylElement commutator(const WeylElement& a, const WeylElement& b) { return weyl_mul(a, b) - weyl_mul(b, a); }

WeylElement hbar_shift(const WeylElement& a, int p) {
  WeylElement r(a.dim(), a.degree_cap());
  for (const auto& [key, c] : a.terms()) {
    Monomial m = key;
    m.hbar += p;
    r.add_term(m, c);
  }
  return r;
}

WeylElement base_derivative(const WeylElement& a, int var) {
  WeylElement r(a.dim(), a.degree_cap());
  for (const auto& [key, c] : a.terms()) {
    Monomial m = key;
    const int e = m.base[var];
    if (e == 0) continue;
    m.base[var] = static_cast<std::int8_t>(e - 1);
    r.add_term(m, Gaussian(e) * c);
  }
  return r;
}

WeylElement hat_derivative(const WeylElement& a, int var) {
  WeylElement r(a.dim(), a.degree_cap());
  for (const auto& [key, c] : a.terms()) {
    Monomial m = key;
    const int e = m.hat[var];
    if (e == 0) continue;
    m.hat[var] = static_cast<std::int8_t>(e - 1);
    r.add_term(m, Gaussian(e) * c);
  }
  return r;
}

WeylElement pointwise_mul(const WeylElement& a, const WeylElement& b) {
  check_dim(a, b);
  WeylElement r(a.dim(), std::min(a.degree_cap(), b.degree_cap()));
  for (const auto& [ma, ca] : a.terms()) {
    for (const auto& [mb, cb] : b.terms()) {
      Monomial m;
      for (int v = 0; v < 2 * kMaxDim; ++v) {
        m.base[v] = static_cast<std::int8_t>(ma.base[v] + mb.base[v]);
        m.hat[v] = static_cast<std::int8_t>(ma.hat[v] + mb.hat[v]);
      }
      m.hbar = ma.hbar + mb.hbar;
      r.add_term(m, ca * cb);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Hamiltonians

PolynomialHamiltonian::PolynomialHamiltonian(int dim) : poly_(dim, kCap) {}

PolynomialHamiltonian::PolynomialHamiltonian(const WeylElement& poly) : poly_(poly.with_cap(kCap)) {
  if (!poly.hat_free()) throw WeylError("Hamiltonian must not contain hat generators");
  for (const auto& [m, c] : poly.terms())
    if (m.hbar < 0) throw WeylError("Hamiltonian must be polynomial in hbar");
}

PolynomialHamiltonian PolynomialHamiltonian::at_hbar_zero() const {
  WeylElement r(dim(), kCap);
  for (const auto& [m, c] : poly_.terms())
    if (m.hbar == 0) r.add_term(m, c);
  return PolynomialHamiltonian(r);
}

int PolynomialHamiltonian::total_degree() const {
  int d = 0;
  for (const auto& [m, c] : poly_.terms()) d = std::max(d, m.base_degree());
  return d;
}

bool PolynomialHamiltonian::is_linear_in_momenta() const {
  for (const auto& [m, c] : poly_.terms()) {
    int p = 0;
    for (int l = 0; l < kMaxDim; ++l) p += m.base[xi_var(l)];
    if (p > 1) return false;
  }
  return true;
}

PolynomialHamiltonian hamiltonian_star(const PolynomialHamiltonian& h, const PolynomialHamiltonian& k) {
  check_dim(h.poly(), k.poly());
  WeylElement r(h.dim(), PolynomialHamiltonian::kCap);
  for (const auto& [ma, ca] : h.poly().terms()) {
    for (const auto& [mb, cb] : k.poly().terms()) {
      const Gaussian cab = ca * cb;
      moyal_contract(ma.base, mb.base, h.dim(), [&](const Rational& w, const Exps& out, int rr) {
        Monomial m;
        m.base = out;
        m.hbar = ma.hbar + mb.hbar + rr;
        r.add_term(m, cab * Gaussian(w) * half_i_power(rr));
      });
    }
  }
  return PolynomialHamiltonian(r);
}

PolynomialHamiltonian star_bracket(const PolynomialHamiltonian& h, const PolynomialHamiltonian& k) {
  const WeylElement diff = hamiltonian_star(h, k).poly() - hamiltonian_star(k, h).poly();
  // Every term of the difference carries at least one hbar, so the division is exact.
  const WeylElement q = Gaussian(0, -1) * hbar_shift(diff, -1);
  return PolynomialHamiltonian(q);
}

WeylElement mixed_laplacian(const WeylElement& h) {
  WeylElement r(h.dim(), h.degree_cap());
  for (int l = 0; l < h.dim(); ++l) r = r + base_derivative(base_derivative(h, x_var(l)), xi_var(l));
  return r;
}

HDecomposition build_H_decomposition(const PolynomialHamiltonian& h, int cap) {
  const int n = h.dim();
  HDecomposition out{WeylElement(n, cap), WeylElement(n, cap), WeylElement(n, cap)};
  out.h0 = h.at_hbar_zero().poly().with_cap(cap);
  for (int l = 0; l < n; ++l) {
    out.h1 = out.h1 + pointwise_mul(WeylElement::xhat(n, l, cap), base_derivative(out.h0, x_var(l)));
    out.h1 = out.h1 + pointwise_mul(WeylElement::xihat(n, l, cap), base_derivative(out.h0, xi_var(l)));
  }
  // Taylor lift: d^a(x^e)/a! = binom(e, a) x^{e-a}, split over every variable.
  for (const auto& [m, c] : h.poly().terms()) {
    Exps split{};
    auto rec = [&](auto&& self, int v, Rational coef) -> void {
      if (v == 2 * kMaxDim) {
        Monomial t;
        t.hbar = m.hbar;
        for (int u = 0; u < 2 * kMaxDim; ++u) {
          t.hat[u] = split[u];
          t.base[u] = static_cast<std::int8_t>(m.base[u] - split[u]);
        }
        out.htilde.add_term(t, c * Gaussian(coef));
        return;
      }
      for (int a = 0; a <= m.base[v]; ++a) {
        split[v] = static_cast<std::int8_t>(a);
        self(self, v + 1, coef * Rational(falling(m.base[v], a), factorial(a)));
      }
      split[v] = 0;
    };
    rec(rec, 0, Rational(1));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lifted derivations

LiftedDerivation::LiftedDerivation(const PolynomialHamiltonian& h, LiftVariant variant, int cap)
    : variant_(variant), h0_(h.dim(), cap), f_(h.dim(), cap) {
  const int n = h.dim();
  const HDecomposition dec = build_H_decomposition(h, cap);
  h0_ = dec.h0;
  field_.assign(2 * kMaxDim, WeylElement(n, cap));
  for (int l = 0; l < n; ++l) {
    field_[x_var(l)] = base_derivative(h0_, xi_var(l));
    field_[xi_var(l)] = -base_derivative(h0_, x_var(l));
  }
  // 1/(i hbar) = -i hbar^{-1}
  f_ = Gaussian(0, -1) * hbar_shift(dec.htilde - dec.h0 - dec.h1, -1);
  if (variant == LiftVariant::D) f_ = f_ + Gaussian(Rational(1, 2)) * mixed_laplacian(h0_);
}

WeylElement LiftedDerivation::vector_apply(const WeylElement& w) const {
  WeylElement r(w.dim(), w.degree_cap());
  for (int v = 0; v < 2 * kMaxDim; ++v) {
    if (v % kMaxDim >= w.dim() || field_[v].is_zero()) continue;
    r = r + pointwise_mul(field_[v], base_derivative(w, v));
  }
  return r;
}

WeylElement LiftedDerivation::apply(const WeylElement& w) const { return vector_apply(w) + commutator(f_, w); }

WeylElement LiftedDerivation::apply_left(const WeylElement& w) const { return vector_apply(w) + weyl_mul(f_, w); }

LiftedDerivation lift_D(const PolynomialHamiltonian& h, int cap) { return LiftedDerivation(h, LiftVariant::D, cap); }
LiftedDerivation lift_D0(const PolynomialHamiltonian& h, int cap) { return LiftedDerivation(h, LiftVariant::D0, cap); }

WeylForm connection_form(int dim, int cap) {
  WeylForm a;
  a.fill(WeylElement(dim, cap));
  for (int l = 0; l < dim; ++l) {
    a[x_var(l)] = Gaussian(0, 1) * hbar_shift(WeylElement::xihat(dim, l, cap), -1);
    a[xi_var(l)] = Gaussian(0, -1) * hbar_shift(WeylElement::xhat(dim, l, cap), -1);
  }
  return a;
}

WeylForm connection_apply(const WeylElement& w) {
  const WeylForm a = connection_form(w.dim(), w.degree_cap());
  WeylForm r;
  r.fill(WeylElement(w.dim(), w.degree_cap()));
  for (int v = 0; v < 2 * kMaxDim; ++v) {
    if (v % kMaxDim >= w.dim()) continue;
    r[v] = base_derivative(w, v) + weyl_mul(a[v], w);
  }
  return r;
}

namespace {

/// Lie derivative of a one-form along the Hamiltonian field of `d`, followed by
/// left multiplication with its Weyl part.
WeylForm derivation_on_form(const LiftedDerivation& d, const WeylForm& alpha, int dim) {
  WeylForm r;
  r.fill(WeylElement(dim, alpha[0].degree_cap()));
  for (int j = 0; j < 2 * kMaxDim; ++j) {
    if (j % kMaxDim >= dim) continue;
    WeylElement c = d.apply_left(alpha[j]);
    for (int i = 0; i < 2 * kMaxDim; ++i) {
      if (i % kMaxDim >= dim) continue;
      c = c + pointwise_mul(base_derivative(d.field()[i], j), alpha[i]);
    }
    r[j] = c;
  }
  return r;
}

CommutatorCheck run_commutator_check(const PolynomialHamiltonian& h, LiftVariant variant, const WeylElement& test,
                                     int checked_degree) {
  const int n = h.dim();
  const int cap = test.degree_cap();
  const LiftedDerivation d(h, variant, cap);
  const WeylForm a = connection_form(n, cap);

  WeylForm expected;
  expected.fill(WeylElement(n, cap));
  if (variant == LiftVariant::D) {
    const WeylElement lap = mixed_laplacian(d.vector_part());
    for (int j = 0; j < 2 * kMaxDim; ++j)
      if (j % kMaxDim < n) expected[j] = Gaussian(Rational(-1, 2)) * base_derivative(lap, j);
  }

  CommutatorCheck out;
  out.variant = variant;
  out.pass = true;

  // Curvature-level: L_V A - dF + [F, A].
  for (int j = 0; j < 2 * kMaxDim; ++j) {
    if (j % kMaxDim >= n) continue;
    WeylElement lv = d.vector_apply(a[j]);
    for (int i = 0; i < 2 * kMaxDim; ++i)
      if (i % kMaxDim < n) lv = lv + pointwise_mul(base_derivative(d.field()[i], j), a[i]);
    const WeylElement c = lv - base_derivative(d.weyl_part(), j) + commutator(d.weyl_part(), a[j]);
    const WeylElement diff = (c - expected[j]).truncated(checked_degree);
    FormComponentCheck fc{component_name(j), diff.is_zero(), diff.is_zero() ? "" : diff.str()};
    out.pass = out.pass && fc.pass;
    out.form_level.push_back(fc);
  }

  // On the test element: D(nabla w) - nabla(D w) versus expected * w.
  const WeylForm lhs1 = derivation_on_form(d, connection_apply(test), n);
  const WeylForm lhs2 = connection_apply(d.apply_left(test));
  for (int j = 0; j < 2 * kMaxDim; ++j) {
    if (j % kMaxDim >= n) continue;
    const WeylElement diff = (lhs1[j] - lhs2[j] - pointwise_mul(expected[j], test)).truncated(checked_degree);
    FormComponentCheck fc{component_name(j), diff.is_zero(), diff.is_zero() ? "" : diff.str()};
    out.pass = out.pass && fc.pass;
    out.on_test.push_back(fc);
  }
  return out;
}

}  // namespace

FedosovReport fedosov_connection_check(const PolynomialHamiltonian& h, const WeylElement& test) {
  if (h.dim() != test.dim()) throw WeylError("dimension mismatch");
  FedosovReport rep;
  // The connection lowers degree by one, so the top degree is not reliable.
  rep.checked_degree = test.degree_cap() - 1;
  const LiftedDerivation probe(h, LiftVariant::D, test.degree_cap());
  rep.cap_overflow = !test.is_zero() && !probe.weyl_part().is_zero() &&
                     test.max_degree() + std::max(0, probe.weyl_part().max_degree()) > rep.checked_degree;
  rep.d0 = run_commutator_check(h, LiftVariant::D0, test, rep.checked_degree);
  rep.d = run_commutator_check(h, LiftVariant::D, test, rep.checked_degree);
  rep.pass = rep.d0.pass && rep.d.pass;
  return rep;
}

BracketReport bracket_identity_check(const PolynomialHamiltonian& h, const PolynomialHamiltonian& k,
                                     const WeylElement& w, LiftVariant variant) {
  const int cap = w.degree_cap();
  const PolynomialHamiltonian l = star_bracket(h, k);
  const LiftedDerivation dh(h, variant, cap), dk(k, variant, cap), dl(l, variant, cap);

  BracketReport rep{.weyl_defect = WeylElement(w.dim(), cap), .derivation_residual = {}};
  const WeylElement lhs = dh.apply(dk.apply(w)) - dk.apply(dh.apply(w));
  const WeylElement diff = lhs - dl.apply(w);
  rep.derivation_pass = diff.is_zero();
  rep.derivation_residual = diff.is_zero() ? "" : diff.str();

  rep.vector_parts_agree = true;
  for (int v = 0; v < 2 * kMaxDim; ++v) {
    const WeylElement br = dh.vector_apply(dk.field()[v]) - dk.vector_apply(dh.field()[v]);
    if (!(br - dl.field()[v]).is_zero()) rep.vector_parts_agree = false;
  }
  rep.weyl_defect = dh.vector_apply(dk.weyl_part()) - dk.vector_apply(dh.weyl_part()) +
                    commutator(dh.weyl_part(), dk.weyl_part()) - dl.weyl_part();
  rep.defect_central = rep.weyl_defect.hat_free();
  rep.lift_level_pass = rep.vector_parts_agree && rep.weyl_defect.is_zero();
  return rep;
}

PolynomialHamiltonian random_hamiltonian(std::mt19937& rng, int dim, int max_deg, bool linear_in_momenta) {
  std::uniform_int_distribution<int> coef(-3, 3), nterms(2, 5);
  WeylElement p(dim, PolynomialHamiltonian::kCap);
  const int n = nterms(rng);
  for (int t = 0; t < n; ++t) {
    Monomial m;
    int budget = max_deg;
    for (int v = 0; v < 4; ++v) {
      if (v % kMaxDim >= dim) continue;
      const int cap = (linear_in_momenta && v >= kMaxDim) ? std::min(1, budget) : budget;
      const int k = std::uniform_int_distribution<int>(0, cap)(rng);
      m.base[v] = static_cast<std::int8_t>(k);
      budget -= k;
    }
    if (linear_in_momenta) {
      int p = 0;
      for (int l = 0; l < dim; ++l) p += m.base[xi_var(l)];
      if (p > 1) m.base[xi_var(1)] = 0;
    }
    if (t == 0 && !linear_in_momenta && std::uniform_int_distribution<int>(0, 2)(rng) == 0 && budget >= 2) m.hbar = 1;
    p.add_term(m, Gaussian(Rational(coef(rng)), Rational(coef(rng) % 2)));
  }
  return PolynomialHamiltonian(p);
}

WeylElement random_test_element(std::mt19937& rng, int dim, int max_deg) {
  WeylElement w(dim);
  std::uniform_int_distribution<int> coef(-4, 4), small(0, 2);
  for (int t = 0; t < 4; ++t) {
    Monomial m;
    int deg = 0;
    for (int v = 0; v < 4; ++v) {
      if (v % kMaxDim >= dim) continue;
      m.hat[v] = static_cast<std::int8_t>(small(rng));
      m.base[v] = static_cast<std::int8_t>(small(rng) / 2);
      deg += m.hat[v];
    }
    if (deg > max_deg) continue;
    if (deg + 2 <= max_deg && small(rng) == 0) m.hbar = 1;
    w.add_term(m, Gaussian(Rational(coef(rng)), Rational(coef(rng))));
  }
  return w;
}

}  // namespace fioindex::weyl
