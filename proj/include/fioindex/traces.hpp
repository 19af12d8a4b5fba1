#pragma once

#include "fioindex/fio.hpp"
#include "fioindex/formal_series.hpp"
#include "fioindex/operator_matrix.hpp"

#include <optional>
#include <random>
#include <stdexcept>
#include <string>

namespace fioindex {

class MembershipError : public std::runtime_error {
 public:
  MembershipError(const std::string& what, double defect) : std::runtime_error(what), defect_(defect) {}
  double defect() const { return defect_; }

 private:
  double defect_;
};

/// Normalization of the canonical trace: Tr Op(a_hbar) ~ (c / hbar) int a dx dxi.
inline constexpr double kCanonicalTraceConstant = 0.15915494309189535;  // 1 / (2 pi)

/// Traces are taken over modes |k| <= window; the default window is K / 2,
/// which keeps truncation artefacts near the mode cut out of every trace.
struct TraceOptions {
  int window = -1;
  int k0 = 32;        ///< low-mode block for the membership test
  double tol = 1e-6;  ///< membership tolerance outside the block
  bool check = true;

  int resolved_window(int K) const { return window < 0 ? K / 2 : window; }
};

/// (A, B) with A - F* B F smoothing, coupled through the FIO matrix F.
struct TracePair {
  OperatorMatrixd A;
  OperatorMatrixd B;
  OperatorMatrixd F;

  int mode_cut() const { return A.mode_cut(); }
  /// Largest entry of A - F* B F with max(|j|, |k|) in (k0, window].
  double membership_defect(const TraceOptions& opt = {}) const;

  friend TracePair operator*(const TracePair& p, const TracePair& q);
  friend TracePair operator+(const TracePair& p, const TracePair& q);
  friend TracePair operator-(const TracePair& p, const TracePair& q);
  friend TracePair operator*(cplx s, const TracePair& p);
};

TracePair commutator(const TracePair& p, const TracePair& q);
/// Frobenius norm of the pair, used to scale commutator tolerances.
double pair_norm(const TracePair& p);

/// tau(A, B) = Tr_W(A - F* B F) - Tr_W(B (I - F F*)).
cplx regularized_trace(const TracePair& p, const TraceOptions& opt = {});

/// Random matrix supported on |j|, |k| <= block with spectral norm `norm`.
OperatorMatrixd random_smoothing(int K, double norm, std::mt19937_64& rng, int block = 8);

/// (F* B F + S, B) for B = Op(b) of a random symbol and S random smoothing.
TracePair random_trace_pair(const OperatorMatrixd& F, std::mt19937_64& rng, int bandwidth = 2);

struct IndexReport {
  cplx tau_id = 0;
  long nearest_integer = 0;
  double integrality_gap = 0;
  std::string route;
  int window = 0;
  std::optional<long> topological_prediction;
  bool match = false;

  /// Sets the prediction and recomputes `match`.
  void attach_prediction(long prediction, double tol = 1e-6);
};

/// Ind F = tau(Id, Id); the gap to the nearest integer is reported.
IndexReport analytic_index(const OperatorMatrixd& f, const TraceOptions& opt = {});
IndexReport analytic_index(const FourierIntegralOperator& f, const TraceOptions& opt = {});

/// Laurent expansion of hbar -> tau(Op(a_hbar), Op(b_hbar)) through F, with min power -1.
struct CanonicalTraceResult {
  FormalSeries<cplx> series;
  std::vector<double> membership;  ///< membership defect per ladder point
  double residual = 0;
  double condition = 0;
};

struct CanonicalTraceOptions {
  std::vector<double> hbar_ladder = default_hbar_ladder();
  TraceOptions trace;
  ExtrapolationOptions fit;
  int jobs = 1;
};

/// `pair(hbar)` returns the pair realized at hbar; the fit runs on hbar * tau.
CanonicalTraceResult tau_can(const std::function<TracePair(double)>& pair, int N,
                             const CanonicalTraceOptions& opt = {});
/// The pair (Op(a_hbar), Op(b_hbar)) through F.
CanonicalTraceResult tau_can(const OperatorMatrixd& F, const Symbol& a, const Symbol& b, int N,
                             const CanonicalTraceOptions& opt = {});

struct ResidueResult {
  double value = 0;      ///< real part of the residue
  cplx complex_value = 0;
  double fit_residual = 0;
  cplx plus = 0;   ///< coefficient of |k|^{-1} on k > 0
  cplx minus = 0;  ///< coefficient of |k|^{-1} on k < 0
};

struct ResidueOptions {
  double order = 0;     ///< classical order of the operator (highest fitted power)
  int lowest_power = -8;
  int guard = 16;       ///< modes skipped next to the mode cut
  int first_mode = -1;  ///< lowest fitted |k|; -1 means K / 4
  double max_fit_residual = 1e-6;
};

/// Wodzicki residue: the |k|^{-1} coefficients of the diagonal P(k, k) on both
/// rays, fitted over first_mode <= |k| <= K - guard, summed. Op((1 + xi^2)^{-1/2}) gives 2.
/// Rounding in the diagonal is amplified by the fit; commutators of order-one
/// operators need long double products to resolve 1e-6 at K = 256.
/// Instantiated for double and long double.
template <typename Scalar>
ResidueResult wodzicki_residue(const OperatorMatrix<Scalar>& p, const ResidueOptions& opt = {});

struct TraceSpaceReport {
  double tau_commutator = 0;      ///< max |tau([p, q])| over the sampled pairs
  double residue_commutator = 0;  ///< |Res([A, B])|
  cplx compact_tau = 0;           ///< leading tau_can coefficient for a compactly supported symbol
  double compact_residue = 0;     ///< its residue, expected 0
  cplx tail_tau = 0;              ///< tau of the pair (Op(chi/<xi>), same) through F = Id
  double tail_residue = 0;        ///< its residue, expected nonzero
  double tau1_identity = 0;       ///< Res(Id)
  bool traces_vanish_on_commutators = false;
  bool independent = false;
};

TraceSpaceReport trace_space_probe(const OperatorMatrixd& F, std::mt19937_64& rng, int pairs = 5);

}  // namespace fioindex
