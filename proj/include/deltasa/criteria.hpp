#pragma once

// Sufficient conditions for self-adjointness of B_{X,alpha}, the regularity
// conditions on the gap sequence that feed them, and the conditions on the
// auxiliary sequence r~ used by the deficiency test.
//
// Two kinds of answer are produced. For the closed-form grid families
// (power-log and constant) together with alpha sequences of known growth,
// divergence and boundedness are decided analytically by exponent
// comparison. Everything else is probed numerically over dyadic tail
// windows and reported as a trend; a numerical probe never upgrades itself
// to a certificate.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "deltasa/common.hpp"
#include "deltasa/grid.hpp"
#include "deltasa/jacobi.hpp"
#include "deltasa/trend.hpp"

namespace deltasa {

struct CriteriaOptions {
  /// Relative growth between consecutive tail windows still counted as stable.
  double drift = 0.05;
  /// Indices below this are pre-asymptotic and skipped by bound probes.
  long burn_in = 16;
  /// Largest exponent scanned when looking for the Taylor order k.
  int k_max = 8;
  /// Sample points per n on [-1, 2] for derivative-ratio suprema.
  int shift_samples = 13;
  /// Number of tail indices sampled for derivative-ratio suprema.
  int index_samples = 64;
  /// lim inf d_{n+1}/d_n is treated as positive when the tail minimum exceeds this.
  double ratio_gate_floor = 1e-3;
};

// ---------------------------------------------------------------------------
// F and its expansion

/// F(n) = (r_n/r_{n-1} - 1)/d_n + (r_n/r_{n+1} - 1)/d_{n+1}, with r_0 = 1.
double F(const GridSequence& grid, long n);

/// u(n) = (d_{n+1} - d_{n-1})/(d_n + d_{n-1}); requires n >= 2.
double expansion_u(const GridSequence& grid, long n);
/// v(n) = (d_n - d_{n+2})/(d_{n+1} + d_{n+2}).
double expansion_v(const GridSequence& grid, long n);

/// Coefficient C_i of sqrt(1+x) = 1 + sum_i C_i x^i.
double sqrt_taylor_coefficient(int i);

/// Truncated Taylor form of F using the first k-1 coefficients.
double F_expansion(const GridSequence& grid, long n, int k);

/// F(n) - F_expansion(n, k), summed from the Taylor tails of sqrt(1+u) and
/// sqrt(1+v) so the small difference is not lost to cancellation.
double F_remainder(const GridSequence& grid, long n, int k);

// ---------------------------------------------------------------------------
// The leading part G of F = G + O(d_n)

/// (1/4) ln^eta n / n, plus eta/(n ln^{1-eta} n) when eta > 1/2.
/// Domain: eta in (0, 1], n >= 2.
double G_nlog(double eta, long n);

class GFunction {
 public:
  enum class Kind { Zero, NLogEta, Custom };

  static GFunction zero();
  static GFunction nlog_eta(double eta);
  /// G = F itself; always a valid choice.
  static GFunction of_F(const GridSequence& grid);
  static GFunction custom(std::function<double(long)> eval, std::string label);

  [[nodiscard]] double operator()(long n) const { return eval_(n); }
  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] double eta() const noexcept { return eta_; }
  [[nodiscard]] const std::string& label() const noexcept { return label_; }

 private:
  GFunction(Kind kind, double eta, std::function<double(long)> eval, std::string label)
      : kind_(kind), eta_(eta), eval_(std::move(eval)), label_(std::move(label)) {}

  Kind kind_;
  double eta_ = 0.0;
  std::function<double(long)> eval_;
  std::string label_;
};

std::string_view to_string(GFunction::Kind k) noexcept;

/// Zero when F/d_n is bounded, the log-correction form for the
/// d_n = 1/(n ln^eta n) family, and F itself otherwise.
GFunction select_G(const GridSequence& grid, long horizon = 100000, const CriteriaOptions& opt = {});

/// Windowed suprema of F(n)/d_n over dyadic windows ending at `horizon`.
struct FBoundProbe {
  std::vector<WindowSup> windows;
  double sup = 0.0;
  Tri bounded = Tri::Unknown;
  /// Window sups keep rising by a non-shrinking amount.
  bool growth_detected = false;
};

FBoundProbe probe_F_over_d(const GridSequence& grid, long lo, long horizon, const CriteriaOptions& opt = {});

// ---------------------------------------------------------------------------
// Series tests

enum class SeriesVerdict { Diverges, Converges, Unknown };
std::string_view to_string(SeriesVerdict v) noexcept;

struct Checkpoint {
  long horizon = 0;
  double partial_sum = 0.0;
};

struct SeriesProbe {
  std::string test;
  std::vector<Checkpoint> checkpoints;
  GrowthFit fitted_growth;
  SeriesVerdict verdict = SeriesVerdict::Unknown;
  /// "analytic" (exponent comparison) or "numerical" (trend only).
  std::string basis;
  /// n^p ln^q n order of the terms when known analytically.
  std::optional<std::pair<double, double>> term_order;
  bool gate_failed = false;
  std::string note;

  /// Diverges on an applicable grid; implies self-adjointness.
  [[nodiscard]] bool certifies() const noexcept { return verdict == SeriesVerdict::Diverges && !gate_failed; }
};

/// Partial sums of |alpha_n| d_n d_{n+1} r_{n-1} r_{n+1}.
SeriesProbe test_carleman_i(const GridSequence& grid, const AlphaSequence& alpha, const std::vector<long>& horizons,
                            const CriteriaOptions& opt = {});

/// Partial sums of |alpha_n| d_n^3, gated on lim inf d_{n+1}/d_n > 0.
SeriesProbe test_condition_I(const GridSequence& grid, const AlphaSequence& alpha, const std::vector<long>& horizons,
                             const CriteriaOptions& opt = {});

/// Partial sums of (r_n r~_n)^2.
SeriesProbe check_condition_A(const GridSequence& grid, const std::vector<long>& horizons);

// ---------------------------------------------------------------------------
// Bound tests

struct BoundProbe {
  std::string test;
  std::string g_kind;
  std::vector<WindowSup> windows;
  /// sup over burn_in <= n <= N of the per-n constant.
  double minimal_constant = 0.0;
  long argmax = 0;
  std::string trend;
  Tri holds = Tri::Unknown;
};

/// Per-n constant (alpha_n + 2/d_n + 2/d_{n+1} + G(n)) / d_n.
BoundProbe test_bound_II(const GridSequence& grid, const AlphaSequence& alpha, const GFunction& G, long horizon,
                         const CriteriaOptions& opt = {});

/// Per-n constant (G(n) - alpha_n) / d_n.
BoundProbe test_bound_III(const GridSequence& grid, const AlphaSequence& alpha, const GFunction& G, long horizon,
                          const CriteriaOptions& opt = {});

// ---------------------------------------------------------------------------
// Regularity of the gap sequence

/// d_{n+1}/d_n = 1 + C d_n + O(d_n^2).
struct RatioExpansionCheck {
  double C_estimate = 0.0;
  double residual_bound = 0.0;
  std::vector<WindowSup> windows;
  Tri numeric = Tri::Unknown;
  Tri analytic = Tri::Unknown;
  Tri holds = Tri::Unknown;
};

RatioExpansionCheck check_asymptotic_eq10(const GridSequence& grid, long horizon, const CriteriaOptions& opt = {});

struct ConditionOutcome {
  Tri holds = Tri::Unknown;
  Tri analytic = Tri::Unknown;
  Tri numeric = Tri::Unknown;
  /// Largest sampled value of the quantity that must stay bounded.
  double witness = 0.0;
};

struct DConditions {
  bool applicable = false;
  ConditionOutcome d0;
  ConditionOutcome d1;
  ConditionOutcome d2;
  ConditionOutcome d3;
  [[nodiscard]] bool all_hold() const noexcept {
    return d0.holds == Tri::True && d1.holds == Tri::True && d2.holds == Tri::True && d3.holds == Tri::True;
  }
};

/// Ratio regularity (d0), bounded shifts of d' (d1) and d'' (d2), and
/// d''/d' = O(d_n) (d3).
DConditions check_d_conditions(const GridSequence& grid, long horizon, const CriteriaOptions& opt = {});

struct D4Result {
  bool applicable = false;
  std::optional<int> k_min;
  Tri holds = Tri::Unknown;
  /// Window sups of |d'/d|^k / d^2 per scanned k (index k-1).
  std::vector<ConditionOutcome> per_k;
};

/// Smallest k with |d'(n)/d_n|^k = O(d_n^2).
D4Result check_d4(const GridSequence& grid, long horizon, const CriteriaOptions& opt = {});

// ---------------------------------------------------------------------------
// Limits for the d_n = 1/(n ln^eta n) family

struct GLimits {
  double eta = 0.0;
  long horizon = 0;
  /// lim (n / ln^eta n) F(n)
  double L1 = 0.0;
  /// lim n ln^{1-eta} n (F - ln^eta n / (4n))
  double L2 = 0.0;
  /// lim n ln^eta n (F - ln^eta n / (4n) - eta / (n ln^{1-eta} n))
  double L3 = 0.0;
  /// The three quantities evaluated at the horizon, before extrapolation.
  double L1_raw = 0.0;
  double L2_raw = 0.0;
  double L3_raw = 0.0;
};

/// Extrapolates the three limits in t = 1/ln n from samples on [N/100, N].
GLimits verify_G_limits(double eta, long horizon);

// ---------------------------------------------------------------------------
// Period-2 asymptotics of rho_n

struct ConditionB {
  PeriodPair u;
  double product = 0.0;
  /// Estimated order p in rho_n - u_n ~ n^{-p}.
  double residual_order = 0.0;
  /// sup |rho_n - u_n| / (r_n r~_n)^2 over the residual windows.
  double residual_constant = 0.0;
  std::vector<WindowSup> windows;
  Tri holds = Tri::Unknown;
  std::string note;
};

ConditionB check_condition_B(const GridSequence& grid, const std::vector<long>& horizons,
                             const CriteriaOptions& opt = {});

}  // namespace deltasa
