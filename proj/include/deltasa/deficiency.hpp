#pragma once

// Deficiency indices of B_{X,alpha}: the periodic-gauge test built on
// conditions (A)/(B) and the Floquet discriminant, and a numerical oracle
// that integrates (B - lambda) h = 0 forward and inspects the l2 tail.
//
// The forward recurrence with h_1 = 1 spans the only candidate solution
// once the first row fixes h_2, so the oracle can report at most one l2
// direction per lambda; n_+- <= 1 holds by construction.

#include <chrono>
#include <complex>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "deltasa/criteria.hpp"
#include "deltasa/grid.hpp"
#include "deltasa/jacobi.hpp"

namespace deltasa {

using cplx = std::complex<double>;

/// Stored values from index `start` on are the true values times 2^-exponent.
struct ScaleSegment {
  long start = 1;
  int exponent = 0;
};

struct RecurrenceSolution {
  cplx lambda{0.0, 0.0};
  /// Stored (scaled) values, element n-1 holds h_n.
  std::vector<cplx> values;
  std::vector<ScaleSegment> segments{ScaleSegment{}};
  /// log of sum |h_n|^2 over block k = [2^k, 2^{k+1}) clipped to [1, N].
  std::vector<double> log_block_mass;

  [[nodiscard]] long size() const noexcept { return static_cast<long>(values.size()); }
  /// Exponent e with h_n = stored(n) * 2^e.
  [[nodiscard]] int scale_exponent(long n) const;
  [[nodiscard]] cplx stored(long n) const { return values.at(static_cast<std::size_t>(n - 1)); }
  /// log|h_n|; finite even where h_n itself would overflow.
  [[nodiscard]] double log_abs(long n) const;
  /// h_n in true scale (may overflow to inf).
  [[nodiscard]] cplx value(long n) const;
  /// Number of blocks [2^k, 2^{k+1}) lying entirely inside [1, N].
  [[nodiscard]] long full_blocks() const noexcept;

  /// Wraps a synthetic sequence (scale 0 everywhere).
  static RecurrenceSolution from_values(std::vector<cplx> values, cplx lambda = {0.0, 0.0});
};

/// Forward recurrence for (B - lambda) h = 0 with h_1 = 1, up to index N.
/// Values are rescaled by 2^-+100 when they leave [2^-100, 2^100].
RecurrenceSolution solve_recurrence(const JacobiOperator& op, cplx lambda, long n);

/// CSV with columns n, re, im, log2_scale (stored values and their exponent).
void write_solution_csv(std::ostream& os, const RecurrenceSolution& sol, long stride = 1);

enum class ResidualNorm {
  /// |row| / (|b_{n-1} h_{n-1}| + |(a_n - lambda) h_n| + |b_n h_{n+1}|)
  TermMagnitudes,
  /// |row| / (|h_{n-1}| + |h_n| + |h_{n+1}|)
  Values,
};

struct RowResidual {
  double max = 0.0;
  long argmax = 0;
};

/// Relative residual of the rows n in [1, N-1]. Neighbours stored in a
/// different segment are brought to a common scale exactly (powers of two).
RowResidual row_residual(const JacobiOperator& op, const RecurrenceSolution& sol,
                         ResidualNorm norm = ResidualNorm::TermMagnitudes);

/// Per-row relative residual (TermMagnitudes), row n at element n-1.
std::vector<double> row_residuals(const JacobiOperator& op, const RecurrenceSolution& sol);

struct L2Options {
  double margin = 0.1;
  int fit_blocks = 6;
  int min_blocks = 8;
};

enum class L2Class { InEll2, NotInEll2, Unknown };
std::string_view to_string(L2Class c) noexcept;

struct L2Verdict {
  std::vector<double> log_block_norms;
  /// Block-to-block mass ratio from a log-linear fit over the last full blocks.
  double decay_ratio = 0.0;
  L2Class verdict = L2Class::Unknown;
  int blocks_used = 0;
};

L2Verdict l2_probe(const RecurrenceSolution& sol, const L2Options& opt = {});

struct FloquetResult {
  PeriodPair u;
  double a = 0.0;
  double lambda = 0.0;
  double discriminant = 0.0;
};

/// (1/2)(-2 + (lambda - (a+1) u_odd)(lambda - (a+1) u_even)).
double floquet_discriminant(const PeriodPair& u, double a, double lambda);
FloquetResult floquet(const PeriodPair& u, double a, double lambda);

// ---------------------------------------------------------------------------

enum class Verdict { SelfAdjoint, Deficient, Inconclusive };
std::string_view to_string(Verdict v) noexcept;

/// Certificate identifiers. Oracle outcomes use kNumericalAdvisory.
inline constexpr const char* kOffDiagonalCarleman = "carleman_offdiagonal";
inline constexpr const char* kCarlemanSeries = "carleman_series";
inline constexpr const char* kCubicSeries = "cubic_series";
inline constexpr const char* kUpperBound = "upper_bound";
inline constexpr const char* kLowerBound = "lower_bound";
inline constexpr const char* kPeriodicGauge = "periodic_gauge";
inline constexpr const char* kNumericalAdvisory = "numerical-advisory";
inline constexpr const char* kInconclusive = "inconclusive";

struct DeficiencyConfig {
  std::vector<long> horizons{10000, 100000, 1000000};
  /// Recurrence length for the oracle; 0 means horizons.back().
  long oracle_horizon = 0;
  std::vector<cplx> oracle_lambdas{cplx{0.0, 1.0}, cplx{0.0, -1.0}};
  /// Run the oracle even when a certificate was found.
  bool always_run_oracle = false;
  double floquet_margin = 1e-6;
  double ratio_limit_tol = 1e-2;
  /// Tolerance on u_odd u_even = 4 before the gauge path is trusted.
  double lemma_product_tol = 1e-3;
  CriteriaOptions criteria;
  L2Options l2;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct OracleRun {
  cplx lambda;
  L2Verdict l2;
  RowResidual residual;
};

/// Off-diagonal Carleman series sum 1/|b_n| = sum r_n r_{n+1} d_{n+1}.
SeriesProbe test_offdiagonal_carleman(const GridSequence& grid, const std::vector<long>& horizons);

struct CriterionVerdict {
  Verdict verdict = Verdict::Inconclusive;
  std::string certifying_test = kInconclusive;
  /// True when the verdict rests only on the numerical oracle.
  bool advisory = false;
  std::string reason;

  Summability summability;
  std::optional<RatioStats> ratio;
  std::optional<SeriesProbe> offdiagonal;
  std::optional<SeriesProbe> carleman;
  std::optional<SeriesProbe> cubic;
  std::optional<std::string> g_kind;
  std::optional<BoundProbe> upper;
  std::optional<BoundProbe> lower;
  std::optional<SeriesProbe> condition_A;
  std::optional<ConditionB> condition_B;
  std::optional<FloquetResult> floquet;
  std::vector<OracleRun> oracle;
  /// Verdict the oracle alone would give, when it ran.
  std::optional<Verdict> oracle_verdict;
  std::vector<StageTiming> timings;
  std::vector<std::string> notes;
};

CriterionVerdict deficiency_verdict(const GridSequence& grid, const AlphaSequence& alpha,
                                    const DeficiencyConfig& config = {});

}  // namespace deltasa
