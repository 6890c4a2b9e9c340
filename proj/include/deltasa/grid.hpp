#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "deltasa/common.hpp"

namespace deltasa {

/// d_n = 1/(n^gamma ln^eta n) for n >= 2, with d_1 a free positive value.
struct PowerLog {
  double gamma = 1.0;
  double eta = 0.0;
  double d1 = 1.0;
};

/// d_n = d for every n.
struct Constant {
  double d = 1.0;
};

/// How an explicit gap list continues past its last element.
enum class TailRule { Periodic, HoldLast };

struct Explicit {
  std::vector<double> gaps;
  TailRule tail = TailRule::Periodic;
};

/// Closed-form d, d', d'' of a smooth generating function d(x) with
/// d_n = d(n) for n >= valid_from.
struct SmoothFamilyDerivatives {
  std::function<double(double)> d;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  long valid_from = 1;
};

/// User-supplied evaluator. Must be pure and safe to call concurrently.
struct Custom {
  std::function<double(long)> gap;
  std::string label = "custom";
  std::optional<SmoothFamilyDerivatives> derivatives;
};

using GridFamily = std::variant<PowerLog, Constant, Explicit, Custom>;

/// Gap sequence d_n > 0 defining the interaction points x_n = d_1 + ... + d_n.
///
/// Evaluation is lazy: nothing is tabulated, so horizons of 10^7 need no
/// storage. Instances are immutable and may be shared across threads.
class GridSequence {
 public:
  explicit GridSequence(GridFamily family, long max_index_hint = 0);

  static GridSequence power_log(double gamma, double eta, double d1 = 1.0);
  static GridSequence constant(double d);
  static GridSequence explicit_gaps(std::vector<double> gaps, TailRule tail = TailRule::Periodic);
  static GridSequence custom(std::function<double(long)> gap, std::string label = "custom",
                             std::optional<SmoothFamilyDerivatives> derivatives = std::nullopt);

  /// d_n; throws std::domain_error for n < 1 or a non-positive custom value.
  [[nodiscard]] double gap(long n) const;
  [[nodiscard]] double log_gap(long n) const;

  /// d_{n+k}/d_n - 1 without cancellation for the smooth families.
  [[nodiscard]] double gap_ratio_m1(long n, long k) const;

  /// r_n = sqrt(d_n + d_{n+1}); r(0) returns the convention value 1.
  [[nodiscard]] double r(long n) const;

  /// x_n with x_0 = 0, by compensated summation of the gaps.
  [[nodiscard]] double x(long n) const;

  [[nodiscard]] std::optional<SmoothFamilyDerivatives> derivatives() const;

  [[nodiscard]] const GridFamily& family() const noexcept { return family_; }
  [[nodiscard]] long max_index_hint() const noexcept { return max_index_hint_; }
  [[nodiscard]] const PowerLog* as_power_log() const noexcept { return std::get_if<PowerLog>(&family_); }
  [[nodiscard]] const Constant* as_constant() const noexcept { return std::get_if<Constant>(&family_); }

  /// True for families whose asymptotics are known in closed form.
  [[nodiscard]] bool is_analytic() const noexcept;

  [[nodiscard]] std::string describe() const;

 private:
  GridFamily family_;
  long max_index_hint_ = 0;
};

struct RatioStats {
  double min_tail_ratio = 0.0;
  double max_tail_ratio = 0.0;
  /// Extrapolated limit of d_{n+1}/d_n.
  double limit_estimate = 0.0;
  /// |ratio(N) - ratio(N/2)|, the tolerance attached to limit_estimate.
  double tolerance = 0.0;
  /// True when the window spread is below the requested limit tolerance.
  bool limit_exists = false;
  long window_lo = 0;
  long window_hi = 0;
};

/// inf/sup of d_{n+1}/d_n over the tail window [N/2, N]. Requires N >= 10.
RatioStats ratio_stats(const GridSequence& seq, long horizon, double limit_tol = 1e-2);

struct Summability {
  Tri in_ell1 = Tri::Unknown;
  Tri in_ell2 = Tri::Unknown;
  /// "analytic" for closed-form families, "numerical" otherwise.
  std::string basis;
  /// Numerical diagnostics: (N, sum_{n<=N} d_n) and (N, sum_{n<=N} d_n^2) at N = 2^k.
  std::vector<std::pair<long, double>> ell1_partial;
  std::vector<std::pair<long, double>> ell2_partial;
};

Summability classify_summability(const GridSequence& seq, long diagnostic_horizon = 1L << 20);

/// True iff sum n^p ln^q n diverges.
bool power_log_series_diverges(double p, double q) noexcept;

}  // namespace deltasa
