#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "deltasa/grid.hpp"

namespace deltasa {

/// coef * n^n_pow * ln^ln_pow(n). At n = 1 a nonzero ln_pow yields 0 for
/// positive powers and is treated as 1 for negative ones (ln 1 = 0).
struct PowerTerm {
  double coef = 0.0;
  double n_pow = 0.0;
  double ln_pow = 0.0;

  [[nodiscard]] double eval(long n) const;
};

/// Period-2 sequence stored by parity: u_n = u_odd for odd n, u_even for even n.
struct PeriodPair {
  double u_odd = 0.0;
  double u_even = 0.0;

  [[nodiscard]] double at(long n) const noexcept { return (n % 2 != 0) ? u_odd : u_even; }
  [[nodiscard]] double product() const noexcept { return u_odd * u_even; }
};

/// Leading-order behaviour |alpha_n| ~ c n^p ln^q n, or identically zero.
struct GrowthOrder {
  bool zero = false;
  double coef = 0.0;
  double n_pow = 0.0;
  double ln_pow = 0.0;
};

class TildeSequence;

/// alpha_n = a (1/d_n + 1/d_{n+1}) + sum of power terms + optional extra.
struct ScaledInverseGaps {
  double a = 0.0;
  std::vector<PowerTerm> terms;
  /// Optional opaque perturbation; `extra_is_O_d` declares it O(d_n).
  std::function<double(long)> extra;
  bool extra_is_O_d = false;
};

struct ExplicitAlpha {
  std::vector<double> values;
  TailRule tail = TailRule::HoldLast;
};

struct CustomAlpha {
  std::function<double(long)> value;
  std::string label = "custom";
};

/// alpha0_n = -(1/d_n + 1/d_{n+1}) + (a+1) u_n / rtilde_n^2 on a fixed grid.
struct AlphaZero {
  double a = 0.0;
  PeriodPair u;
  std::shared_ptr<const TildeSequence> tilde;
};

using AlphaFamily = std::variant<ScaledInverseGaps, ExplicitAlpha, CustomAlpha, AlphaZero>;

/// Interaction strengths alpha_n.
class AlphaSequence {
 public:
  explicit AlphaSequence(AlphaFamily family);

  static AlphaSequence zero();
  static AlphaSequence scaled_inverse_gaps(double a, std::vector<PowerTerm> terms = {});
  static AlphaSequence power_terms(std::vector<PowerTerm> terms);
  static AlphaSequence explicit_values(std::vector<double> values, TailRule tail = TailRule::HoldLast);
  static AlphaSequence custom(std::function<double(long)> value, std::string label = "custom");
  /// Builds the r~ table for `grid` up to `horizon + 1`.
  static AlphaSequence alpha_zero(const GridSequence& grid, double a, PeriodPair u, long horizon);

  [[nodiscard]] double at(const GridSequence& grid, long n) const;

  [[nodiscard]] const AlphaFamily& family() const noexcept { return family_; }

  /// Coefficient a when the sequence is a (1/d_n + 1/d_{n+1}) + perturbation.
  [[nodiscard]] std::optional<double> inverse_gap_scale() const;

  /// Whether alpha_n - a (1/d_n + 1/d_{n+1}) is O(d_n) on `grid`.
  [[nodiscard]] Tri perturbation_is_O_d(const GridSequence& grid) const;

  /// Leading growth on an analytic grid; nullopt when not decidable.
  [[nodiscard]] std::optional<GrowthOrder> growth(const GridSequence& grid) const;

  [[nodiscard]] std::string describe() const;

 private:
  AlphaFamily family_;
};

/// r~_1 = 1, r~_{n+1} = -d_{n+1}/r~_n, stored as log|r~_n| with the sign
/// (-1)^{n-1} implied. Built once by the two-step form of the recursion,
/// r~_{n+1} = (d_{n+1}/d_n) r~_{n-1}; immutable afterwards.
class TildeSequence {
 public:
  TildeSequence(const GridSequence& grid, long horizon);

  [[nodiscard]] long size() const noexcept { return static_cast<long>(log_abs_.size()); }
  [[nodiscard]] int sign(long n) const noexcept { return (n % 2 != 0) ? 1 : -1; }
  [[nodiscard]] double log_abs(long n) const;
  [[nodiscard]] double value(long n) const;

 private:
  std::vector<double> log_abs_;  // index n-1
};

/// log|r~_n| from the closed alternating product, summed independently of
/// the recursion: log|r~_n| = sum_{k=2}^{n} (-1)^{n-k} log d_k.
double tilde_log_abs_closed_form(const GridSequence& grid, long n);

/// rho_n = (1/d_n + 1/d_{n+1}) r~_n^2, evaluated in log space.
double rho(const GridSequence& grid, const TildeSequence& tilde, long n);
double rho(const GridSequence& grid, long n);

double alpha_zero(const GridSequence& grid, const TildeSequence& tilde, double a, const PeriodPair& u, long n);

/// Entry-wise view of B_{X,alpha}.
class JacobiOperator {
 public:
  JacobiOperator(GridSequence grid, AlphaSequence alpha)
      : grid_(std::move(grid)), alpha_(std::move(alpha)) {}

  /// r_n^{-2} (alpha_n + 1/d_n + 1/d_{n+1})
  [[nodiscard]] double diag(long n) const;
  /// -r_n^{-1} r_{n+1}^{-1} d_{n+1}^{-1}, the (n, n+1) entry.
  [[nodiscard]] double off(long n) const;
  [[nodiscard]] double entry(long i, long j) const;

  [[nodiscard]] const GridSequence& grid() const noexcept { return grid_; }
  [[nodiscard]] const AlphaSequence& alpha() const noexcept { return alpha_; }

 private:
  GridSequence grid_;
  AlphaSequence alpha_;
};

/// Row-major dense N x N matrix.
struct DenseMatrix {
  long size = 0;
  std::vector<double> data;

  [[nodiscard]] double operator()(long i, long j) const {
    return data[static_cast<std::size_t>(i * size + j)];
  }
};

/// Principal N x N section (0-based storage of 1-based rows).
DenseMatrix truncate(const JacobiOperator& op, long n);

/// Writes "row,col,value" lines (1-based) for the nonzero entries.
void write_section_csv(std::ostream& os, const DenseMatrix& m);

struct ScaledEntries {
  double diag = 0.0;
  double off = 0.0;
};

/// n-th diagonal and (n, n+1) entries of R~ R B R R~ with R = diag(r_n) and
/// R~ = diag(r~_n).
ScaledEntries scaled_operator(const JacobiOperator& op, const TildeSequence& tilde, long n);

}  // namespace deltasa
