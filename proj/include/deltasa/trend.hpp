#pragma once

// Finite-horizon proxies for asymptotic statements: window suprema,
// growth classification of partial sums, and tail extrapolation.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "deltasa/common.hpp"

namespace deltasa {

struct WindowSup {
  long lo = 0;
  long hi = 0;
  double sup = 0.0;
  long argmax = 0;
  /// Rounding-noise scale of the sampled quantity inside the window.
  double noise = 0.0;
};

/// Dyadic windows [N/2^{j+1}, N/2^j] for j = skip .. skip+count-1, returned
/// from the earliest to the latest. Windows reaching below `floor` are dropped.
std::vector<WindowSup> dyadic_window_sups(long horizon, int count, int skip, long floor,
                                          const std::function<double(long)>& value,
                                          const std::function<double(long)>& noise = nullptr);

/// `late` stays within `drift` (relative) of `early`, allowing rounding noise.
bool window_stable(const WindowSup& early, const WindowSup& late, double drift);

/// True when each consecutive window sup grows by more than `drift`.
bool window_growing(std::span<const WindowSup> windows, double drift);

/// The last `steps` increments between window sups are all positive (above
/// noise) and do not shrink faster than `min_ratio` per window. Catches
/// logarithmic growth that a relative drift threshold misses.
bool persistent_growth(std::span<const WindowSup> windows, int steps = 3, double min_ratio = 0.9);

/// Persistent or uniform growth -> False; stable over the last pair -> True.
Tri classify_windows(std::span<const WindowSup> windows, double drift);

/// Shape of a partial-sum sequence read off dyadic block sums.
struct GrowthFit {
  /// "bounded", "log-like" or "power-like"
  std::string kind;
  /// Block-to-block ratio from a log-linear fit over the last blocks.
  double block_ratio = 0.0;
  /// For power-like growth, S_N ~ N^exponent.
  double exponent = 0.0;
};

/// Classifies nonnegative block sums (block k covers [2^k, 2^{k+1})).
GrowthFit fit_block_growth(std::span<const double> blocks, int last = 4, double margin = 0.1);

/// Least-squares fit y ~ sum_j c_j t^{e_j}; returns the coefficients c.
std::vector<double> fit_power_basis(std::span<const double> t, std::span<const double> y,
                                    std::span<const double> exponents);

/// One Richardson step for values at n1 < n2 with error ~ n^{-order}.
double richardson(double n1, double v1, double n2, double v2, double order);

/// Slope of the least-squares line through (x_i, y_i).
double fit_slope(std::span<const double> x, std::span<const double> y);

}  // namespace deltasa
