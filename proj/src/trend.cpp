#include "deltasa/trend.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "deltasa/kernels.hpp"

namespace deltasa {

std::vector<WindowSup> dyadic_window_sups(long horizon, int count, int skip, long floor,
                                          const std::function<double(long)>& value,
                                          const std::function<double(long)>& noise) {
  std::vector<WindowSup> out;
  for (int j = skip + count - 1; j >= skip; --j) {
    const long hi = horizon >> j;
    const long lo = horizon >> (j + 1);
    if (lo < floor || lo < 1 || hi <= lo) continue;
    WindowSup w;
    w.lo = lo;
    w.hi = hi;
    const auto ex = kernels::extrema(lo, hi, value);
    w.sup = ex.max;
    w.argmax = ex.argmax;
    if (noise) w.noise = kernels::extrema(lo, hi, noise).max;
    out.push_back(w);
  }
  return out;
}

bool window_stable(const WindowSup& early, const WindowSup& late, double drift) {
  return late.sup <= early.sup + drift * std::abs(early.sup) + late.noise + early.noise;
}

bool window_growing(std::span<const WindowSup> windows, double drift) {
  if (windows.size() < 3) return false;
  for (std::size_t i = 1; i < windows.size(); ++i)
    if (window_stable(windows[i - 1], windows[i], drift)) return false;
  return true;
}

bool persistent_growth(std::span<const WindowSup> windows, int steps, double min_ratio) {
  const auto need = static_cast<std::size_t>(steps) + 1;
  if (steps < 1 || windows.size() < need) return false;
  const std::size_t first = windows.size() - need;
  double previous = 0.0;
  for (std::size_t i = first + 1; i < windows.size(); ++i) {
    const double inc = windows[i].sup - windows[i - 1].sup;
    if (!(inc > windows[i].noise + windows[i - 1].noise)) return false;
    if (i > first + 1 && inc < min_ratio * previous) return false;
    previous = inc;
  }
  return true;
}

Tri classify_windows(std::span<const WindowSup> windows, double drift) {
  if (windows.size() < 2) return Tri::Unknown;
  if (persistent_growth(windows)) return Tri::False;
  if (window_stable(windows[windows.size() - 2], windows.back(), drift)) return Tri::True;
  if (window_growing(windows, drift)) return Tri::False;
  return Tri::Unknown;
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_slope needs >= 2 points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

GrowthFit fit_block_growth(std::span<const double> blocks, int last, double margin) {
  GrowthFit fit;
  std::vector<double> ks;
  std::vector<double> logs;
  const auto n = static_cast<long>(blocks.size());
  for (long k = std::max(0L, n - last); k < n; ++k) {
    if (!(blocks[static_cast<std::size_t>(k)] > 0.0)) continue;
    ks.push_back(static_cast<double>(k));
    logs.push_back(std::log(blocks[static_cast<std::size_t>(k)]));
  }
  if (ks.size() < 2) {
    fit.kind = "bounded";
    fit.block_ratio = 0.0;
    return fit;
  }
  fit.block_ratio = std::exp(fit_slope(ks, logs));
  if (fit.block_ratio < 1.0 - margin) {
    fit.kind = "bounded";
  } else if (fit.block_ratio <= 1.0 + margin) {
    fit.kind = "log-like";
  } else {
    fit.kind = "power-like";
    fit.exponent = std::log2(fit.block_ratio);
  }
  return fit;
}

std::vector<double> fit_power_basis(std::span<const double> t, std::span<const double> y,
                                    std::span<const double> exponents) {
  if (t.size() != y.size() || t.size() < exponents.size())
    throw std::invalid_argument("fit_power_basis needs at least as many samples as basis functions");
  const auto rows = static_cast<Eigen::Index>(t.size());
  const auto cols = static_cast<Eigen::Index>(exponents.size());
  Eigen::MatrixXd a(rows, cols);
  Eigen::VectorXd b(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j)
      a(i, j) = std::pow(t[static_cast<std::size_t>(i)], exponents[static_cast<std::size_t>(j)]);
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  return {c.data(), c.data() + c.size()};
}

double richardson(double n1, double v1, double n2, double v2, double order) {
  const double factor = std::pow(n2 / n1, order);
  return v2 + (v2 - v1) / (factor - 1.0);
}

}  // namespace deltasa
