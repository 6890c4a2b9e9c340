#include "deltasa/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "deltasa/kernels.hpp"

namespace deltasa {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kExpTol = 1e-9;

// n^p ln^q n stays bounded.
bool bounded_order(double p, double q) { return p < -kExpTol || (std::abs(p) <= kExpTol && q <= kExpTol); }

// sqrt(1+x) - 1 without cancellation
double sqrt1pm1(double x) { return x / (1.0 + std::sqrt(1.0 + x)); }

std::optional<std::pair<double, double>> gap_order(const GridSequence& g) {
  if (const auto* p = g.as_power_log()) return std::pair{-p->gamma, -p->eta};
  if (g.as_constant() != nullptr) return std::pair{0.0, 0.0};
  return std::nullopt;
}

double inverse_gap_sum(const GridSequence& g, long n) { return 1.0 / g.gap(n) + 1.0 / g.gap(n + 1); }

// alpha_n + s (1/d_n + 1/d_{n+1}); the inverse-gap part is combined
// symbolically when alpha carries it, so large cancelling terms never meet.
double alpha_shifted(const GridSequence& g, const AlphaSequence& alpha, double s, long n) {
  if (const auto* f = std::get_if<ScaledInverseGaps>(&alpha.family())) {
    const double c = f->a + s;
    double v = c == 0.0 ? 0.0 : c * inverse_gap_sum(g, n);
    for (const auto& t : f->terms) v += t.eval(n);
    if (f->extra) v += f->extra(n);
    return v;
  }
  return alpha.at(g, n) + s * inverse_gap_sum(g, n);
}

void require_increasing(const std::vector<long>& horizons) {
  if (horizons.empty()) throw std::invalid_argument("at least one horizon is required");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] < 1) throw std::invalid_argument("horizons must be >= 1");
    if (i > 0 && horizons[i] <= horizons[i - 1]) throw std::invalid_argument("horizons must be strictly increasing");
  }
}

template <class Term>
void fill_series(SeriesProbe& probe, const std::vector<long>& horizons, const Term& term) {
  require_increasing(horizons);
  double running = 0.0;
  long done = 0;
  for (long h : horizons) {
    running += kernels::sum(done + 1, h, term);
    done = h;
    probe.checkpoints.push_back({h, running});
  }
  const auto blocks = kernels::dyadic_block_sums(horizons.back(), term);
  // the last block may be partial; drop it unless it is the only data
  std::vector<double> full(blocks.begin(), blocks.end());
  if (full.size() > 2 && horizons.back() + 1 < (1L << full.size())) full.pop_back();
  probe.fitted_growth = fit_block_growth(full);
}

// Analytic verdict for a series whose terms are |alpha_n| d_n^3 up to constants.
void classify_cubic_series(SeriesProbe& probe, const GridSequence& grid, const AlphaSequence& alpha) {
  const auto order = gap_order(grid);
  const auto growth = alpha.growth(grid);
  if (!order || !growth) {
    probe.basis = "numerical";
    probe.verdict = SeriesVerdict::Unknown;
    probe.note = "no closed-form growth; trend reported only";
    return;
  }
  probe.basis = "analytic";
  if (growth->zero) {
    probe.verdict = SeriesVerdict::Converges;
    probe.note = "alpha vanishes identically";
    return;
  }
  const double p = growth->n_pow + 3.0 * order->first;
  const double q = growth->ln_pow + 3.0 * order->second;
  probe.term_order = std::pair{p, q};
  probe.verdict = power_log_series_diverges(p, q) ? SeriesVerdict::Diverges : SeriesVerdict::Converges;
}

std::vector<long> sample_indices(long lo, long hi, int count) {
  std::vector<long> out;
  if (hi < lo || count < 1) return out;
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 1.0 : static_cast<double>(i) / (count - 1);
    const long n = lo + static_cast<long>(std::llround(t * static_cast<double>(hi - lo)));
    if (out.empty() || n != out.back()) out.push_back(n);
  }
  return out;
}

// Sup of `f` over sampled indices of [lo, hi].
WindowSup sampled_sup(long lo, long hi, int count, const std::function<double(long)>& f) {
  WindowSup w;
  w.lo = lo;
  w.hi = hi;
  w.sup = -std::numeric_limits<double>::infinity();
  for (long n : sample_indices(lo, hi, count)) {
    const double v = f(n);
    if (v > w.sup || std::isnan(v)) {
      w.sup = v;
      w.argmax = n;
    }
  }
  return w;
}

// Dyadic windows as in dyadic_window_sups, but sampled; for the smooth
// closed-form derivative quantities.
std::vector<WindowSup> sampled_dyadic(long horizon, int count, long floor, int samples,
                                      const std::function<double(long)>& f) {
  std::vector<WindowSup> out;
  for (int j = count - 1; j >= 0; --j) {
    const long hi = horizon >> j;
    const long lo = horizon >> (j + 1);
    if (lo < floor || hi <= lo) continue;
    auto w = sampled_sup(lo, hi, samples, f);
    w.noise = 64.0 * kEps * std::abs(w.sup);
    out.push_back(w);
  }
  return out;
}

// Two sampled windows [N/4, N/2] and [N/2, N] compared for stability.
ConditionOutcome sampled_condition(long horizon, long floor, int count, double drift,
                                   const std::function<double(long)>& f) {
  ConditionOutcome out;
  const long lo = std::max(floor, horizon / 4);
  const long mid = std::max(lo + 1, horizon / 2);
  std::vector<WindowSup> w{sampled_sup(lo, mid, count / 2, f), sampled_sup(mid, horizon, count / 2, f)};
  out.witness = std::max(w[0].sup, w[1].sup);
  if (!std::isfinite(out.witness)) {
    out.numeric = Tri::False;
  } else {
    for (auto& x : w) x.noise = 1e3 * kEps * std::abs(x.sup);
    out.numeric = classify_windows(w, drift);
  }
  return out;
}

void settle(ConditionOutcome& c) { c.holds = c.analytic != Tri::Unknown ? c.analytic : c.numeric; }

BoundProbe bound_probe(std::string test, const GFunction& G, long horizon, const CriteriaOptions& opt,
                       const std::function<double(long)>& constant, const std::function<double(long)>& noise) {
  if (horizon < 1) throw std::invalid_argument("bound probe needs a horizon >= 1");
  BoundProbe out;
  out.test = std::move(test);
  out.g_kind = std::string(to_string(G.kind()));
  const long lo = std::min(horizon, std::max(1L, opt.burn_in));
  const auto ex = kernels::extrema(lo, horizon, constant);
  out.minimal_constant = ex.max;
  out.argmax = ex.argmax;
  out.windows = dyadic_window_sups(horizon, 6, 0, lo, constant, noise);
  if (std::isnan(out.minimal_constant)) {
    out.holds = Tri::Unknown;
    out.trend = "undefined";
    return out;
  }
  out.holds = classify_windows(out.windows, opt.drift);
  if (out.holds == Tri::True)
    out.trend = "stable";
  else if (out.holds == Tri::False)
    out.trend = "growing";
  else
    out.trend = "indeterminate";
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

double expansion_u(const GridSequence& grid, long n) {
  if (n < 2) throw std::domain_error("u(n) needs n >= 2");
  const double p = grid.gap_ratio_m1(n, 1);
  const double m = grid.gap_ratio_m1(n, -1);
  return (p - m) / (2.0 + m);
}

double expansion_v(const GridSequence& grid, long n) {
  if (n < 1) throw std::domain_error("v(n) needs n >= 1");
  const double p = grid.gap_ratio_m1(n, 1);
  const double p2 = grid.gap_ratio_m1(n, 2);
  return -p2 / (2.0 + p + p2);
}

double F(const GridSequence& grid, long n) {
  if (n < 1) throw std::domain_error("F(n) needs n >= 1");
  const double tail = sqrt1pm1(expansion_v(grid, n)) / grid.gap(n + 1);
  if (n == 1) return (grid.r(1) - 1.0) / grid.gap(1) + tail;
  return sqrt1pm1(expansion_u(grid, n)) / grid.gap(n) + tail;
}

double sqrt_taylor_coefficient(int i) {
  if (i < 1) throw std::domain_error("Taylor coefficient index must be >= 1");
  double c = 0.5;
  for (int j = 2; j <= i; ++j) c *= 1.5 / j - 1.0;
  return c;
}

double F_expansion(const GridSequence& grid, long n, int k) {
  if (n < 2) throw std::domain_error("F_expansion needs n >= 2");
  if (k < 2) throw std::domain_error("F_expansion needs k >= 2");
  const double u = expansion_u(grid, n);
  const double v = expansion_v(grid, n);
  double su = 0.0;
  double sv = 0.0;
  for (int i = k - 1; i >= 1; --i) {
    const double c = sqrt_taylor_coefficient(i);
    su = (su + c) * u;
    sv = (sv + c) * v;
  }
  return su / grid.gap(n) + sv / grid.gap(n + 1);
}

double F_remainder(const GridSequence& grid, long n, int k) {
  if (n < 2) throw std::domain_error("F_remainder needs n >= 2");
  if (k < 2) throw std::domain_error("F_remainder needs k >= 2");
  const auto tail = [k](double x) {
    // sqrt(1+x) - 1 - sum_{i<k} C_i x^i; the series tail is summed directly
    // while it converges fast, otherwise the difference is taken
    if (std::abs(x) < 0.25) {
      double term = std::pow(x, k);
      double c = sqrt_taylor_coefficient(k);
      double s = 0.0;
      for (int i = k; i < k + 60; ++i) {
        const double add = c * term;
        s += add;
        if (std::abs(add) <= kEps * std::abs(s)) break;
        c *= 1.5 / (i + 1) - 1.0;
        term *= x;
      }
      return s;
    }
    double head = 0.0;
    for (int i = k - 1; i >= 1; --i) head = (head + sqrt_taylor_coefficient(i)) * x;
    return sqrt1pm1(x) - head;
  };
  return tail(expansion_u(grid, n)) / grid.gap(n) + tail(expansion_v(grid, n)) / grid.gap(n + 1);
}

// ---------------------------------------------------------------------------

double G_nlog(double eta, long n) {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::domain_error("G_nlog needs eta in (0, 1]");
  if (n < 2) throw std::domain_error("G_nlog needs n >= 2");
  const auto x = static_cast<double>(n);
  const double l = std::log(x);
  double g = 0.25 * std::pow(l, eta) / x;
  if (eta > 0.5) g += eta / (x * std::pow(l, 1.0 - eta));
  return g;
}

GFunction GFunction::zero() {
  return GFunction(Kind::Zero, 0.0, [](long) { return 0.0; }, "zero");
}

GFunction GFunction::nlog_eta(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::domain_error("NLogEta needs eta in (0, 1]");
  return GFunction(Kind::NLogEta, eta, [eta](long n) { return n < 2 ? 0.0 : G_nlog(eta, n); },
                   "nlog_eta");
}

GFunction GFunction::of_F(const GridSequence& grid) {
  return GFunction(Kind::Custom, 0.0, [grid](long n) { return F(grid, n); }, "F");
}

GFunction GFunction::custom(std::function<double(long)> eval, std::string label) {
  if (!eval) throw std::invalid_argument("custom G needs an evaluator");
  return GFunction(Kind::Custom, 0.0, std::move(eval), std::move(label));
}

std::string_view to_string(GFunction::Kind k) noexcept {
  switch (k) {
    case GFunction::Kind::Zero: return "zero";
    case GFunction::Kind::NLogEta: return "nlog_eta";
    case GFunction::Kind::Custom: return "custom";
  }
  return "custom";
}

FBoundProbe probe_F_over_d(const GridSequence& grid, long lo, long horizon, const CriteriaOptions& opt) {
  if (lo < 1 || horizon <= lo) throw std::invalid_argument("probe_F_over_d needs 1 <= lo < horizon");
  FBoundProbe out;
  const auto value = [&](long n) { return std::abs(F(grid, n) / grid.gap(n)); };
  // each term of F is about |u|/(2 d_n); rounding hits that scale
  const auto noise = [&](long n) {
    const double scale = n >= 2 ? std::abs(expansion_u(grid, n)) + std::abs(expansion_v(grid, n)) : 1.0;
    return 64.0 * kEps * scale / (grid.gap(n) * grid.gap(n));
  };
  out.windows = dyadic_window_sups(horizon, 8, 0, lo, value, noise);
  out.sup = kernels::extrema(lo, horizon, value).max;
  out.growth_detected = persistent_growth(out.windows);
  out.bounded = classify_windows(out.windows, opt.drift);
  return out;
}

GFunction select_G(const GridSequence& grid, long horizon, const CriteriaOptions& opt) {
  (void)horizon;
  (void)opt;
  if (grid.as_constant() != nullptr) return GFunction::zero();
  if (const auto* p = grid.as_power_log()) {
    const bool f_over_d_bounded =
        p->gamma >= 0.0 && (p->gamma < 1.0 - kExpTol || (std::abs(p->gamma - 1.0) <= kExpTol && p->eta <= 0.0));
    if (f_over_d_bounded) return GFunction::zero();
    if (std::abs(p->gamma - 1.0) <= kExpTol && p->eta > 0.0 && p->eta <= 1.0) return GFunction::nlog_eta(p->eta);
  }
  // F = F + 0 is always a valid decomposition
  return GFunction::of_F(grid);
}

// ---------------------------------------------------------------------------

std::string_view to_string(SeriesVerdict v) noexcept {
  switch (v) {
    case SeriesVerdict::Diverges: return "diverges";
    case SeriesVerdict::Converges: return "converges";
    case SeriesVerdict::Unknown: return "unknown";
  }
  return "unknown";
}

SeriesProbe test_carleman_i(const GridSequence& grid, const AlphaSequence& alpha, const std::vector<long>& horizons,
                            const CriteriaOptions&) {
  SeriesProbe probe;
  probe.test = "carleman_series";
  fill_series(probe, horizons, [&](long n) {
    return std::abs(alpha.at(grid, n)) * grid.gap(n) * grid.gap(n + 1) * grid.r(n - 1) * grid.r(n + 1);
  });
  classify_cubic_series(probe, grid, alpha);
  return probe;
}

SeriesProbe test_condition_I(const GridSequence& grid, const AlphaSequence& alpha, const std::vector<long>& horizons,
                             const CriteriaOptions& opt) {
  SeriesProbe probe;
  probe.test = "cubic_series";
  fill_series(probe, horizons, [&](long n) {
    const double d = grid.gap(n);
    return std::abs(alpha.at(grid, n)) * d * d * d;
  });
  classify_cubic_series(probe, grid, alpha);
  const long h = std::max(10L, horizons.back());
  if (grid.as_constant() == nullptr && grid.as_power_log() == nullptr) {
    const auto stats = ratio_stats(grid, h);
    if (!(stats.min_tail_ratio > opt.ratio_gate_floor)) {
      probe.gate_failed = true;
      probe.note = "lim inf d_{n+1}/d_n > 0 not supported by the tail window";
    }
  }
  return probe;
}

SeriesProbe check_condition_A(const GridSequence& grid, const std::vector<long>& horizons) {
  require_increasing(horizons);
  SeriesProbe probe;
  probe.test = "condition_A";
  const TildeSequence tilde(grid, horizons.back());
  fill_series(probe, horizons, [&](long n) {
    const double r = grid.r(n);
    return std::exp(2.0 * tilde.log_abs(n)) * r * r;
  });
  if (const auto* p = grid.as_power_log()) {
    // r_n^2 ~ 2 d_n and r~_n^2 ~ c d_n, so the terms are of order d_n^2
    probe.basis = "analytic";
    probe.term_order = std::pair{-2.0 * p->gamma, -2.0 * p->eta};
    probe.verdict = power_log_series_diverges(-2.0 * p->gamma, -2.0 * p->eta) ? SeriesVerdict::Diverges
                                                                            : SeriesVerdict::Converges;
  } else if (grid.as_constant() != nullptr) {
    probe.basis = "analytic";
    probe.term_order = std::pair{0.0, 0.0};
    probe.verdict = SeriesVerdict::Diverges;
  } else {
    probe.basis = "numerical";
    probe.verdict = SeriesVerdict::Unknown;
    probe.note = "no closed form; trend reported only";
  }
  return probe;
}

// ---------------------------------------------------------------------------

BoundProbe test_bound_II(const GridSequence& grid, const AlphaSequence& alpha, const GFunction& G, long horizon,
                         const CriteriaOptions& opt) {
  const auto constant = [&](long n) { return (alpha_shifted(grid, alpha, 2.0, n) + G(n)) / grid.gap(n); };
  const auto noise = [&](long n) {
    const double scale = std::abs(alpha.at(grid, n)) + 2.0 * inverse_gap_sum(grid, n) + std::abs(G(n));
    return 64.0 * kEps * scale / grid.gap(n);
  };
  return bound_probe("upper_bound", G, horizon, opt, constant, noise);
}

BoundProbe test_bound_III(const GridSequence& grid, const AlphaSequence& alpha, const GFunction& G, long horizon,
                          const CriteriaOptions& opt) {
  const auto constant = [&](long n) { return (G(n) - alpha.at(grid, n)) / grid.gap(n); };
  const auto noise = [&](long n) {
    return 64.0 * kEps * (std::abs(alpha.at(grid, n)) + std::abs(G(n))) / grid.gap(n);
  };
  return bound_probe("lower_bound", G, horizon, opt, constant, noise);
}

// ---------------------------------------------------------------------------

RatioExpansionCheck check_asymptotic_eq10(const GridSequence& grid, long horizon, const CriteriaOptions& opt) {
  if (horizon < 100) throw std::invalid_argument("the ratio expansion check needs a horizon >= 100");
  RatioExpansionCheck out;
  // least squares for (ratio - 1)/d_n = C + B d_n over [N/2, N]
  const long lo = horizon / 2;
  const auto samples = sample_indices(lo, horizon, 512);
  std::vector<double> t;
  std::vector<double> y;
  for (long n : samples) {
    t.push_back(grid.gap(n));
    y.push_back(grid.gap_ratio_m1(n, 1) / grid.gap(n));
  }
  double spread = 0.0;
  for (double v : t) spread = std::max(spread, std::abs(v - t.front()));
  if (spread > 1e-12 * std::abs(t.front())) {
    const std::vector<double> basis{0.0, 1.0};
    out.C_estimate = fit_power_basis(t, y, basis)[0];
  } else {
    double s = 0.0;
    for (double v : y) s += v;
    out.C_estimate = s / static_cast<double>(y.size());
  }
  const double C = out.C_estimate;
  const auto residual = [&](long n) {
    const double d = grid.gap(n);
    return std::abs((grid.gap_ratio_m1(n, 1) - C * d) / (d * d));
  };
  const auto noise = [&](long n) {
    const double d = grid.gap(n);
    return 64.0 * kEps * (std::abs(grid.gap_ratio_m1(n, 1)) + std::abs(C) * d) / (d * d);
  };
  out.windows = dyadic_window_sups(horizon, 3, 1, std::max(2L, opt.burn_in), residual, noise);
  out.residual_bound = 0.0;
  for (const auto& w : out.windows) out.residual_bound = std::max(out.residual_bound, w.sup);
  out.numeric = classify_windows(out.windows, opt.drift);

  if (grid.as_constant() != nullptr) {
    out.analytic = Tri::True;
  } else if (const auto* p = grid.as_power_log()) {
    const double g = p->gamma;
    const double e = p->eta;
    if (g == 0.0 && e == 0.0) {
      out.analytic = Tri::True;
    } else if (std::abs(g - 1.0) <= kExpTol) {
      // ratio - 1 = -1/n - eta/(n ln n) + O(n^-2) matches C d_n only when eta = 0
      out.analytic = tri(e == 0.0);
    } else if (g > 0.0 && g < 1.0) {
      // C must vanish; the -gamma/n remainder has to be O(d_n^2)
      out.analytic = tri(bounded_order(-1.0 + 2.0 * g, 2.0 * e));
    } else if (g == 0.0) {
      out.analytic = tri(bounded_order(-1.0, -1.0 + 2.0 * e));
    } else {
      out.analytic = Tri::False;
    }
  }
  out.holds = out.analytic != Tri::Unknown ? out.analytic : out.numeric;
  return out;
}

DConditions check_d_conditions(const GridSequence& grid, long horizon, const CriteriaOptions& opt) {
  DConditions out;
  const auto deriv = grid.derivatives();
  if (!deriv) return out;
  out.applicable = true;
  const long floor = std::max({opt.burn_in, deriv->valid_from + 1, 3L});
  if (horizon < 4 * floor) throw std::invalid_argument("horizon too short for the derivative conditions");

  const auto d0 = [&](long n) { return std::abs(grid.gap_ratio_m1(n, 1) / grid.gap(n)); };
  {
    auto w = dyadic_window_sups(horizon, 4, 0, floor, d0,
                                [&](long n) { return 64.0 * kEps * (1.0 + d0(n)); });
    out.d0.witness = w.empty() ? 0.0 : w.back().sup;
    out.d0.numeric = classify_windows(w, opt.drift);
  }
  const int m = std::max(2, opt.shift_samples);
  const auto shift_ratio = [&](const std::function<double(double)>& f) {
    return [&, f](long n) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = 0.0;
      for (int i = 0; i < m; ++i) {
        const double z = -1.0 + 3.0 * i / (m - 1);
        const double v = std::abs(f(static_cast<double>(n) + z));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    };
  };
  out.d1 = sampled_condition(horizon, floor, opt.index_samples, opt.drift, shift_ratio(deriv->d1));
  out.d2 = sampled_condition(horizon, floor, opt.index_samples, opt.drift, shift_ratio(deriv->d2));
  {
    const auto d3 = [&](long n) {
      const auto x = static_cast<double>(n);
      const double dp = deriv->d1(x);
      if (dp == 0.0) return std::numeric_limits<double>::infinity();
      return std::abs(deriv->d2(x) / (dp * grid.gap(n)));
    };
    auto w = sampled_dyadic(horizon, 4, floor, 256, d3);
    out.d3.witness = w.empty() ? 0.0 : w.back().sup;
    out.d3.numeric = std::isfinite(out.d3.witness) ? classify_windows(w, opt.drift) : Tri::False;
  }

  if (grid.as_constant() != nullptr) {
    out.d0.analytic = Tri::True;
    out.d1.analytic = Tri::False;
    out.d2.analytic = Tri::False;
    out.d3.analytic = Tri::False;
  } else if (const auto* p = grid.as_power_log(); p != nullptr && p->gamma >= 0.0) {
    const double g = p->gamma;
    const double e = p->eta;
    const bool flat = g == 0.0 && e == 0.0;
    // (ratio - 1)/d_n ~ n^{gamma-1} ln^eta n, or n^-1 ln^{eta-1} n when gamma = 0
    out.d0.analytic = flat ? Tri::True : tri(g > 0.0 ? bounded_order(g - 1.0, e) : bounded_order(-1.0, e - 1.0));
    out.d1.analytic = tri(!flat);
    out.d2.analytic = tri(!flat);
    // d''/(d' d_n) ~ n^{gamma-1} ln^eta n, or n^-1 ln^eta n when gamma = 0
    out.d3.analytic = flat ? Tri::False : tri(g > 0.0 ? bounded_order(g - 1.0, e) : bounded_order(-1.0, e));
  }
  settle(out.d0);
  settle(out.d1);
  settle(out.d2);
  settle(out.d3);
  return out;
}

D4Result check_d4(const GridSequence& grid, long horizon, const CriteriaOptions& opt) {
  D4Result out;
  const auto deriv = grid.derivatives();
  if (!deriv || grid.as_constant() != nullptr) return out;
  const auto* p = grid.as_power_log();
  if (p != nullptr && p->gamma == 0.0 && p->eta == 0.0) return out;
  out.applicable = true;
  const long floor = std::max({opt.burn_in, deriv->valid_from + 1, 3L});
  for (int k = 1; k <= opt.k_max; ++k) {
    ConditionOutcome c;
    const auto f = [&, k](long n) {
      const double d = grid.gap(n);
      return std::pow(std::abs(deriv->d1(static_cast<double>(n)) / d), k) / (d * d);
    };
    auto w = sampled_dyadic(horizon, 4, floor, 256, f);
    c.witness = w.empty() ? 0.0 : w.back().sup;
    c.numeric = classify_windows(w, opt.drift);
    if (p != nullptr && p->gamma >= 0.0) {
      // |d'/d| ~ n^-1 (gamma > 0) or n^-1 ln^-1 n (gamma = 0); d^2 ~ n^{-2 gamma} ln^{-2 eta}
      const double q_lead = p->gamma > 0.0 ? 0.0 : -static_cast<double>(k);
      c.analytic = tri(bounded_order(-k + 2.0 * p->gamma, q_lead + 2.0 * p->eta));
    }
    settle(c);
    if (!out.k_min && c.holds == Tri::True) out.k_min = k;
    out.per_k.push_back(c);
  }
  out.holds = out.k_min ? Tri::True : Tri::Unknown;
  if (p != nullptr && !out.k_min) out.holds = Tri::False;
  return out;
}

// ---------------------------------------------------------------------------

GLimits verify_G_limits(double eta, long horizon) {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::domain_error("verify_G_limits needs eta in (0, 1]");
  if (horizon < 1000) throw std::invalid_argument("verify_G_limits needs a horizon >= 1000");
  const auto grid = GridSequence::power_log(1.0, eta);
  GLimits out;
  out.eta = eta;
  out.horizon = horizon;

  const auto g_of = [&](long n) {
    const auto x = static_cast<double>(n);
    return x / std::pow(std::log(x), eta) * F(grid, n);
  };
  const auto h_of = [&](double t, double g) { return std::pow(t, -2.0 * eta) * (g - 0.25 - eta * t); };

  constexpr int kSamples = 40;
  const double a = std::log(static_cast<double>(horizon) / 100.0);
  const double b = std::log(static_cast<double>(horizon));
  std::vector<double> t;
  std::vector<double> g;
  std::vector<double> h;
  for (int i = 0; i < kSamples; ++i) {
    const auto n = static_cast<long>(std::llround(std::exp(a + (b - a) * i / (kSamples - 1))));
    const double ti = 1.0 / std::log(static_cast<double>(n));
    const double gi = g_of(n);
    t.push_back(ti);
    g.push_back(gi);
    h.push_back(h_of(ti, gi));
  }
  // g = 1/4 + eta t + c t^2 + ... in t = 1/ln n
  const std::vector<double> eg{0.0, 1.0, 2.0, 3.0, 4.0};
  const auto cg = fit_power_basis(t, g, eg);
  out.L1 = cg[0];
  out.L2 = cg[1];
  // h = t^{-2 eta}(c t^2 + ...) keeps the powers 2 - 2 eta + j
  std::vector<double> eh{0.0};
  if (eta < 1.0) {
    for (int j = 0; j < 4; ++j) eh.push_back(2.0 - 2.0 * eta + j);
  } else {
    eh = {0.0, 1.0, 2.0, 3.0};
  }
  out.L3 = fit_power_basis(t, h, eh)[0];

  const double tN = t.back();
  out.L1_raw = g.back();
  out.L2_raw = (g.back() - 0.25) / tN;
  out.L3_raw = h.back();
  return out;
}

// ---------------------------------------------------------------------------

ConditionB check_condition_B(const GridSequence& grid, const std::vector<long>& horizons,
                             const CriteriaOptions& opt) {
  require_increasing(horizons);
  const long N = horizons.back();
  if (N < 64) throw std::invalid_argument("condition B needs a horizon >= 64");
  ConditionB out;
  const TildeSequence tilde(grid, N + 1);
  const auto rho_at = [&](long n) { return rho(grid, tilde, n); };
  const auto with_parity = [](long n, int parity) { return (n % 2 == parity) ? n : n - 1; };

  const double fallback_order = [&] {
    if (const auto* p = grid.as_power_log(); p != nullptr && p->gamma > 0.0) return 2.0 * p->gamma;
    return 2.0;
  }();
  std::vector<std::string> notes;
  const auto estimate = [&](int parity) {
    const long n1 = with_parity(N, parity);
    const long n2 = with_parity(N / 2, parity);
    const long n0 = with_parity(N / 4, parity);
    const double r1 = rho_at(n1);
    const double r2 = rho_at(n2);
    const double r0 = rho_at(n0);
    const double floor = 1e3 * kEps * std::abs(r1);
    double order = fallback_order;
    const double d21 = r2 - r1;
    const double d02 = r0 - r2;
    if (std::abs(d21) > floor && std::abs(d02) > floor && d21 * d02 > 0.0) {
      const double measured = std::log(d02 / d21) / std::log(2.0);
      if (measured >= 0.5 && measured <= 6.0) order = measured;
    }
    out.residual_order = std::max(out.residual_order, order);
    if (std::abs(d21) <= floor) return r1;
    return richardson(static_cast<double>(n2), r2, static_cast<double>(n1), r1, order);
  };
  out.u.u_odd = estimate(1);
  out.u.u_even = estimate(0);
  out.product = out.u.product();

  const auto residual = [&](long n) {
    const double r = grid.r(n);
    const double scale = r * r * std::exp(2.0 * tilde.log_abs(n));
    return std::abs(rho_at(n) - out.u.at(n)) / scale;
  };
  const auto noise = [&](long n) {
    const double r = grid.r(n);
    return 64.0 * kEps * rho_at(n) / (r * r * std::exp(2.0 * tilde.log_abs(n)));
  };
  out.windows = dyadic_window_sups(N, 4, 3, std::max(2L, opt.burn_in), residual, noise);
  for (const auto& w : out.windows) out.residual_constant = std::max(out.residual_constant, w.sup);
  if (!(std::isfinite(out.u.u_odd) && std::isfinite(out.u.u_even) && out.u.u_odd > 0.0 && out.u.u_even > 0.0)) {
    out.holds = Tri::False;
    out.note = "parity limits of rho_n are not finite and positive";
  } else {
    out.holds = classify_windows(out.windows, opt.drift);
  }
  return out;
}

}  // namespace deltasa
