// Acceptance battery: one PASS/FAIL line per criterion at the pinned
// tolerances and horizons. Checks are computed here from closed forms
// where possible, using the library only for the quantity under test.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "deltasa/deficiency.hpp"

using namespace deltasa;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  std::printf("criterion %2d: %s  %s (%s)\n", id, pass ? "PASS" : "FAIL", what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(double x, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

double log_double_factorial(long m) {
  if (m <= 0) return 0.0;
  const double x = static_cast<double>(m);
  if (m % 2 == 0) return 0.5 * x * std::log(2.0) + std::lgamma(0.5 * x + 1.0);
  const double h = 0.5 * (x - 1.0);
  return std::lgamma(x + 1.0) - h * std::log(2.0) - std::lgamma(h + 1.0);
}

// rho_n for d_n = n^-gamma from the double-factorial form of r~_n
double rho_closed(double gamma, long n) {
  const double x = static_cast<double>(n);
  const double inv = std::pow(x, gamma) + std::pow(x + 1.0, gamma);
  return inv * std::exp(2.0 * gamma * (log_double_factorial(n - 1) - log_double_factorial(n)));
}

// Running supremum of f over [lo, N/2] and [lo, N]; returns its relative
// growth between the two. A shrinking late window leaves the sup unchanged.
double sup_growth(long lo, long n_max, const std::function<double(long)>& f, double* sup_out) {
  double early = 0.0, late = 0.0;
  for (long n = lo; n < n_max / 2; ++n) early = std::max(early, f(n));
  for (long n = n_max / 2; n <= n_max; ++n) late = std::max(late, f(n));
  *sup_out = std::max(early, late);
  return (*sup_out - early) / std::max(early, 1e-300);
}

// ---------------------------------------------------------------------------

void wallis() {
  const auto t0 = Clock::now();
  const auto grid = GridSequence::power_log(1.0, 0.0);
  const double odd = rho(grid, 10001);
  const double even = rho(grid, 10000);
  const double s = seconds_since(t0);
  const bool agree = std::abs(odd - rho_closed(1.0, 10001)) < 1e-9 && std::abs(even - rho_closed(1.0, 10000)) < 1e-9;
  const bool pass = std::abs(odd - std::numbers::pi) < 1e-3 && std::abs(even - 4.0 / std::numbers::pi) < 1e-3 &&
                    agree && s < 1.0;
  report(1, pass, "Wallis parity limits of rho_n, d_n = 1/n",
         "rho(10001) = " + fmt(odd, "%.9f") + ", rho(10000) = " + fmt(even, "%.9f") + ", " + fmt(s, "%.3f") + " s");
}

void lemma_product() {
  bool pass = true;
  std::string detail;
  for (double gamma : {0.6, 0.75, 1.0}) {
    const auto t0 = Clock::now();
    const auto b = check_condition_B(GridSequence::power_log(gamma, 0.0), {10000, 100000, 1000000});
    const double s = seconds_since(t0);
    // the closed form at the horizon gives the same product up to O(n^-1)
    const double closed = rho_closed(gamma, 999999) * rho_closed(gamma, 1000000);
    pass = pass && std::abs(b.product - 4.0) <= 1e-4 && std::abs(closed - 4.0) <= 1e-4 && s < 5.0;
    detail += "gamma " + fmt(gamma) + ": " + fmt(b.product, "%.10f") + " in " + fmt(s, "%.2f") + " s; ";
  }
  report(2, pass, "u_odd * u_even = 4", detail.substr(0, detail.size() - 2));
}

void scaling() {
  const double g = 0.75;
  const long double limit = std::pow(2.0L, 1.0L - g);
  long double sup = 0.0L;
  for (long n = 1000; n <= 100000; ++n) {
    const long double x = n;
    const long double v = (std::pow(x, (long double)g) + std::pow(x + 1, (long double)g)) / std::pow(2 * x + 1, (long double)g);
    sup = std::max(sup, std::fabs(v - limit) * x * x);
  }
  report(3, sup <= 2.0L, "(n^g + (n+1)^g)/(2n+1)^g - 2^(1-g) = O(n^-2), g = 0.75",
         "sup n^2 |diff| = " + fmt(static_cast<double>(sup)));
}

void g_limits() {
  bool pass = true;
  std::string detail;
  for (double eta : {0.6, 0.8, 1.0}) {
    const auto L = verify_G_limits(eta, 1000000);
    pass = pass && std::abs(L.L1 - 0.25) <= 0.01 && std::abs(L.L2 - eta) <= 0.02;
    detail += "eta " + fmt(eta) + ": L1 " + fmt(L.L1, "%.4f") + " L2 " + fmt(L.L2, "%.4f") + "; ";
    if (eta == 1.0) {
      pass = pass && std::abs(L.L3 - 0.25) <= 0.02;
      detail += "L3(1) " + fmt(L.L3, "%.4f") + "; ";
    }
  }
  const auto L = verify_G_limits(0.4, 1000000);
  pass = pass && std::abs(L.L3) <= 0.02;
  detail += "L3(0.4) " + fmt(L.L3, "%.4f");
  report(4, pass, "limits of F on d_n = 1/(n ln^eta n)", detail);
}

void f_bound() {
  bool pass = true;
  std::string detail;
  for (auto [g, e] : {std::pair{0.6, 0.0}, std::pair{0.75, 3.0}, std::pair{1.0, -1.0}}) {
    const auto grid = GridSequence::power_log(g, e);
    double sup = 0.0;
    const double drift = sup_growth(1000, 100000, [&](long n) { return std::abs(F(grid, n)) / grid.gap(n); }, &sup);
    const auto probe = probe_F_over_d(grid, 1000, 100000);
    pass = pass && std::isfinite(sup) && drift < 0.05 && probe.bounded == Tri::True;
    detail += "(" + fmt(g) + "," + fmt(e) + ") sup " + fmt(sup, "%.4f") + " growth " + fmt(drift, "%.2g") + "; ";
  }
  const auto gap = GridSequence::power_log(1.0, 0.5);
  double sup = 0.0;
  const double drift = sup_growth(1000, 100000, [&](long n) { return std::abs(F(gap, n)) / gap.gap(n); }, &sup);
  const auto probe = probe_F_over_d(gap, 1000, 100000);
  pass = pass && probe.growth_detected && drift >= 0.05;
  detail += "(1,0.5) growth " + fmt(drift, "%.2g") + (probe.growth_detected ? " growth detected" : " no growth");
  report(5, pass, "F/d_n bounded in the regular region, growing in the gap", detail);
}

void expansion() {
  const auto grid = GridSequence::power_log(1.0, 1.0);
  // sqrt(1+x) - 1 - x/2 + x^2/8 = x^3 (s+3) / (8 (s+1)^3), s = sqrt(1+x)
  const auto tail = [](long double x) {
    const long double s = std::sqrt(1.0L + x);
    return x * x * x * (s + 3.0L) / (8.0L * (s + 1.0L) * (s + 1.0L) * (s + 1.0L));
  };
  const auto d = [](long double x) { return 1.0L / (x * std::log(x)); };
  const auto scaled = [&](long n) -> double {
    const long double x = n;
    const long double dm = d(x - 1), d0 = d(x), d1 = d(x + 1), d2 = d(x + 2);
    const long double u = (d1 - dm) / (d0 + dm);
    const long double v = (d0 - d2) / (d1 + d2);
    const long double rem = tail(u) / d0 + tail(v) / d1;
    const double size = static_cast<double>(std::fabs(tail(u) / d0) + std::fabs(tail(v) / d1));
    const long double l = std::log(x);
    // the library remainder must agree with the closed form; the two terms
    // cancel near a sign change, so compare against their magnitudes
    const double lib = F_remainder(grid, n, 3);
    if (std::abs(lib - static_cast<double>(rem)) > 1e-6 * size) return std::numeric_limits<double>::infinity();
    return static_cast<double>(std::fabs(rem) * x * x * l * l);
  };
  double sup = 0.0;
  const double drift = sup_growth(1000, 100000, scaled, &sup);
  report(6, std::isfinite(sup) && drift < 0.05, "|F - F_expansion(k=3)| n^2 ln^2 n bounded, d_n = 1/(n ln n)",
         "sup " + fmt(sup, "%.5f") + ", sup growth " + fmt(drift, "%.2g"));
}

void christ_stolz() {
  const auto t0 = Clock::now();
  const JacobiOperator op(GridSequence::power_log(1.0, 0.0), AlphaSequence::scaled_inverse_gaps(-1.0));
  const auto sol = solve_recurrence(op, {0.0, 0.0}, 1000000);
  const auto l2 = l2_probe(sol);
  const double s = seconds_since(t0);
  // own fit of log block mass against block index over the last 6 full blocks
  std::vector<double> mass;
  for (long k = 0;; ++k) {
    const long lo = 1L << k, hi = (1L << (k + 1)) - 1;
    if (hi > 1000000) break;
    double top = -INFINITY;
    for (long n = lo; n <= hi; ++n) top = std::max(top, 2.0 * sol.log_abs(n));
    double acc = 0.0;
    for (long n = lo; n <= hi; ++n) acc += std::exp(2.0 * sol.log_abs(n) - top);
    mass.push_back(top + std::log(acc));
  }
  const std::size_t m = 6, first = mass.size() - m;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = static_cast<double>(i), y = mass[first + i];
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double ratio = std::exp(slope);
  const bool pass = l2.verdict == L2Class::InEll2 && l2.decay_ratio < 0.9 && ratio < 0.9 &&
                    std::abs(ratio - l2.decay_ratio) < 1e-6 && s < 2.0;
  report(7, pass, "alpha_n = -2n-1, lambda = 0 solution in l2",
         std::string(to_string(l2.verdict)) + ", decay ratio " + fmt(l2.decay_ratio, "%.4f") + " (own fit " +
             fmt(ratio, "%.4f") + "), " + fmt(s, "%.2f") + " s");
}

struct Case {
  std::string label;
  double gamma;
  AlphaSequence alpha;
  double a;
  Verdict expect;
  std::string test;
  CriterionVerdict result;
};

std::vector<Case> cases_for(double gamma) {
  const std::string tag = gamma == 1.0 ? "d=1/n" : "gamma=0.75";
  const PowerTerm d{1.0, -gamma, 0.0};
  return {{tag + " a=-1.5", gamma, AlphaSequence::scaled_inverse_gaps(-1.5, {d}), -1.5, Verdict::Deficient,
           kPeriodicGauge, {}},
          {tag + " a=-0.5", gamma, AlphaSequence::scaled_inverse_gaps(-0.5, {d}), -0.5, Verdict::Deficient,
           kPeriodicGauge, {}},
          {tag + " alpha=-d_n", gamma, AlphaSequence::power_terms({{-1.0, -gamma, 0.0}}), 0.0, Verdict::SelfAdjoint,
           kLowerBound, {}},
          {tag + " alpha=-2(1/d_n+1/d_n+1)+d_n", gamma, AlphaSequence::scaled_inverse_gaps(-2.0, {d}), 0.0,
           Verdict::SelfAdjoint, kUpperBound, {}}};
}

std::vector<Case> run_cases() {
  auto cases = cases_for(1.0);
  for (auto& c : cases_for(0.75)) cases.push_back(std::move(c));
  for (double a : {-0.5, 0.5})
    cases.push_back({"gamma=0.75 alpha=a(1/d_n+1/d_n+1) a=" + fmt(a), 0.75, AlphaSequence::scaled_inverse_gaps(a), a,
                     a < 0 ? Verdict::Deficient : Verdict::SelfAdjoint, a < 0 ? kPeriodicGauge : kLowerBound, {}});
  DeficiencyConfig cfg;
  cfg.horizons = {10000, 100000, 1000000};
  cfg.always_run_oracle = true;
  cfg.oracle_horizon = (1L << 17) - 1;
  for (auto& c : cases) c.result = deficiency_verdict(GridSequence::power_log(c.gamma, 0.0), c.alpha, cfg);
  return cases;
}

void phase(const std::vector<Case>& cases) {
  bool pass = true;
  std::string detail;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& c = cases[i];
    const auto& v = c.result;
    bool ok = v.verdict == c.expect && v.certifying_test == c.test && !v.advisory;
    if (c.expect == Verdict::Deficient) {
      const double want = 2.0 * (c.a + 1.0) * (c.a + 1.0) - 1.0;
      ok = ok && v.floquet && std::abs(v.floquet->discriminant - want) < 1e-6;
    }
    pass = pass && ok;
    detail += c.label + ": " + std::string(to_string(v.verdict)) + " via " + v.certifying_test + "; ";
  }
  report(8, pass, "verdicts and Floquet values on d_n = 1/n", detail.substr(0, detail.size() - 2));
}

void oracle(const std::vector<Case>& cases) {
  bool pass = true;
  int agree = 0;
  std::string disagree;
  for (const auto& c : cases) {
    const auto& v = c.result;
    const bool certified = !v.advisory && v.verdict != Verdict::Inconclusive;
    const bool ok = certified && v.oracle_verdict && *v.oracle_verdict == v.verdict;
    if (ok) ++agree;
    else disagree += " " + c.label;
    pass = pass && ok;
  }
  report(10, pass, "oracle at lambda = +-i agrees with certificates",
         std::to_string(agree) + "/" + std::to_string(cases.size()) + " cases agree" +
             (disagree.empty() ? "" : ", disagreeing:" + disagree));
}

void identity() {
  const auto grid = GridSequence::power_log(1.0, 0.0);
  const auto b = check_condition_B(grid, {10000, 100000, 1000000});
  double worst = 0.0;
  double worst_direct = 0.0;
  for (double a : {-1.5, -0.5}) {
    const JacobiOperator op(grid, AlphaSequence::alpha_zero(grid, a, b.u, 1001));
    const TildeSequence tilde(grid, 1002);
    // r~ by its own recursion, in long double
    long double t = 1.0L;
    for (long n = 1; n <= 1000; ++n) {
      const long double t_next = -static_cast<long double>(grid.gap(n + 1)) / t;
      const long double off = -t * t_next / static_cast<long double>(grid.gap(n + 1));
      worst_direct = std::max(worst_direct, static_cast<double>(std::fabs(off - 1.0L)));
      worst = std::max(worst, std::abs(scaled_operator(op, tilde, n).off - 1.0));
      t = t_next;
    }
  }
  report(9, worst < 1e-10 && worst_direct < 1e-10, "scaled off-diagonals equal 1 for n <= 1000",
         "max deviation " + fmt(worst, "%.3g") + " (direct " + fmt(worst_direct, "%.3g") + ")");
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  wallis();
  lemma_product();
  scaling();
  g_limits();
  f_bound();
  expansion();
  christ_stolz();
  const auto cases = run_cases();
  phase(cases);
  identity();
  oracle(cases);
  std::printf("%d failed, %.1f s total\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
