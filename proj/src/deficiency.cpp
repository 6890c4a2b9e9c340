#include "deltasa/deficiency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "deltasa/kernels.hpp"
#include "deltasa/trend.hpp"

namespace deltasa {
namespace {

constexpr int kGuardExponent = 100;
constexpr double kLn2 = 0.69314718055994530942;
const double kUpper = std::ldexp(1.0, kGuardExponent);
const double kLower = std::ldexp(1.0, -kGuardExponent);

double magnitude(cplx z) { return std::max(std::abs(z.real()), std::abs(z.imag())); }

cplx shift(cplx z, int e) { return {std::ldexp(z.real(), e), std::ldexp(z.imag(), e)}; }

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

void compute_block_masses(RecurrenceSolution& sol) {
  const long n_max = sol.size();
  sol.log_block_mass.clear();
  std::size_t seg = 0;
  for (long start = 1; start <= n_max; start *= 2) {
    const long stop = std::min(n_max, 2 * start - 1);
    double log_mass = -std::numeric_limits<double>::infinity();
    long n = start;
    while (n <= stop) {
      while (seg + 1 < sol.segments.size() && sol.segments[seg + 1].start <= n) ++seg;
      const long piece_end =
          seg + 1 < sol.segments.size() ? std::min(stop, sol.segments[seg + 1].start - 1) : stop;
      kernels::CompensatedSum acc;
      for (long m = n; m <= piece_end; ++m) acc.add(std::norm(sol.values[static_cast<std::size_t>(m - 1)]));
      const double s = acc.value();
      if (s > 0.0) log_mass = log_add(log_mass, std::log(s) + 2.0 * sol.segments[seg].exponent * kLn2);
      n = piece_end + 1;
    }
    sol.log_block_mass.push_back(log_mass);
  }
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

int RecurrenceSolution::scale_exponent(long n) const {
  if (n < 1 || n > size()) throw std::out_of_range("solution index " + std::to_string(n) + " out of range");
  auto it = std::upper_bound(segments.begin(), segments.end(), n,
                             [](long v, const ScaleSegment& s) { return v < s.start; });
  return std::prev(it)->exponent;
}

double RecurrenceSolution::log_abs(long n) const {
  return std::log(std::abs(stored(n))) + scale_exponent(n) * kLn2;
}

cplx RecurrenceSolution::value(long n) const { return shift(stored(n), scale_exponent(n)); }

long RecurrenceSolution::full_blocks() const noexcept {
  long k = 0;
  while ((2L << k) - 1 <= size()) ++k;
  return k;
}

RecurrenceSolution RecurrenceSolution::from_values(std::vector<cplx> values, cplx lambda) {
  RecurrenceSolution sol;
  sol.lambda = lambda;
  sol.values = std::move(values);
  compute_block_masses(sol);
  return sol;
}

RecurrenceSolution solve_recurrence(const JacobiOperator& op, cplx lambda, long n) {
  if (n < 2) throw std::invalid_argument("the recurrence needs N >= 2");
  const auto diag = kernels::tabulate(1, n, [&](long k) { return op.diag(k); });
  const auto off = kernels::tabulate(1, n - 1, [&](long k) { return op.off(k); });
  const auto a = [&](long k) { return diag[static_cast<std::size_t>(k - 1)]; };
  const auto b = [&](long k) { return off[static_cast<std::size_t>(k - 1)]; };

  RecurrenceSolution sol;
  sol.lambda = lambda;
  try {
    sol.values.resize(static_cast<std::size_t>(n));
  } catch (const std::bad_alloc&) {
    throw ResourceError("cannot store a solution of length " + std::to_string(n));
  }
  auto& h = sol.values;
  h[0] = 1.0;
  h[1] = -(a(1) - lambda) * h[0] / b(1);
  int exponent = 0;
  for (long k = 1; k <= n - 1; ++k) {
    // h[k] holds h_{k+1}; compute h_{k+2} from row k+1 unless at the end
    if (k + 1 <= n - 1) {
      const long row = k + 1;
      h[static_cast<std::size_t>(k + 1)] =
          -(b(row - 1) * h[static_cast<std::size_t>(k - 1)] + (a(row) - lambda) * h[static_cast<std::size_t>(k)]) /
          b(row);
    }
    const auto cur = static_cast<std::size_t>(std::min(k + 1, n - 1));
    const auto prev = cur - 1;
    const double big = std::max(magnitude(h[prev]), magnitude(h[cur]));
    int step = 0;
    if (big > kUpper) step = -kGuardExponent;
    else if (big < kLower && big > 0.0) step = kGuardExponent;
    if (step != 0) {
      h[prev] = shift(h[prev], step);
      h[cur] = shift(h[cur], step);
      exponent -= step;
      const long start = static_cast<long>(prev) + 1;
      if (sol.segments.back().start == start)
        sol.segments.back().exponent = exponent;
      else
        sol.segments.push_back({start, exponent});
    }
    if (!std::isfinite(h[cur].real()) || !std::isfinite(h[cur].imag()))
      throw std::runtime_error("recurrence overflowed at n = " + std::to_string(cur + 1));
  }
  compute_block_masses(sol);
  return sol;
}

void write_solution_csv(std::ostream& os, const RecurrenceSolution& sol, long stride) {
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  const auto old = os.precision(17);
  os << "n,re,im,log2_scale\n";
  for (long n = 1; n <= sol.size(); n += stride) {
    const cplx z = sol.stored(n);
    os << n << ',' << z.real() << ',' << z.imag() << ',' << sol.scale_exponent(n) << '\n';
  }
  os.precision(old);
}

namespace {

double residual_at(const JacobiOperator& op, const RecurrenceSolution& sol, long n, ResidualNorm norm) {
  const int e = sol.scale_exponent(n);
  const auto at = [&](long m) { return shift(sol.stored(m), sol.scale_exponent(m) - e); };
  const cplx hn = at(n);
  const cplx hp = at(n + 1);
  const cplx t1 = (op.diag(n) - sol.lambda) * hn;
  const cplx t2 = op.off(n) * hp;
  cplx t0{0.0, 0.0};
  cplx hm{0.0, 0.0};
  if (n >= 2) {
    hm = at(n - 1);
    t0 = op.off(n - 1) * hm;
  }
  const double row = std::abs(t0 + t1 + t2);
  const double scale = norm == ResidualNorm::TermMagnitudes ? std::abs(t0) + std::abs(t1) + std::abs(t2)
                                                            : std::abs(hm) + std::abs(hn) + std::abs(hp);
  return scale > 0.0 ? row / scale : row;
}

}  // namespace

RowResidual row_residual(const JacobiOperator& op, const RecurrenceSolution& sol, ResidualNorm norm) {
  RowResidual out;
  if (sol.size() < 2) return out;
  const auto ex = kernels::extrema(1, sol.size() - 1, [&](long n) { return residual_at(op, sol, n, norm); });
  out.max = ex.max;
  out.argmax = ex.argmax;
  return out;
}

std::vector<double> row_residuals(const JacobiOperator& op, const RecurrenceSolution& sol) {
  if (sol.size() < 2) return {};
  return kernels::tabulate(1, sol.size() - 1,
                           [&](long n) { return residual_at(op, sol, n, ResidualNorm::TermMagnitudes); });
}

std::string_view to_string(L2Class c) noexcept {
  switch (c) {
    case L2Class::InEll2: return "in_ell2";
    case L2Class::NotInEll2: return "not_in_ell2";
    case L2Class::Unknown: return "unknown";
  }
  return "unknown";
}

L2Verdict l2_probe(const RecurrenceSolution& sol, const L2Options& opt) {
  L2Verdict out;
  out.log_block_norms = sol.log_block_mass;
  const long full = sol.full_blocks();
  if (full < opt.min_blocks || opt.fit_blocks < 2) return out;
  const long first = full - opt.fit_blocks;
  std::vector<double> ks;
  std::vector<double> ys;
  bool vanished = false;
  for (long k = first; k < full; ++k) {
    const double y = sol.log_block_mass[static_cast<std::size_t>(k)];
    if (!std::isfinite(y)) {
      vanished = true;
      continue;
    }
    ks.push_back(static_cast<double>(k));
    ys.push_back(y);
  }
  out.blocks_used = static_cast<int>(ks.size());
  if (vanished && !std::isfinite(sol.log_block_mass[static_cast<std::size_t>(full - 1)])) {
    out.decay_ratio = 0.0;
    out.verdict = L2Class::InEll2;
    return out;
  }
  if (ks.size() < 2) return out;
  out.decay_ratio = std::exp(fit_slope(ks, ys));
  if (out.decay_ratio < 1.0 - opt.margin)
    out.verdict = L2Class::InEll2;
  else if (out.decay_ratio > 1.0 + opt.margin)
    out.verdict = L2Class::NotInEll2;
  return out;
}

double floquet_discriminant(const PeriodPair& u, double a, double lambda) {
  return 0.5 * (-2.0 + (lambda - (a + 1.0) * u.u_odd) * (lambda - (a + 1.0) * u.u_even));
}

FloquetResult floquet(const PeriodPair& u, double a, double lambda) {
  return {u, a, lambda, floquet_discriminant(u, a, lambda)};
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::SelfAdjoint: return "SelfAdjoint";
    case Verdict::Deficient: return "Deficient";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

SeriesProbe test_offdiagonal_carleman(const GridSequence& grid, const std::vector<long>& horizons) {
  if (horizons.empty()) throw std::invalid_argument("at least one horizon is required");
  SeriesProbe probe;
  probe.test = kOffDiagonalCarleman;
  const auto term = [&](long n) { return grid.r(n) * grid.r(n + 1) * grid.gap(n + 1); };
  double running = 0.0;
  long done = 0;
  for (long h : horizons) {
    if (h <= done) throw std::invalid_argument("horizons must be strictly increasing");
    running += kernels::sum(done + 1, h, term);
    done = h;
    probe.checkpoints.push_back({h, running});
  }
  auto blocks = kernels::dyadic_block_sums(horizons.back(), term);
  if (blocks.size() > 2 && horizons.back() + 1 < (1L << blocks.size())) blocks.pop_back();
  probe.fitted_growth = fit_block_growth(blocks);
  if (const auto* p = grid.as_power_log()) {
    // r_n r_{n+1} d_{n+1} ~ 2 d_n^2
    probe.basis = "analytic";
    probe.term_order = std::pair{-2.0 * p->gamma, -2.0 * p->eta};
    probe.verdict = power_log_series_diverges(-2.0 * p->gamma, -2.0 * p->eta) ? SeriesVerdict::Diverges
                                                                            : SeriesVerdict::Converges;
  } else if (grid.as_constant() != nullptr || std::holds_alternative<Explicit>(grid.family())) {
    // eventually periodic positive terms
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

CriterionVerdict deficiency_verdict(const GridSequence& grid, const AlphaSequence& alpha,
                                    const DeficiencyConfig& config) {
  const auto& H = config.horizons;
  if (H.empty()) throw std::invalid_argument("at least one horizon is required");
  for (std::size_t i = 1; i < H.size(); ++i)
    if (H[i] <= H[i - 1]) throw std::invalid_argument("horizons must be strictly increasing");
  const long N = H.back();
  if (N < 64) throw std::invalid_argument("the verdict pipeline needs a horizon >= 64");

  CriterionVerdict v;
  const auto stage = [&](const char* name, auto&& fn) {
    const auto t0 = Clock::now();
    fn();
    v.timings.push_back({name, seconds_since(t0)});
  };
  const auto certify = [&](bool ok, const char* id, std::string reason) {
    if (ok && v.verdict == Verdict::Inconclusive && v.certifying_test == kInconclusive) {
      v.verdict = Verdict::SelfAdjoint;
      v.certifying_test = id;
      v.reason = std::move(reason);
    }
  };

  stage("grid", [&] {
    v.summability = classify_summability(grid);
    v.ratio = ratio_stats(grid, N, config.ratio_limit_tol);
  });

  // 1. self-adjointness certificates, in a fixed order
  stage("offdiagonal_carleman", [&] {
    v.offdiagonal = test_offdiagonal_carleman(grid, H);
    certify(v.offdiagonal->certifies(), kOffDiagonalCarleman, "sum of 1/|b_n| diverges");
  });
  stage("carleman_series", [&] {
    v.carleman = test_carleman_i(grid, alpha, H, config.criteria);
    certify(v.carleman->certifies(), kCarlemanSeries, "sum |alpha_n| d_n d_{n+1} r_{n-1} r_{n+1} diverges");
  });
  stage("cubic_series", [&] {
    v.cubic = test_condition_I(grid, alpha, H, config.criteria);
    certify(v.cubic->certifies(), kCubicSeries, "sum |alpha_n| d_n^3 diverges");
  });
  stage("bounds", [&] {
    const GFunction G = select_G(grid, N, config.criteria);
    v.g_kind = std::string(to_string(G.kind()));
    v.upper = test_bound_II(grid, alpha, G, N, config.criteria);
    certify(v.upper->holds == Tri::True, kUpperBound, "alpha_n <= -(2/d_n + 2/d_{n+1} + G(n)) + C1 d_n");
    v.lower = test_bound_III(grid, alpha, G, N, config.criteria);
    certify(v.lower->holds == Tri::True, kLowerBound, "alpha_n >= G(n) - C2 d_n");
  });

  // 2. periodic gauge
  const auto a = alpha.inverse_gap_scale();
  stage("periodic_gauge", [&] {
    v.condition_A = check_condition_A(grid, H);
    v.condition_B = check_condition_B(grid, H, config.criteria);
    v.notes.push_back("parity limits of rho_n are measured; the odd-index limit is reported as u_odd");
    if (a) v.floquet = floquet(v.condition_B->u, *a, 0.0);
  });
  if (v.verdict == Verdict::Inconclusive) {
    std::vector<std::string> missing;
    if (!a) missing.push_back("alpha is not a(1/d_n + 1/d_{n+1}) + perturbation");
    if (a && !(*a > -2.0 && *a < 0.0)) missing.push_back("a outside (-2, 0)");
    if (a && alpha.perturbation_is_O_d(grid) != Tri::True) missing.push_back("perturbation not known to be O(d_n)");
    if (!(v.summability.in_ell2 == Tri::True && v.summability.in_ell1 == Tri::False))
      missing.push_back("grid not known to lie in l2 minus l1");
    if (!(v.ratio->limit_exists && std::abs(v.ratio->limit_estimate - 1.0) <= config.ratio_limit_tol))
      missing.push_back("d_{n+1}/d_n -> 1 not supported");
    if (v.condition_A->verdict != SeriesVerdict::Converges) missing.push_back("condition A not established");
    if (v.condition_B->holds != Tri::True) missing.push_back("condition B not established");
    if (std::abs(v.condition_B->product - 4.0) > config.lemma_product_tol)
      missing.push_back("u_odd u_even differs from 4");
    if (v.floquet && !(std::abs(v.floquet->discriminant) <= 1.0 - config.floquet_margin)) {
      missing.push_back("|Delta_a(0)| not below 1 - margin");
      if (a && std::abs(*a + 1.0) < 1e-12)
        v.notes.push_back("a = -1 gives Delta_a(0) = -1 on the Floquet boundary; routed to the oracle");
    }
    if (missing.empty()) {
      v.verdict = Verdict::Deficient;
      v.certifying_test = kPeriodicGauge;
      v.reason = "alpha = a(1/d_n + 1/d_{n+1}) + O(d_n) with |Delta_a(0)| < 1 under conditions A and B";
    } else {
      std::string why;
      for (const auto& m : missing) why += (why.empty() ? "" : "; ") + m;
      v.notes.push_back("periodic gauge not applicable: " + why);
    }
  }

  // 3. numerical oracle
  const bool decided = v.verdict != Verdict::Inconclusive;
  if (!decided || config.always_run_oracle) {
    stage("oracle", [&] {
      const long n = config.oracle_horizon > 0 ? config.oracle_horizon : N;
      const JacobiOperator op(grid, alpha);
      bool all_in = !config.oracle_lambdas.empty();
      bool all_out = all_in;
      for (const cplx lambda : config.oracle_lambdas) {
        const auto sol = solve_recurrence(op, lambda, n);
        OracleRun run{lambda, l2_probe(sol, config.l2), row_residual(op, sol)};
        all_in = all_in && run.l2.verdict == L2Class::InEll2;
        all_out = all_out && run.l2.verdict == L2Class::NotInEll2;
        v.oracle.push_back(std::move(run));
      }
      v.oracle_verdict = all_in ? Verdict::Deficient : all_out ? Verdict::SelfAdjoint : Verdict::Inconclusive;
    });
    if (!decided) {
      v.verdict = *v.oracle_verdict;
      v.advisory = v.verdict != Verdict::Inconclusive;
      v.certifying_test = v.advisory ? kNumericalAdvisory : kInconclusive;
      v.reason = v.advisory ? "l2 behaviour of the solutions at nonreal lambda (numerical, advisory)"
                            : "no certificate and no consistent oracle outcome";
    }
  }
  return v;
}

}  // namespace deltasa
