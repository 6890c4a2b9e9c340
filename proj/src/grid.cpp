#include "deltasa/grid.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "deltasa/kernels.hpp"

namespace deltasa {
namespace {

constexpr double kExponentTol = 1e-9;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_index(long n) {
  if (n < 1) throw std::domain_error("gap index must be >= 1, got " + std::to_string(n));
}

double explicit_at(const Explicit& e, long n) {
  const auto size = static_cast<long>(e.gaps.size());
  if (n <= size) return e.gaps[static_cast<std::size_t>(n - 1)];
  if (e.tail == TailRule::HoldLast) return e.gaps.back();
  return e.gaps[static_cast<std::size_t>((n - 1) % size)];
}

double power_log_log_gap(const PowerLog& p, long n) {
  if (n == 1) return std::log(p.d1);
  const double ln = std::log(static_cast<double>(n));
  double out = -p.gamma * ln;
  if (p.eta != 0.0) out -= p.eta * std::log(ln);
  return out;
}

}  // namespace

GridSequence::GridSequence(GridFamily family, long max_index_hint)
    : family_(std::move(family)), max_index_hint_(max_index_hint) {
  std::visit(Overloaded{
                 [](const PowerLog& p) {
                   if (!(p.d1 > 0.0) || !std::isfinite(p.gamma) || !std::isfinite(p.eta))
                     throw std::invalid_argument("power-log grid needs finite gamma, eta and d1 > 0");
                 },
                 [](const Constant& c) {
                   if (!(c.d > 0.0) || !std::isfinite(c.d))
                     throw std::invalid_argument("constant grid needs d > 0");
                 },
                 [](const Explicit& e) {
                   if (e.gaps.empty()) throw std::invalid_argument("explicit grid needs at least one gap");
                   for (double g : e.gaps)
                     if (!(g > 0.0) || !std::isfinite(g))
                       throw std::invalid_argument("explicit grid gaps must be positive");
                 },
                 [](const Custom& c) {
                   if (!c.gap) throw std::invalid_argument("custom grid needs an evaluator");
                 },
             },
             family_);
}

GridSequence GridSequence::power_log(double gamma, double eta, double d1) {
  return GridSequence(PowerLog{gamma, eta, d1});
}

GridSequence GridSequence::constant(double d) { return GridSequence(Constant{d}); }

GridSequence GridSequence::explicit_gaps(std::vector<double> gaps, TailRule tail) {
  return GridSequence(Explicit{std::move(gaps), tail});
}

GridSequence GridSequence::custom(std::function<double(long)> gap, std::string label,
                                  std::optional<SmoothFamilyDerivatives> derivatives) {
  return GridSequence(Custom{std::move(gap), std::move(label), std::move(derivatives)});
}

double GridSequence::gap(long n) const {
  require_index(n);
  return std::visit(Overloaded{
                        [n](const PowerLog& p) {
                          return n == 1 ? p.d1 : std::exp(power_log_log_gap(p, n));
                        },
                        [](const Constant& c) { return c.d; },
                        [n](const Explicit& e) { return explicit_at(e, n); },
                        [n](const Custom& c) {
                          const double v = c.gap(n);
                          if (!(v > 0.0) || !std::isfinite(v))
                            throw std::domain_error("custom grid produced a non-positive gap at n=" +
                                                    std::to_string(n));
                          return v;
                        },
                    },
                    family_);
}

double GridSequence::log_gap(long n) const {
  require_index(n);
  if (const auto* p = as_power_log()) return power_log_log_gap(*p, n);
  return std::log(gap(n));
}

double GridSequence::gap_ratio_m1(long n, long k) const {
  require_index(n);
  require_index(n + k);
  if (k == 0) return 0.0;
  if (as_constant() != nullptr) return 0.0;
  if (const auto* p = as_power_log(); p != nullptr && n >= 2 && n + k >= 2) {
    // log(d_{n+k}/d_n) = -gamma log1p(k/n) - eta log1p(log1p(k/n)/ln n)
    const double lr = std::log1p(static_cast<double>(k) / static_cast<double>(n));
    double e = -p->gamma * lr;
    if (p->eta != 0.0) e -= p->eta * std::log1p(lr / std::log(static_cast<double>(n)));
    return std::expm1(e);
  }
  return gap(n + k) / gap(n) - 1.0;
}

double GridSequence::r(long n) const {
  if (n == 0) return 1.0;
  if (n < 0) throw std::domain_error("r index must be >= 0, got " + std::to_string(n));
  return std::sqrt(gap(n) + gap(n + 1));
}

double GridSequence::x(long n) const {
  if (n < 0) throw std::domain_error("x index must be >= 0, got " + std::to_string(n));
  kernels::CompensatedSum acc;
  for (long k = 1; k <= n; ++k) acc.add(gap(k));
  return acc.value();
}

std::optional<SmoothFamilyDerivatives> GridSequence::derivatives() const {
  if (const auto* p = as_power_log()) {
    const double g = p->gamma;
    const double e = p->eta;
    SmoothFamilyDerivatives out;
    out.d = [g, e](double x) { return std::pow(x, -g) * std::pow(std::log(x), -e); };
    out.d1 = [g, e](double x) {
      const double l = std::log(x);
      return -(g * l + e) * std::pow(x, -g - 1.0) * std::pow(l, -e - 1.0);
    };
    out.d2 = [g, e](double x) {
      const double l = std::log(x);
      return (g * (g + 1.0) * l * l + (2.0 * g + 1.0) * e * l + e * (e + 1.0)) * std::pow(x, -g - 2.0) *
             std::pow(l, -e - 2.0);
    };
    out.valid_from = 3;
    return out;
  }
  if (const auto* c = as_constant()) {
    const double d = c->d;
    return SmoothFamilyDerivatives{[d](double) { return d; }, [](double) { return 0.0; },
                                   [](double) { return 0.0; }, 1};
  }
  if (const auto* c = std::get_if<Custom>(&family_)) return c->derivatives;
  return std::nullopt;
}

bool GridSequence::is_analytic() const noexcept {
  return std::holds_alternative<PowerLog>(family_) || std::holds_alternative<Constant>(family_);
}

std::string GridSequence::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{
                 [&](const PowerLog& p) {
                   os << "power_log(gamma=" << p.gamma << ", eta=" << p.eta << ", d1=" << p.d1 << ")";
                 },
                 [&](const Constant& c) { os << "constant(d=" << c.d << ")"; },
                 [&](const Explicit& e) {
                   os << "explicit(" << e.gaps.size() << " gaps, "
                      << (e.tail == TailRule::Periodic ? "periodic" : "hold_last") << ")";
                 },
                 [&](const Custom& c) { os << "custom(" << c.label << ")"; },
             },
             family_);
  return os.str();
}

RatioStats ratio_stats(const GridSequence& seq, long horizon, double limit_tol) {
  if (horizon < 10) throw std::invalid_argument("ratio_stats needs a horizon >= 10");
  RatioStats out;
  out.window_lo = horizon / 2;
  out.window_hi = horizon;
  const auto ex = kernels::extrema(out.window_lo, out.window_hi,
                                   [&](long n) { return 1.0 + seq.gap_ratio_m1(n, 1); });
  out.min_tail_ratio = ex.min;
  out.max_tail_ratio = ex.max;
  const double at_end = seq.gap_ratio_m1(horizon, 1);
  // same parity as horizon, so period-2 sequences compare like with like
  long mid = horizon / 2;
  if ((mid - horizon) % 2 != 0) ++mid;
  const double at_mid = seq.gap_ratio_m1(mid, 1);
  // first-order Richardson step assuming an O(1/n) approach to the limit
  const double span = static_cast<double>(horizon) / static_cast<double>(mid);
  out.limit_estimate = 1.0 + at_end + (at_end - at_mid) / (span - 1.0);
  out.tolerance = std::abs(at_end - at_mid);
  out.limit_exists = (ex.max - ex.min) < limit_tol;
  return out;
}

bool power_log_series_diverges(double p, double q) noexcept {
  if (p > -1.0 + kExponentTol) return true;
  if (p < -1.0 - kExponentTol) return false;
  return q >= -1.0 - kExponentTol;
}

Summability classify_summability(const GridSequence& seq, long diagnostic_horizon) {
  Summability out;
  if (const auto* p = seq.as_power_log()) {
    out.basis = "analytic";
    out.in_ell1 = tri(!power_log_series_diverges(-p->gamma, -p->eta));
    out.in_ell2 = tri(!power_log_series_diverges(-2.0 * p->gamma, -2.0 * p->eta));
    return out;
  }
  if (seq.as_constant() != nullptr ||
      std::holds_alternative<Explicit>(seq.family())) {
    // positive terms that repeat forever are never summable
    out.basis = "analytic";
    out.in_ell1 = Tri::False;
    out.in_ell2 = Tri::False;
    return out;
  }
  out.basis = "numerical";
  kernels::CompensatedSum s1;
  kernels::CompensatedSum s2;
  long next = 1;
  for (long n = 1; n <= diagnostic_horizon; ++n) {
    const double d = seq.gap(n);
    s1.add(d);
    s2.add(d * d);
    if (n == next) {
      out.ell1_partial.emplace_back(n, s1.value());
      out.ell2_partial.emplace_back(n, s2.value());
      next *= 2;
    }
  }
  return out;
}

}  // namespace deltasa
