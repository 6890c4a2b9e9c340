#include "deltasa/jacobi.hpp"

#include <cmath>
#include <map>
#include <ostream>
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

double inverse_gap_sum(const GridSequence& g, long n) { return 1.0 / g.gap(n) + 1.0 / g.gap(n + 1); }

// Orders exponents (p, q) lexicographically with a tolerance.
bool dominates(double p1, double q1, double p2, double q2) {
  if (p1 > p2 + kExponentTol) return true;
  if (p1 < p2 - kExponentTol) return false;
  return q1 > q2 + kExponentTol;
}

bool same_order(double p1, double q1, double p2, double q2) {
  return std::abs(p1 - p2) <= kExponentTol && std::abs(q1 - q2) <= kExponentTol;
}

// Exponents (p, q) of d_n ~ n^p ln^q n on an analytic grid.
std::optional<std::pair<double, double>> gap_order(const GridSequence& g) {
  if (const auto* p = g.as_power_log()) return std::pair{-p->gamma, -p->eta};
  if (g.as_constant() != nullptr) return std::pair{0.0, 0.0};
  return std::nullopt;
}

struct Term {
  double coef;
  double p;
  double q;
};

std::optional<GrowthOrder> leading(const std::vector<Term>& terms) {
  // merge terms of equal order, then pick the dominant surviving one
  std::vector<Term> merged;
  for (const auto& t : terms) {
    bool found = false;
    for (auto& m : merged) {
      if (same_order(m.p, m.q, t.p, t.q)) {
        m.coef += t.coef;
        found = true;
        break;
      }
    }
    if (!found) merged.push_back(t);
  }
  const Term* best = nullptr;
  for (const auto& m : merged)
    if (best == nullptr || dominates(m.p, m.q, best->p, best->q)) best = &m;
  if (best == nullptr) return GrowthOrder{true, 0.0, 0.0, 0.0};
  double scale = 0.0;
  for (const auto& t : terms)
    if (same_order(t.p, t.q, best->p, best->q)) scale = std::max(scale, std::abs(t.coef));
  if (std::abs(best->coef) <= 1e-12 * scale) return std::nullopt;  // leading terms cancel
  if (best->coef == 0.0) return GrowthOrder{true, 0.0, 0.0, 0.0};
  return GrowthOrder{false, std::abs(best->coef), best->p, best->q};
}

}  // namespace

double PowerTerm::eval(long n) const {
  if (coef == 0.0) return 0.0;
  const auto x = static_cast<double>(n);
  double v = coef * (n_pow == 0.0 ? 1.0 : std::pow(x, n_pow));
  if (ln_pow != 0.0) {
    const double l = std::log(x);
    if (l == 0.0) return ln_pow > 0.0 ? 0.0 : v;
    v *= std::pow(l, ln_pow);
  }
  return v;
}

AlphaSequence::AlphaSequence(AlphaFamily family) : family_(std::move(family)) {
  if (const auto* e = std::get_if<ExplicitAlpha>(&family_); e != nullptr && e->values.empty())
    throw std::invalid_argument("explicit alpha needs at least one value");
  if (const auto* c = std::get_if<CustomAlpha>(&family_); c != nullptr && !c->value)
    throw std::invalid_argument("custom alpha needs an evaluator");
  if (const auto* z = std::get_if<AlphaZero>(&family_); z != nullptr && !z->tilde)
    throw std::invalid_argument("alpha0 needs an r~ table");
}

AlphaSequence AlphaSequence::zero() { return AlphaSequence(ScaledInverseGaps{}); }

AlphaSequence AlphaSequence::scaled_inverse_gaps(double a, std::vector<PowerTerm> terms) {
  return AlphaSequence(ScaledInverseGaps{a, std::move(terms), {}, false});
}

AlphaSequence AlphaSequence::power_terms(std::vector<PowerTerm> terms) {
  return AlphaSequence(ScaledInverseGaps{0.0, std::move(terms), {}, false});
}

AlphaSequence AlphaSequence::explicit_values(std::vector<double> values, TailRule tail) {
  return AlphaSequence(ExplicitAlpha{std::move(values), tail});
}

AlphaSequence AlphaSequence::custom(std::function<double(long)> value, std::string label) {
  return AlphaSequence(CustomAlpha{std::move(value), std::move(label)});
}

AlphaSequence AlphaSequence::alpha_zero(const GridSequence& grid, double a, PeriodPair u, long horizon) {
  return AlphaSequence(AlphaZero{a, u, std::make_shared<const TildeSequence>(grid, horizon + 1)});
}

double AlphaSequence::at(const GridSequence& grid, long n) const {
  if (n < 1) throw std::domain_error("alpha index must be >= 1");
  return std::visit(Overloaded{
                        [&](const ScaledInverseGaps& s) {
                          double v = s.a == 0.0 ? 0.0 : s.a * inverse_gap_sum(grid, n);
                          for (const auto& t : s.terms) v += t.eval(n);
                          if (s.extra) v += s.extra(n);
                          return v;
                        },
                        [&](const ExplicitAlpha& e) {
                          const auto size = static_cast<long>(e.values.size());
                          if (n <= size) return e.values[static_cast<std::size_t>(n - 1)];
                          if (e.tail == TailRule::HoldLast) return e.values.back();
                          return e.values[static_cast<std::size_t>((n - 1) % size)];
                        },
                        [&](const CustomAlpha& c) { return c.value(n); },
                        [&](const AlphaZero& z) { return deltasa::alpha_zero(grid, *z.tilde, z.a, z.u, n); },
                    },
                    family_);
}

std::optional<double> AlphaSequence::inverse_gap_scale() const {
  if (const auto* s = std::get_if<ScaledInverseGaps>(&family_)) return s->a;
  if (const auto* z = std::get_if<AlphaZero>(&family_)) return z->a;
  return std::nullopt;
}

Tri AlphaSequence::perturbation_is_O_d(const GridSequence& grid) const {
  if (std::holds_alternative<AlphaZero>(family_)) return Tri::True;
  const auto* s = std::get_if<ScaledInverseGaps>(&family_);
  if (s == nullptr) return Tri::Unknown;
  if (s->extra && !s->extra_is_O_d) return Tri::Unknown;
  const auto order = gap_order(grid);
  if (!order) return s->terms.empty() ? Tri::True : Tri::Unknown;
  for (const auto& t : s->terms) {
    if (t.coef == 0.0) continue;
    if (dominates(t.n_pow, t.ln_pow, order->first, order->second)) return Tri::False;
  }
  return Tri::True;
}

std::optional<GrowthOrder> AlphaSequence::growth(const GridSequence& grid) const {
  const auto order = gap_order(grid);
  return std::visit(
      Overloaded{
          [&](const ScaledInverseGaps& s) -> std::optional<GrowthOrder> {
            std::vector<Term> terms;
            if (s.a != 0.0) {
              if (!order) return std::nullopt;
              const double lead = grid.as_constant() != nullptr ? 2.0 * s.a / grid.as_constant()->d : 2.0 * s.a;
              terms.push_back({lead, -order->first, -order->second});
            }
            for (const auto& t : s.terms)
              if (t.coef != 0.0) terms.push_back({t.coef, t.n_pow, t.ln_pow});
            if (s.extra) {
              // an O(d_n) extra cannot change a nonvanishing lead unless d_n
              // itself does not decay
              if (!s.extra_is_O_d || !order || terms.empty()) return std::nullopt;
              if (!dominates(0.0, 0.0, order->first, order->second)) return std::nullopt;
            }
            return leading(terms);
          },
          [&](const ExplicitAlpha& e) -> std::optional<GrowthOrder> {
            if (e.tail == TailRule::HoldLast) {
              const double last = e.values.back();
              return last == 0.0 ? GrowthOrder{true, 0.0, 0.0, 0.0} : GrowthOrder{false, std::abs(last), 0.0, 0.0};
            }
            double peak = 0.0;
            for (double v : e.values) peak = std::max(peak, std::abs(v));
            return peak == 0.0 ? GrowthOrder{true, 0.0, 0.0, 0.0} : GrowthOrder{false, peak, 0.0, 0.0};
          },
          [](const CustomAlpha&) -> std::optional<GrowthOrder> { return std::nullopt; },
          [&](const AlphaZero& z) -> std::optional<GrowthOrder> {
            if (!order || z.a == 0.0) return std::nullopt;
            const double lead = grid.as_constant() != nullptr ? 2.0 * z.a / grid.as_constant()->d : 2.0 * z.a;
            return GrowthOrder{false, std::abs(lead), -order->first, -order->second};
          },
      },
      family_);
}

std::string AlphaSequence::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{
                 [&](const ScaledInverseGaps& s) {
                   os << "scaled_inverse_gaps(a=" << s.a;
                   for (const auto& t : s.terms)
                     os << ", " << t.coef << "*n^" << t.n_pow << "*ln^" << t.ln_pow;
                   if (s.extra) os << ", extra" << (s.extra_is_O_d ? "[O(d)]" : "");
                   os << ")";
                 },
                 [&](const ExplicitAlpha& e) { os << "explicit(" << e.values.size() << " values)"; },
                 [&](const CustomAlpha& c) { os << "custom(" << c.label << ")"; },
                 [&](const AlphaZero& z) {
                   os << "alpha0(a=" << z.a << ", u_odd=" << z.u.u_odd << ", u_even=" << z.u.u_even << ")";
                 },
             },
             family_);
  return os.str();
}

TildeSequence::TildeSequence(const GridSequence& grid, long horizon) {
  if (horizon < 1) throw std::invalid_argument("r~ table needs horizon >= 1");
  log_abs_.resize(static_cast<std::size_t>(horizon));
  // Two steps of the recursion give r~_{n+1} = (d_{n+1}/d_n) r~_{n-1}; each
  // parity is accumulated separately with compensation so the error stays
  // O(eps) instead of O(n eps).
  kernels::CompensatedSum acc[2];
  log_abs_[0] = 0.0;
  if (horizon > 1) {
    acc[1].add(grid.log_gap(2));
    log_abs_[1] = acc[1].value();
  }
  for (long n = 2; n < horizon; ++n) {
    auto& a = acc[n % 2];
    a.add(std::log1p(grid.gap_ratio_m1(n, 1)));
    log_abs_[static_cast<std::size_t>(n)] = a.value();
  }
}

double TildeSequence::log_abs(long n) const {
  if (n < 1 || n > size())
    throw std::out_of_range("r~ index " + std::to_string(n) + " outside table of size " + std::to_string(size()));
  return log_abs_[static_cast<std::size_t>(n - 1)];
}

double TildeSequence::value(long n) const { return sign(n) * std::exp(log_abs(n)); }

double tilde_log_abs_closed_form(const GridSequence& grid, long n) {
  if (n < 1) throw std::domain_error("r~ index must be >= 1");
  // pair (k, k-1) for k = n, n-2, ... down to 3; each pair is log(d_k/d_{k-1})
  const long lowest = (n % 2 == 0) ? 4 : 3;
  const long pairs = n >= lowest ? (n - lowest) / 2 + 1 : 0;
  double total = kernels::sum(0, pairs - 1, [&](long j) {
    const long k = n - 2 * j;
    return std::log1p(grid.gap_ratio_m1(k - 1, 1));
  });
  if (n % 2 == 0) total += grid.log_gap(2);
  return total;
}

double rho(const GridSequence& grid, const TildeSequence& tilde, long n) {
  const double log_inv_sum = -grid.log_gap(n) + std::log1p(1.0 / (1.0 + grid.gap_ratio_m1(n, 1)));
  return std::exp(log_inv_sum + 2.0 * tilde.log_abs(n));
}

double rho(const GridSequence& grid, long n) { return rho(grid, TildeSequence(grid, n), n); }

double alpha_zero(const GridSequence& grid, const TildeSequence& tilde, double a, const PeriodPair& u, long n) {
  return -inverse_gap_sum(grid, n) + (a + 1.0) * u.at(n) * std::exp(-2.0 * tilde.log_abs(n));
}

double JacobiOperator::diag(long n) const {
  const double r = grid_.r(n);
  return (alpha_.at(grid_, n) + inverse_gap_sum(grid_, n)) / (r * r);
}

double JacobiOperator::off(long n) const {
  return -1.0 / (grid_.r(n) * grid_.r(n + 1) * grid_.gap(n + 1));
}

double JacobiOperator::entry(long i, long j) const {
  if (i < 1 || j < 1) throw std::domain_error("matrix indices must be >= 1");
  if (i == j) return diag(i);
  if (j == i + 1) return off(i);
  if (i == j + 1) return off(j);
  return 0.0;
}

DenseMatrix truncate(const JacobiOperator& op, long n) {
  if (n < 1) throw std::invalid_argument("section size must be >= 1");
  DenseMatrix m;
  m.size = n;
  try {
    m.data.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
  } catch (const std::bad_alloc&) {
    throw ResourceError("cannot allocate a " + std::to_string(n) + "x" + std::to_string(n) + " section");
  } catch (const std::length_error&) {
    throw ResourceError("section size " + std::to_string(n) + " exceeds addressable memory");
  }
  for (long i = 0; i < n; ++i) {
    m.data[static_cast<std::size_t>(i * n + i)] = op.diag(i + 1);
    if (i + 1 < n) {
      const double b = op.off(i + 1);
      m.data[static_cast<std::size_t>(i * n + i + 1)] = b;
      m.data[static_cast<std::size_t>((i + 1) * n + i)] = b;
    }
  }
  return m;
}

void write_section_csv(std::ostream& os, const DenseMatrix& m) {
  const auto old = os.precision(17);
  os << "row,col,value\n";
  for (long i = 0; i < m.size; ++i)
    for (long j = std::max(0L, i - 1); j <= std::min(m.size - 1, i + 1); ++j)
      os << i + 1 << ',' << j + 1 << ',' << m(i, j) << '\n';
  os.precision(old);
}

ScaledEntries scaled_operator(const JacobiOperator& op, const TildeSequence& tilde, long n) {
  const auto& g = op.grid();
  const double s_n = tilde.value(n);
  const double s_next = tilde.value(n + 1);
  const double r_n = g.r(n);
  return {s_n * r_n * op.diag(n) * r_n * s_n, s_n * r_n * op.off(n) * g.r(n + 1) * s_next};
}

}  // namespace deltasa
