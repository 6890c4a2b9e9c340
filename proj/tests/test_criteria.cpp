#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "deltasa/criteria.hpp"

using namespace deltasa;

namespace {

const std::vector<long> kSeriesHorizons{10000, 100000, 1000000};

double binomial_half(int i) {
  // generalized binomial coefficient (1/2 choose i) from its definition
  double num = 1.0;
  double den = 1.0;
  for (int j = 0; j < i; ++j) {
    num *= 0.5 - j;
    den *= j + 1;
  }
  return num / den;
}

}  // namespace

TEST_CASE("Taylor coefficients of sqrt(1+x)") {
  CHECK(sqrt_taylor_coefficient(1) == 0.5);
  CHECK(sqrt_taylor_coefficient(2) == -0.125);
  CHECK(sqrt_taylor_coefficient(3) == 0.0625);
  for (int i = 1; i <= 12; ++i) CHECK(sqrt_taylor_coefficient(i) == doctest::Approx(binomial_half(i)).epsilon(1e-14));
  CHECK_THROWS_AS(sqrt_taylor_coefficient(0), std::domain_error);
}

TEST_CASE("F on simple grids") {
  for (double d : {0.5, 1.0, 3.0}) {
    const auto g = GridSequence::constant(d);
    for (long n = 2; n < 20; ++n) {
      CHECK(F(g, n) == 0.0);
      CHECK(F_expansion(g, n, 3) == 0.0);
    }
    // r_0 = 1 makes the first value nonzero unless r_1 = 1
    CHECK(F(g, 1) == doctest::Approx((std::sqrt(2.0 * d) - 1.0) / d));
  }
  const auto g = GridSequence::power_log(0.75, 1.0);
  for (long n : {3L, 40L, 5000L}) {
    const double r0 = g.r(n - 1), r1 = g.r(n), r2 = g.r(n + 1);
    const double direct = (r1 / r0 - 1.0) / g.gap(n) + (r1 / r2 - 1.0) / g.gap(n + 1);
    CHECK(F(g, n) == doctest::Approx(direct).epsilon(1e-9));
  }
  CHECK_THROWS_AS(F(g, 0), std::domain_error);
}

TEST_CASE("F expansion and remainder") {
  const auto g = GridSequence::power_log(1.0, 1.0);
  for (long n : {3L, 100L, 10000L}) {
    const double u = expansion_u(g, n), v = expansion_v(g, n);
    CHECK(F_expansion(g, n, 2) == doctest::Approx(0.5 * (u / g.gap(n) + v / g.gap(n + 1))).epsilon(1e-14));
    for (int k : {2, 3, 5})
      CHECK(F_expansion(g, n, k) + F_remainder(g, n, k) == doctest::Approx(F(g, n)).epsilon(1e-10));
  }
  // with k = 3 the remainder is O(d_n^2)
  double prev = 0.0;
  for (long hi : {10000L, 100000L}) {
    double sup = 0.0;
    for (long n = hi / 10; n <= hi; n += 7) {
      const double d = g.gap(n);
      sup = std::max(sup, std::abs(F_remainder(g, n, 3)) / (d * d));
    }
    if (prev > 0.0) CHECK(sup < 1.05 * prev);
    prev = sup;
  }
  CHECK_THROWS_AS(F_expansion(g, 1, 3), std::domain_error);
  CHECK_THROWS_AS(F_expansion(g, 5, 1), std::domain_error);
}

TEST_CASE("first of Carleman-type tests") {
  const auto c = test_carleman_i(GridSequence::constant(1.0), AlphaSequence::power_terms({{1.0, 0.0, 0.0}}),
                                 kSeriesHorizons);
  CHECK(c.verdict == SeriesVerdict::Diverges);
  CHECK(c.certifies());
  CHECK(c.checkpoints.back().partial_sum == doctest::Approx(2.0e6).epsilon(1e-6));

  const auto h = GridSequence::power_log(1.0, 0.0);
  const auto sq = test_carleman_i(h, AlphaSequence::power_terms({{1.0, 2.0, 0.0}}), kSeriesHorizons);
  CHECK(sq.verdict == SeriesVerdict::Diverges);
  CHECK(sq.basis == "analytic");
  CHECK(sq.fitted_growth.kind == "log-like");

  const auto one = test_carleman_i(h, AlphaSequence::power_terms({{1.0, 0.0, 0.0}}), kSeriesHorizons);
  CHECK(one.verdict == SeriesVerdict::Converges);
  CHECK_FALSE(one.certifies());
  REQUIRE(one.term_order.has_value());
  CHECK(one.term_order->first == -3.0);

  const auto custom = test_carleman_i(h, AlphaSequence::custom([](long n) { return static_cast<double>(n); }),
                                      kSeriesHorizons);
  CHECK(custom.verdict == SeriesVerdict::Unknown);
  CHECK(custom.basis == "numerical");
}

TEST_CASE("cubic series test") {
  const auto h = GridSequence::power_log(1.0, 0.0);
  // |alpha_n| d_n^3 ~ 2 n^{-1.5}: this example converges
  const auto a = test_condition_I(h, AlphaSequence::power_terms({{-2.0, 1.5, 0.0}, {-1.0, 0.5, 0.0}}),
                                  kSeriesHorizons);
  CHECK(a.verdict == SeriesVerdict::Converges);
  CHECK_FALSE(a.certifies());
  // one more power of n makes it harmonic
  const auto b = test_condition_I(h, AlphaSequence::power_terms({{-2.0, 2.0, 0.0}}), kSeriesHorizons);
  CHECK(b.verdict == SeriesVerdict::Diverges);
  CHECK(b.certifies());

  const auto alt = test_condition_I(GridSequence::explicit_gaps({1.0, 0.5}), AlphaSequence::power_terms({{1.0, 0.0, 0.0}}),
                                    kSeriesHorizons);
  CHECK_FALSE(alt.gate_failed);

  // ratios collapse to zero: gate fails
  const auto collapsing = GridSequence::custom([](long n) {
    const double x = static_cast<double>(n);
    return std::exp(-x * x / 10.0);
  });
  const auto gated = test_condition_I(collapsing, AlphaSequence::power_terms({{1.0, 0.0, 0.0}}), {16, 32, 48});
  CHECK(gated.gate_failed);
  CHECK_FALSE(gated.certifies());
}

TEST_CASE("upper bound test") {
  for (double gamma : {0.75, 1.0}) {
    const auto g = GridSequence::power_log(gamma, 0.0);
    const auto alpha = AlphaSequence::scaled_inverse_gaps(-2.0, {{0.5, -gamma, 0.0}});
    const auto p = test_bound_II(g, alpha, select_G(g), 100000);
    CHECK(p.holds == Tri::True);
    CHECK(p.minimal_constant == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(p.g_kind == "zero");
  }
  // log-corrected family: the bound holds with -G subtracted, and fails with +G
  const auto g = GridSequence::power_log(1.0, 1.0);
  const auto G = GFunction::nlog_eta(1.0);
  const auto minus = AlphaSequence::custom([g, G](long n) {
    return -2.0 * (1.0 / g.gap(n) + 1.0 / g.gap(n + 1)) - G(n);
  });
  const auto plus = AlphaSequence::custom([g, G](long n) {
    return -2.0 * (1.0 / g.gap(n) + 1.0 / g.gap(n + 1)) + G(n);
  });
  CHECK(test_bound_II(g, minus, G, 100000).holds == Tri::True);
  CHECK(test_bound_II(g, plus, G, 100000).holds != Tri::True);

  const auto zero = test_bound_II(GridSequence::power_log(0.75, 0.0), AlphaSequence::zero(), GFunction::zero(), 100000);
  CHECK(zero.holds == Tri::False);
}

TEST_CASE("lower bound test") {
  const auto h = GridSequence::power_log(1.0, 0.0);
  const auto pos = test_bound_III(h, AlphaSequence::power_terms({{1.0, 0.0, 0.0}}), GFunction::zero(), 100000);
  CHECK(pos.holds == Tri::True);
  CHECK(pos.minimal_constant <= 0.0);

  const auto three = test_bound_III(h, AlphaSequence::power_terms({{-3.0, -1.0, 0.0}}), GFunction::zero(), 100000);
  CHECK(three.holds == Tri::True);
  CHECK(three.minimal_constant == doctest::Approx(3.0).epsilon(1e-9));

  const auto lin = test_bound_III(h, AlphaSequence::power_terms({{-2.0, 1.0, 0.0}, {-1.0, 0.0, 0.0}}),
                                  GFunction::zero(), 100000);
  CHECK(lin.holds == Tri::False);
  CHECK(lin.minimal_constant > 1e9);
}

TEST_CASE("lower bound with G zero holds for every nonnegative alpha") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (const auto& g : {GridSequence::power_log(0.75, 2.0), GridSequence::power_log(1.0, -1.0),
                        GridSequence::power_log(0.6, 0.0)}) {
    REQUIRE(select_G(g, 10000).kind() == GFunction::Kind::Zero);
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> values(257);
      for (auto& v : values) v = u(rng);
      const auto p = test_bound_III(g, AlphaSequence::explicit_values(values, TailRule::Periodic),
                                    GFunction::zero(), 20000);
      CHECK(p.holds == Tri::True);
      CHECK(p.minimal_constant <= 0.0);
    }
  }
}

TEST_CASE("minimal bound constants are monotone in the horizon") {
  const auto g = GridSequence::power_log(0.75, 1.0);
  const auto alpha = AlphaSequence::scaled_inverse_gaps(-2.0, {{0.3, -0.75, 0.0}, {0.7, -1.2, 0.5}});
  double prev2 = -INFINITY, prev3 = -INFINITY;
  for (long n : {1000L, 4000L, 16000L, 64000L}) {
    const double c2 = test_bound_II(g, alpha, GFunction::zero(), n).minimal_constant;
    const double c3 = test_bound_III(g, alpha, GFunction::zero(), n).minimal_constant;
    CHECK(c2 >= prev2);
    CHECK(c3 >= prev3);
    prev2 = c2;
    prev3 = c3;
  }
}

TEST_CASE("ratio expansion d_{n+1}/d_n = 1 + C d_n + O(d_n^2)") {
  const auto h = check_asymptotic_eq10(GridSequence::power_log(1.0, 0.0), 100000);
  CHECK(h.holds == Tri::True);
  CHECK(h.C_estimate == doctest::Approx(-1.0).epsilon(1e-6));
  const auto c = check_asymptotic_eq10(GridSequence::constant(2.0), 1000);
  CHECK(c.holds == Tri::True);
  CHECK(c.C_estimate == 0.0);
  CHECK(check_asymptotic_eq10(GridSequence::power_log(1.0, 1.0), 100000).holds == Tri::False);
  // for gamma < 1, (ratio - 1)/d_n ~ -gamma n^{gamma-1} has no constant limit
  const auto q = check_asymptotic_eq10(GridSequence::power_log(0.75, 0.0), 100000);
  CHECK(q.analytic == Tri::False);
  CHECK(std::isfinite(q.C_estimate));
  CHECK_THROWS_AS(check_asymptotic_eq10(GridSequence::constant(1.0), 50), std::invalid_argument);
}

TEST_CASE("regularity conditions on the gaps") {
  const auto a = check_d_conditions(GridSequence::power_log(0.75, 3.0), 100000);
  CHECK(a.applicable);
  CHECK(a.all_hold());
  const auto gap = check_d_conditions(GridSequence::power_log(1.0, 0.5), 100000);
  CHECK(gap.d0.holds == Tri::False);
  const auto neg = check_d_conditions(GridSequence::power_log(1.0, -1.0), 100000);
  CHECK(neg.d3.holds == Tri::True);
  CHECK_FALSE(check_d_conditions(GridSequence::explicit_gaps({1.0, 2.0}), 1000).applicable);
}

TEST_CASE("smallest Taylor order k") {
  for (double eta : {0.25, 0.5, 1.0}) {
    const auto r = check_d4(GridSequence::power_log(1.0, eta), 100000);
    REQUIRE(r.k_min.has_value());
    CHECK(*r.k_min == 3);
    CHECK(r.holds == Tri::True);
  }
  const auto q = check_d4(GridSequence::power_log(0.75, 0.0), 100000);
  REQUIRE(q.k_min.has_value());
  CHECK(*q.k_min == 2);
  CHECK_FALSE(check_d4(GridSequence::constant(1.0), 1000).applicable);
}

TEST_CASE("G for the log-corrected family") {
  CHECK(G_nlog(0.3, 100) == doctest::Approx(0.25 * std::pow(std::log(100.0), 0.3) / 100.0).epsilon(1e-14));
  CHECK(G_nlog(0.3, 100) == doctest::Approx(0.003955).epsilon(1e-3));
  const double l = std::log(1000.0);
  CHECK(G_nlog(0.8, 1000) == doctest::Approx(0.25 * std::pow(l, 0.8) / 1000.0 + 0.8 / (1000.0 * std::pow(l, 0.2))));
  CHECK_THROWS_AS(G_nlog(0.0, 10), std::domain_error);
  CHECK_THROWS_AS(G_nlog(1.5, 10), std::domain_error);

  CHECK(select_G(GridSequence::power_log(0.75, 2.0)).kind() == GFunction::Kind::Zero);
  const auto g11 = select_G(GridSequence::power_log(1.0, 1.0));
  CHECK(g11.kind() == GFunction::Kind::NLogEta);
  CHECK(g11.eta() == 1.0);
  CHECK(select_G(GridSequence::constant(1.0)).kind() == GFunction::Kind::Zero);
}

TEST_CASE("F over d bounded inside the regular region and growing in the gap") {
  for (auto [gamma, eta] : {std::pair{0.6, 0.0}, std::pair{0.75, 3.0}, std::pair{1.0, -1.0}}) {
    const auto p = probe_F_over_d(GridSequence::power_log(gamma, eta), 1000, 100000);
    CHECK(p.bounded == Tri::True);
    CHECK_FALSE(p.growth_detected);
  }
  const auto gap = probe_F_over_d(GridSequence::power_log(1.0, 0.5), 1000, 100000);
  CHECK(gap.growth_detected);
  CHECK(gap.bounded != Tri::True);
}

TEST_CASE("limits of F on the log-corrected family") {
  const auto a = verify_G_limits(0.8, 1000000);
  CHECK(std::abs(a.L1 - 0.25) < 0.01);
  CHECK(std::abs(a.L2 - 0.8) < 0.02);
  CHECK(std::abs(verify_G_limits(1.0, 1000000).L3 - 0.25) < 0.02);
  CHECK(std::abs(verify_G_limits(0.4, 1000000).L3) < 0.02);
  for (double eta : {0.25, 0.5, 0.75, 1.0}) CHECK(std::abs(verify_G_limits(eta, 1000000).L1 - 0.25) < 0.01);
}

TEST_CASE("summability of r_n r~_n") {
  const auto a = check_condition_A(GridSequence::power_log(0.75, 0.0), kSeriesHorizons);
  CHECK(a.verdict == SeriesVerdict::Converges);
  CHECK(a.basis == "analytic");
  CHECK(check_condition_A(GridSequence::power_log(1.0, 0.0), kSeriesHorizons).verdict == SeriesVerdict::Converges);
  CHECK(check_condition_A(GridSequence::power_log(0.5, 0.0), kSeriesHorizons).verdict == SeriesVerdict::Diverges);
}

TEST_CASE("period-2 limits of rho") {
  const auto b = check_condition_B(GridSequence::power_log(1.0, 0.0), kSeriesHorizons);
  CHECK(b.holds == Tri::True);
  CHECK(b.u.u_odd == doctest::Approx(std::numbers::pi).epsilon(1e-6));
  CHECK(b.u.u_even == doctest::Approx(4.0 / std::numbers::pi).epsilon(1e-6));
  CHECK(std::abs(b.product - 4.0) < 1e-6);

  for (double gamma : {0.6, 0.75}) {
    const auto bg = check_condition_B(GridSequence::power_log(gamma, 0.0), kSeriesHorizons);
    CHECK(std::abs(bg.product - 4.0) < 1e-6);
    const double scale = std::pow(2.0, 1.0 - gamma);
    CHECK(bg.u.u_odd == doctest::Approx(scale * std::pow(std::numbers::pi, gamma)).epsilon(1e-5));
    CHECK(bg.u.u_even == doctest::Approx(scale * std::pow(4.0 / std::numbers::pi, gamma)).epsilon(1e-5));
  }

  const auto c = check_condition_B(GridSequence::constant(1.0), {1000, 10000});
  CHECK(c.u.u_odd == doctest::Approx(2.0));
  CHECK(c.u.u_even == doctest::Approx(2.0));
  CHECK(c.product == doctest::Approx(4.0));
}
