#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "deltasa/jacobi.hpp"

using namespace deltasa;

namespace {

// log(m!!) through lgamma, independent of any recursion.
double log_double_factorial(long m) {
  if (m <= 0) return 0.0;
  const double x = static_cast<double>(m);
  if (m % 2 == 0) return 0.5 * x * std::log(2.0) + std::lgamma(0.5 * x + 1.0);
  const double h = 0.5 * (x - 1.0);
  return std::lgamma(x + 1.0) - h * std::log(2.0) - std::lgamma(h + 1.0);
}

// |r~_n| = ((n-1)!!/n!!)^gamma for d_n = n^-gamma with d_1 = 1
double oracle_log_tilde(double gamma, long n) {
  return gamma * (log_double_factorial(n - 1) - log_double_factorial(n));
}

}  // namespace

TEST_CASE("operator entries") {
  const JacobiOperator c(GridSequence::constant(1.0), AlphaSequence::zero());
  CHECK(c.diag(5) == doctest::Approx(1.0));
  CHECK(c.off(5) == doctest::Approx(-0.5));

  const JacobiOperator h(GridSequence::power_log(1.0, 0.0), AlphaSequence::zero());
  CHECK(h.entry(1, 1) == doctest::Approx(2.0));
  CHECK(h.entry(1, 3) == 0.0);
  CHECK(h.entry(3, 1) == 0.0);
  for (long n = 1; n < 50; ++n) {
    CHECK(h.entry(n, n + 1) == h.entry(n + 1, n));
    CHECK(h.entry(n, n + 1) == h.off(n));
    CHECK(h.off(n) < 0.0);
  }
}

TEST_CASE("entries match the defining formulas on random data") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> gap(0.05, 3.0);
  std::uniform_real_distribution<double> val(-10.0, 10.0);
  std::vector<double> gaps(40), alphas(40);
  for (auto& g : gaps) g = gap(rng);
  for (auto& a : alphas) a = val(rng);
  const auto grid = GridSequence::explicit_gaps(gaps);
  const JacobiOperator op(grid, AlphaSequence::explicit_values(alphas));
  for (long n = 1; n < 39; ++n) {
    const double dn = gaps[n - 1], dn1 = gaps[n];
    const double rn = std::sqrt(dn + dn1), rn1 = std::sqrt(dn1 + gaps[n + 1]);
    CHECK(op.diag(n) == doctest::Approx((alphas[n - 1] + 1.0 / dn + 1.0 / dn1) / (rn * rn)).epsilon(1e-13));
    CHECK(op.off(n) == doctest::Approx(-1.0 / (rn * rn1 * dn1)).epsilon(1e-13));
  }
}

TEST_CASE("principal sections") {
  const JacobiOperator op(GridSequence::power_log(0.75, 1.0), AlphaSequence::scaled_inverse_gaps(-0.5));
  for (long size : {1L, 2L, 3L, 12L}) {
    const auto m = truncate(op, size);
    CHECK(m.size == size);
    for (long i = 0; i < size; ++i)
      for (long j = 0; j < size; ++j) {
        CHECK(m(i, j) == m(j, i));
        CHECK(m(i, j) == op.entry(i + 1, j + 1));
      }
  }
  std::ostringstream os;
  write_section_csv(os, truncate(op, 3));
  std::string line;
  std::istringstream is(os.str());
  int lines = 0;
  while (std::getline(is, line))
    if (!line.empty() && std::isdigit(static_cast<unsigned char>(line[0]))) ++lines;
  CHECK(lines == 7);
}

TEST_CASE("r tilde small values") {
  const TildeSequence t(GridSequence::power_log(1.0, 0.0), 10);
  CHECK(t.value(1) == doctest::Approx(1.0));
  CHECK(t.value(2) == doctest::Approx(-0.5));
  CHECK(t.value(3) == doctest::Approx(2.0 / 3.0));
  CHECK(t.value(4) == doctest::Approx(-3.0 / 8.0));

  const TildeSequence t6(GridSequence::power_log(0.6, 0.0), 10);
  CHECK(t6.value(5) == doctest::Approx(std::pow(8.0 / 15.0, 0.6)).epsilon(1e-14));
}

TEST_CASE("r tilde obeys its defining recursion and sign rule") {
  for (const auto& grid : {GridSequence::power_log(0.75, 2.0), GridSequence::explicit_gaps({1.0, 0.3, 2.0, 0.7}),
                           GridSequence::constant(1.7)}) {
    const TildeSequence t(grid, 2000);
    for (long n = 1; n < 2000; ++n) {
      CHECK(t.sign(n) == ((n % 2 == 1) ? 1 : -1));
      CHECK(std::signbit(t.value(n)) == (n % 2 == 0));
      // log form; the explicit grid drives |r~_n| past the double range
      CHECK(t.log_abs(n + 1) == doctest::Approx(grid.log_gap(n + 1) - t.log_abs(n)).epsilon(1e-12).scale(1.0));
      if (n < 40) CHECK(t.value(n + 1) == doctest::Approx(-grid.gap(n + 1) / t.value(n)).epsilon(1e-12));
    }
  }
}

TEST_CASE("log r tilde against double-factorial oracle") {
  for (double gamma : {0.6, 0.75, 1.0}) {
    const auto grid = GridSequence::power_log(gamma, 0.0);
    const TildeSequence t(grid, 100000);
    for (long n : {1L, 2L, 3L, 10L, 101L, 1000L, 54321L, 100000L}) {
      const double expect = oracle_log_tilde(gamma, n);
      CHECK(t.log_abs(n) == doctest::Approx(expect).epsilon(1e-10).scale(1.0));
      CHECK(tilde_log_abs_closed_form(grid, n) == doctest::Approx(expect).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("parity limits of rho approach the Wallis constants") {
  const auto grid = GridSequence::power_log(1.0, 0.0);
  const TildeSequence t(grid, 20002);
  CHECK(rho(grid, t, 1) == doctest::Approx(3.0));
  CHECK(std::abs(rho(grid, t, 10001) - std::numbers::pi) < 1e-4);
  CHECK(std::abs(rho(grid, t, 10000) - 4.0 / std::numbers::pi) < 1e-4);
  CHECK(rho(grid, 10001) == doctest::Approx(rho(grid, t, 10001)).epsilon(1e-12));
  // the error shrinks with n on each parity class
  CHECK(std::abs(rho(grid, t, 20001) - std::numbers::pi) < std::abs(rho(grid, t, 10001) - std::numbers::pi));
  CHECK(std::abs(rho(grid, t, 20000) - 4.0 / std::numbers::pi) <
        std::abs(rho(grid, t, 10000) - 4.0 / std::numbers::pi));
}

TEST_CASE("alpha sequences") {
  const auto grid = GridSequence::power_log(1.0, 0.0);
  const PeriodPair u{std::numbers::pi, 4.0 / std::numbers::pi};
  const TildeSequence t(grid, 100);
  CHECK(alpha_zero(grid, t, -0.5, u, 1) == doctest::Approx(-3.0 + 0.5 * std::numbers::pi));
  CHECK(alpha_zero(grid, t, -1.0, u, 7) == doctest::Approx(-(7.0 + 8.0)));

  const auto az = AlphaSequence::alpha_zero(grid, -0.5, u, 100);
  CHECK(az.at(grid, 1) == doctest::Approx(-3.0 + 0.5 * std::numbers::pi));

  const auto s = AlphaSequence::scaled_inverse_gaps(-0.5, {{2.0, -1.0, 0.0}});
  CHECK(s.at(grid, 4) == doctest::Approx(-0.5 * 9.0 + 0.5));
  CHECK(s.inverse_gap_scale().value() == -0.5);
  CHECK(s.perturbation_is_O_d(grid) == Tri::True);
  CHECK(AlphaSequence::scaled_inverse_gaps(-0.5, {{1.0, -0.5, 0.0}}).perturbation_is_O_d(grid) == Tri::False);
  CHECK(AlphaSequence::zero().at(grid, 9) == 0.0);
  CHECK(AlphaSequence::explicit_values({1.0, 2.0}).at(grid, 10) == 2.0);

  const auto g = AlphaSequence::power_terms({{-2.0, 1.0, 1.0}}).growth(grid);
  REQUIRE(g.has_value());
  CHECK(g->n_pow == 1.0);
  CHECK(g->ln_pow == 1.0);
  CHECK(AlphaSequence::zero().growth(grid)->zero);
}

TEST_CASE("scaled operator is the period-2 Jacobi matrix for alpha zero") {
  for (double a : {-1.5, -0.5, 0.7}) {
    const auto grid = GridSequence::power_log(0.75, 1.0);
    const PeriodPair u{2.1, 1.9};
    const auto tilde = TildeSequence(grid, 5001);
    const JacobiOperator op(grid, AlphaSequence::alpha_zero(grid, a, u, 5001));
    for (long n : {1L, 2L, 3L, 100L, 4999L, 5000L}) {
      const auto e = scaled_operator(op, tilde, n);
      CHECK(e.off == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(e.diag == doctest::Approx((a + 1.0) * u.at(n)).epsilon(1e-9).scale(1.0));
    }
  }
}
