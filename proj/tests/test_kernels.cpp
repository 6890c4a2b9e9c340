#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include <omp.h>

#include "deltasa/kernels.hpp"
#include "deltasa/kernels_reference.hpp"

using namespace deltasa;

namespace {

double wiggly(long n) { return std::sin(0.001 * static_cast<double>(n)) / std::sqrt(static_cast<double>(n)); }

struct ThreadCount {
  explicit ThreadCount(int n) : saved(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~ThreadCount() { omp_set_num_threads(saved); }
  int saved;
};

}  // namespace

TEST_CASE("compensated sum keeps small addends") {
  kernels::CompensatedSum acc;
  acc.add(1.0);
  for (int i = 0; i < 10000; ++i) acc.add(1e-16);
  CHECK(acc.value() == doctest::Approx(1.0 + 1e-12).epsilon(1e-15));

  // 1e100 - 1e100 must leave the 1 behind
  kernels::CompensatedSum b;
  b.add(1e100);
  b.add(1.0);
  b.add(-1e100);
  CHECK(b.value() == 1.0);
}

TEST_CASE("parallel sum agrees with the serial reference") {
  for (long hi : {1L, 100L, 4096L, 4097L, 123457L}) {
    const double par = kernels::sum(1, hi, wiggly);
    const double ser = kernels::reference::sum(1, hi, wiggly);
    CHECK(par == doctest::Approx(ser).epsilon(1e-14));
  }
  CHECK(kernels::sum(5, 4, wiggly) == 0.0);
}

TEST_CASE("parallel sum is bit-identical across thread counts") {
  double first = 0.0;
  for (int t : {1, 2, 3, 4}) {
    ThreadCount guard(t);
    const double v = kernels::sum(1, 300001, wiggly);
    if (t == 1) first = v;
    CHECK(v == first);
  }
}

TEST_CASE("extrema matches the serial scan including argmax ties") {
  const auto f = [](long n) { return static_cast<double>((n * 7919) % 1000); };
  for (int t : {1, 3}) {
    ThreadCount guard(t);
    const auto par = kernels::extrema(1, 50000, f);
    const auto ser = kernels::reference::extrema(1, 50000, f);
    CHECK(par.max == ser.max);
    CHECK(par.argmax == ser.argmax);
    CHECK(par.min == ser.min);
    CHECK(par.argmin == ser.argmin);
  }
}

TEST_CASE("dyadic block sums partition [1, N]") {
  const long n = 100000;
  const auto par = kernels::dyadic_block_sums(n, wiggly);
  const auto ser = kernels::reference::dyadic_block_sums(n, wiggly);
  REQUIRE(par.size() == ser.size());
  CHECK(par.size() == 17);  // blocks 0..16, the last one partial
  double total = 0.0;
  for (std::size_t k = 0; k < par.size(); ++k) {
    CHECK(par[k] == doctest::Approx(ser[k]).epsilon(1e-14));
    total += par[k];
  }
  CHECK(total == doctest::Approx(kernels::reference::sum(1, n, wiggly)).epsilon(1e-13));
  CHECK(kernels::dyadic_block_sums(1, wiggly).size() == 1);
}

TEST_CASE("tabulate is exact and ordered") {
  const auto par = kernels::tabulate(3, 20000, wiggly);
  const auto ser = kernels::reference::tabulate(3, 20000, wiggly);
  CHECK(par == ser);
  CHECK(par.front() == wiggly(3));
  CHECK(kernels::tabulate(5, 4, wiggly).empty());
}

TEST_CASE("exceptions inside parallel regions reach the caller") {
  const auto bad = [](long n) -> double {
    if (n == 7777) throw std::domain_error("bad index");
    return 1.0;
  };
  CHECK_THROWS_AS(kernels::sum(1, 10000, bad), std::domain_error);
  CHECK_THROWS_AS(kernels::extrema(1, 10000, bad), std::domain_error);
  CHECK_THROWS_AS(kernels::tabulate(1, 10000, bad), std::domain_error);
}
