#pragma once

// Data-parallel reductions over index ranges [lo, hi] of a pure evaluator
// n -> double. Every kernel here has a serial twin in kernels_reference.hpp
// that the tests compare against.
//
// Sums are split into fixed-size chunks that do not depend on the thread
// count, each chunk is summed with Neumaier compensation, and chunk results
// are combined in index order. Results are therefore bit-identical for any
// OMP_NUM_THREADS.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace deltasa::kernels {

inline constexpr long kChunk = 4096;

/// Neumaier-compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double v) noexcept {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      carry += (sum - t) + v;
    else
      carry += (v - t) + sum;
    sum = t;
  }
  void add(const CompensatedSum& o) noexcept {
    add(o.sum);
    add(o.carry);
  }
  [[nodiscard]] double value() const noexcept { return sum + carry; }
};

struct Extrema {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  long argmin = 0;
  long argmax = 0;

  void add(long n, double v) noexcept {
    // ties resolve to the smallest index so results match the serial scan
    if (v < min || (v == min && n < argmin)) { min = v; argmin = n; }
    if (v > max || (v == max && n < argmax)) { max = v; argmax = n; }
  }
  void merge(const Extrema& o) noexcept {
    if (o.min < min || (o.min == min && o.argmin < argmin)) { min = o.min; argmin = o.argmin; }
    if (o.max > max || (o.max == max && o.argmax < argmax)) { max = o.max; argmax = o.argmax; }
  }
};

namespace detail {

// Exceptions must not escape an OpenMP region; the first one is kept and
// rethrown after the join.
class ExceptionTrap {
 public:
  template <class Fn>
  void run(Fn&& fn) noexcept {
    try {
      fn();
    } catch (...) {
      std::lock_guard lock(mu_);
      if (!first_) first_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (first_) std::rethrow_exception(first_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr first_;
};

inline long chunk_count(long lo, long hi) noexcept {
  return hi < lo ? 0 : (hi - lo) / kChunk + 1;
}

}  // namespace detail

/// Compensated sum of f(n) for n in [lo, hi].
template <class F>
double sum(long lo, long hi, const F& f) {
  const long chunks = detail::chunk_count(lo, hi);
  std::vector<CompensatedSum> partial(static_cast<std::size_t>(chunks));
  detail::ExceptionTrap trap;
#pragma omp parallel for schedule(static)
  for (long c = 0; c < chunks; ++c) {
    trap.run([&] {
      const long a = lo + c * kChunk;
      const long b = std::min(hi, a + kChunk - 1);
      CompensatedSum acc;
      for (long n = a; n <= b; ++n) acc.add(f(n));
      partial[static_cast<std::size_t>(c)] = acc;
    });
  }
  trap.rethrow();
  CompensatedSum total;
  for (const auto& p : partial) total.add(p);
  return total.value();
}

/// Min and max of f(n) over [lo, hi] with their first arguments.
template <class F>
Extrema extrema(long lo, long hi, const F& f) {
  const long chunks = detail::chunk_count(lo, hi);
  std::vector<Extrema> partial(static_cast<std::size_t>(chunks));
  detail::ExceptionTrap trap;
#pragma omp parallel for schedule(static)
  for (long c = 0; c < chunks; ++c) {
    trap.run([&] {
      const long a = lo + c * kChunk;
      const long b = std::min(hi, a + kChunk - 1);
      Extrema e;
      for (long n = a; n <= b; ++n) e.add(n, f(n));
      partial[static_cast<std::size_t>(c)] = e;
    });
  }
  trap.rethrow();
  Extrema total;
  for (const auto& p : partial) total.merge(p);
  return total;
}

/// Sums of f over the dyadic blocks [2^k, 2^{k+1}) clipped to [1, n_max].
/// Element k holds block k; the last block may be partial.
template <class F>
std::vector<double> dyadic_block_sums(long n_max, const F& f) {
  std::vector<double> blocks;
  for (long start = 1; start <= n_max; start *= 2) {
    const long stop = std::min(n_max, 2 * start - 1);
    blocks.push_back(sum(start, stop, f));
  }
  return blocks;
}

/// Evaluates f at every n in [lo, hi] into a vector (element 0 is f(lo)).
template <class F>
std::vector<double> tabulate(long lo, long hi, const F& f) {
  std::vector<double> out(hi >= lo ? static_cast<std::size_t>(hi - lo + 1) : 0U);
  detail::ExceptionTrap trap;
  const long count = static_cast<long>(out.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < count; ++i) {
    trap.run([&] { out[static_cast<std::size_t>(i)] = f(lo + i); });
  }
  trap.rethrow();
  return out;
}

/// Number of worker threads the parallel kernels will use.
inline int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace deltasa::kernels
