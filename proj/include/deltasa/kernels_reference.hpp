#pragma once

// Plain serial versions of the kernels in kernels.hpp. Kept for tests and
// the benchmark; nothing in the library calls these.

#include <vector>

#include "deltasa/kernels.hpp"

namespace deltasa::kernels::reference {

template <class F>
double sum(long lo, long hi, const F& f) {
  CompensatedSum acc;
  for (long n = lo; n <= hi; ++n) acc.add(f(n));
  return acc.value();
}

template <class F>
Extrema extrema(long lo, long hi, const F& f) {
  Extrema e;
  for (long n = lo; n <= hi; ++n) e.add(n, f(n));
  return e;
}

template <class F>
std::vector<double> dyadic_block_sums(long n_max, const F& f) {
  std::vector<double> blocks;
  for (long start = 1; start <= n_max; start *= 2) {
    const long stop = n_max < 2 * start - 1 ? n_max : 2 * start - 1;
    blocks.push_back(sum(start, stop, f));
  }
  return blocks;
}

template <class F>
std::vector<double> tabulate(long lo, long hi, const F& f) {
  std::vector<double> out;
  for (long n = lo; n <= hi; ++n) out.push_back(f(n));
  return out;
}

}  // namespace deltasa::kernels::reference
