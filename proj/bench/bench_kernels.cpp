// Parallel kernels against their serial references on the workloads the
// criteria actually run: series terms, tail suprema and dyadic block sums
// over a power-log grid, plus the (inherently serial) recurrence solver.

#include <benchmark/benchmark.h>

#include <cmath>

#include "deltasa/deficiency.hpp"
#include "deltasa/kernels_reference.hpp"

using namespace deltasa;

namespace {

const GridSequence& grid() {
  static const GridSequence g = GridSequence::power_log(0.75, 0.0);
  return g;
}

// d_n^3 |alpha_n| with alpha_n ~ 2 n^0.75: the cubic-series term.
double term(long n) {
  const double d = grid().gap(n);
  return d * d * d * 2.0 * std::pow(static_cast<double>(n), 0.75);
}

double ratio(long n) { return grid().gap_ratio_m1(n, 1); }

void BM_sum_parallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::sum(1, st.range(0), term));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_sum_serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::reference::sum(1, st.range(0), term));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_extrema_parallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::extrema(2, st.range(0), ratio));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_extrema_serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::reference::extrema(2, st.range(0), ratio));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_blocks_parallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::dyadic_block_sums(st.range(0), term));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_blocks_serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::reference::dyadic_block_sums(st.range(0), term));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_tabulate_parallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::tabulate(1, st.range(0), term));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_tabulate_serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::reference::tabulate(1, st.range(0), term));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_recurrence(benchmark::State& st) {
  const JacobiOperator op(grid(), AlphaSequence::scaled_inverse_gaps(-0.5));
  for (auto _ : st) benchmark::DoNotOptimize(solve_recurrence(op, {0.0, 1.0}, st.range(0)).log_block_mass);
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

BENCHMARK(BM_sum_parallel)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sum_serial)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_extrema_parallel)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_extrema_serial)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_blocks_parallel)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_blocks_serial)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_tabulate_parallel)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_tabulate_serial)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_recurrence)->Arg(1 << 17)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
