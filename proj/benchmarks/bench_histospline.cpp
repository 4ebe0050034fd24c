#include <benchmark/benchmark.h>

#include "sphsmooth/histospline.hpp"

using namespace sphsmooth;

static void BM_CellKernelMatrix(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(cell_kernel_matrix(3, m, default_series_degree(m), KernelBranch::Full));
}
BENCHMARK(BM_CellKernelMatrix)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);
