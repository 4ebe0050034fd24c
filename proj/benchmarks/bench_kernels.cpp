#include <benchmark/benchmark.h>

#include "sphsmooth/kernels.hpp"
#include "sphsmooth/sampling.hpp"

using namespace sphsmooth;

static void BM_FullKernelMatrix(benchmark::State& state) {
    Rng rng(1);
    const auto pts = uniform_sphere(static_cast<std::size_t>(state.range(0)), rng);
    const KernelSpec k = full_kernel(4);
    for (auto _ : state) benchmark::DoNotOptimize(kernel_matrix(k, pts));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FullKernelMatrix)->RangeMultiplier(2)->Range(100, 800)->Complexity(benchmark::oNSquared);

// series kernel, the slow path
static void BM_ZonalKernelMatrix(benchmark::State& state) {
    Rng rng(2);
    const auto pts = uniform_sphere(static_cast<std::size_t>(state.range(0)), rng);
    const KernelSpec k = zonal_kernel(4);
    for (auto _ : state) benchmark::DoNotOptimize(kernel_matrix(k, pts));
}
BENCHMARK(BM_ZonalKernelMatrix)->Arg(100)->Arg(200);
