#include <cmath>

#include <benchmark/benchmark.h>

#include "sphsmooth/bayes.hpp"
#include "sphsmooth/sampling.hpp"
#include "sphsmooth/spline.hpp"

using namespace sphsmooth;

namespace {

RegressionData smooth_data(std::size_t n) {
    Rng rng(3);
    RegressionData d;
    d.points = uniform_sphere(n, rng);
    d.y.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) d.y(static_cast<Eigen::Index>(i)) = std::exp(d.points[i].unit().z());
    d.y += 0.05 * normal_vector(d.y.size(), rng);
    return d;
}

}  // namespace

static void BM_FitSpline(benchmark::State& state) {
    const RegressionData d = smooth_data(static_cast<std::size_t>(state.range(0)));
    const KernelSpec k = full_kernel(3);
    for (auto _ : state) benchmark::DoNotOptimize(fit_spline(d, k, 1e-4));
}
BENCHMARK(BM_FitSpline)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_VPosterior(benchmark::State& state) {
    const RegressionData d = smooth_data(static_cast<std::size_t>(state.range(0)));
    const BasisSpec spec(3, 2.0, WeightScheme::Iota);
    const PriorSpec prior = PriorSpec::defaults(3);
    const BranchCovariances cov = build_branch_covariances(spec, prior, d.points);
    const BranchReduction red = spectral_reduce(design_matrix(spec, d.points), cov.gamma1, cov.tail, d.y);
    for (auto _ : state) benchmark::DoNotOptimize(v_posterior_density(red, prior));
}
BENCHMARK(BM_VPosterior)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);

static void BM_FitHierarchical(benchmark::State& state) {
    const RegressionData d = smooth_data(static_cast<std::size_t>(state.range(0)));
    const BasisSpec spec(3, 2.0, WeightScheme::Iota);
    for (auto _ : state) benchmark::DoNotOptimize(fit_hierarchical(d, spec, PriorSpec::defaults(3)));
}
BENCHMARK(BM_FitHierarchical)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
