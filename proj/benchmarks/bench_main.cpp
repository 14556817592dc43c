#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "curvevo/bspline.hpp"
#include "curvevo/cover.hpp"
#include "curvevo/evolve.hpp"
#include "curvevo/fit.hpp"
#include "curvevo/scenario.hpp"

using namespace curvevo;

namespace {

PointCloud circle_cloud(std::size_t n) {
    ShapeSpec s;
    s.count = n;
    return generate_shape(s);
}

void BM_BasisEvaluation(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    const KnotVector kv = KnotVector::clamped(static_cast<std::size_t>(p) + 6, p);
    std::vector<double> out(static_cast<std::size_t>(p) + 1);
    double u = 0.0;
    for (auto _ : state) {
        u = std::fmod(u + 0.1234567, 1.0);
        nonzero_basis(kv, kv.find_span(u), u, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_BasisEvaluation)->DenseRange(3, 7, 2);

void BM_CurveEvaluation(benchmark::State& state) {
    const PointCloud pc = circle_cloud(40);
    const StencilFit fit = fit_stencil(pc.points(), partition(pc.size(), 1, 8).stencils[0], 7, 0.0, 0);
    double u = 0.0;
    for (auto _ : state) {
        u = std::fmod(u + 0.1234567, 1.0);
        benchmark::DoNotOptimize(fit.curve.evaluate(u));
    }
}
BENCHMARK(BM_CurveEvaluation);

void BM_StencilFit(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const PointCloud pc = circle_cloud(100);
    const std::size_t core = m % 2 == 1 ? 1 : 2;
    const Stencil s = partition(pc.size(), core, m - core).stencils[0];
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_stencil(pc.points(), s, static_cast<int>(m) - 2, 0.0, 0));
    }
}
BENCHMARK(BM_StencilFit)->Arg(5)->Arg(9)->Arg(15)->Arg(20);

void BM_EvolverStep(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    EvolutionConfig cfg;
    cfg.dt = 1e-7;
    cfg.t_end = 1.0;
    cfg.resample = false;
    Evolver ev(circle_cloud(n), cfg);
    ev.step();
    for (auto _ : state) {
        ev.step();
    }
    state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(BM_EvolverStep)->RangeMultiplier(2)->Range(100, 800)->Complexity(benchmark::oN);

} // namespace

BENCHMARK_MAIN();
