// Timing comparison of the speed kernel: OpenMP-parallel production path
// against the plain serial twin and the generic shape-module reference.
#include <benchmark/benchmark.h>

#include <cmath>

#include "qkflow/flow.hpp"

using namespace qkf;

namespace {

flow::GraphPatch bench_patch(int points)
{
    const double hw = 0.5;
    const double h = 2.0 * hw / (points - 1);
    flow::GraphPatch p =
        flow::GraphPatch::box(points, points, h, -hw, -hw, flow::BoundaryKind::Dirichlet);
    const double r0 = 1.0;
    p.boundary = [r0](double x, double y, double) {
        return 1.25 - std::sqrt(r0 * r0 - x * x - y * y);
    };
    p.fill([&](double x, double y) { return 1.25 - std::sqrt(r0 * r0 - x * x - y * y); });
    return p;
}

void bm_rhs_parallel(benchmark::State& state)
{
    const flow::GraphPatch p = bench_patch(static_cast<int>(state.range(0)));
    const int k = static_cast<int>(state.range(1));
    for (auto _ : state) {
        const flow::KernelResult r = flow::rhs(p, k);
        benchmark::DoNotOptimize(r.max_trace);
    }
    state.SetItemsProcessed(state.iterations() * p.total());
}

void bm_rhs_serial(benchmark::State& state)
{
    const flow::GraphPatch p = bench_patch(static_cast<int>(state.range(0)));
    const int k = static_cast<int>(state.range(1));
    for (auto _ : state) {
        const flow::KernelResult r = flow::rhs_serial(p, k);
        benchmark::DoNotOptimize(r.max_trace);
    }
    state.SetItemsProcessed(state.iterations() * p.total());
}

void bm_rhs_reference(benchmark::State& state)
{
    const flow::GraphPatch p = bench_patch(static_cast<int>(state.range(0)));
    const int k = static_cast<int>(state.range(1));
    for (auto _ : state) {
        const std::vector<double> f = flow::rhs_reference(p, k);
        benchmark::DoNotOptimize(f.data());
    }
    state.SetItemsProcessed(state.iterations() * p.total());
}

} // namespace

BENCHMARK(bm_rhs_parallel)->Args({257, 0})->Args({257, 1})->Args({513, 1});
BENCHMARK(bm_rhs_serial)->Args({257, 0})->Args({257, 1})->Args({513, 1});
BENCHMARK(bm_rhs_reference)->Args({129, 1});

BENCHMARK_MAIN();
