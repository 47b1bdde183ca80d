// Serial reference vs OpenMP kernels.
#include "willmore/flow.hpp"
#include "willmore/functionals.hpp"
#include "willmore/generators.hpp"
#include "willmore/intersect.hpp"
#include "willmore/operators.hpp"

#include <benchmark/benchmark.h>

using namespace willmore;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(1) ? Exec::parallel : Exec::serial; }

const Mesh& sphere(int subdiv)
{
    static const Mesh meshes[] = {icosphere(3), icosphere(4), icosphere(5)};
    return meshes[subdiv - 3];
}

void BM_Laplacian(benchmark::State& state)
{
    const Mesh& m = sphere(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(laplacian_data(m, exec_of(state)));
    state.SetLabel(state.range(1) ? "parallel" : "serial");
}

void BM_MeanCurvature(benchmark::State& state)
{
    const Mesh& m = sphere(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(mean_curvature(m, exec_of(state)));
    state.SetLabel(state.range(1) ? "parallel" : "serial");
}

void BM_WillmoreGradient(benchmark::State& state)
{
    const Mesh& m = sphere(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(willmore_gradient(m, exec_of(state)));
    state.SetLabel(state.range(1) ? "parallel" : "serial");
}

void BM_SelfIntersects(benchmark::State& state)
{
    const Mesh& m = sphere(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(self_intersects(m, exec_of(state)));
    state.SetLabel(state.range(1) ? "parallel" : "serial");
}

void BM_Diameter(benchmark::State& state)
{
    const Mesh& m = sphere(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(diameter_brute_force(m.positions(), exec_of(state)));
    state.SetLabel(state.range(1) ? "parallel" : "serial");
}

}  // namespace

BENCHMARK(BM_Laplacian)->ArgsProduct({{3, 4, 5}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MeanCurvature)->ArgsProduct({{3, 4, 5}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WillmoreGradient)->ArgsProduct({{3, 4, 5}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SelfIntersects)->ArgsProduct({{3, 4, 5}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Diameter)->ArgsProduct({{3, 4}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
