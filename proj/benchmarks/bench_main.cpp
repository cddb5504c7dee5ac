#include <benchmark/benchmark.h>

#include "glassform/compensation.hpp"
#include "glassform/surrogate.hpp"

using namespace glassform;

namespace {

FormingCase cover_case() {
    const auto cat = MaterialCatalog::builtin();
    FormingCase c;
    c.target.surface = AsphericSurface{0.04, -2.0, {0.0, 1.1e-5, 3.9e-7, 7.3e-10}, 15.0};
    c.target.r_max_mm = 15.0;
    c.target.thickness_mm = 0.7;
    c.target.glass = cat.glass("GG");
    c.mold = cat.mold("glassy_carbon");
    return c;
}

void BM_ResidualFraction(benchmark::State& state) {
    const auto gg = MaterialCatalog::builtin().glass("GG");
    const ThermalSchedule s;
    for (auto _ : state) benchmark::DoNotOptimize(residual_fraction(s, gg.prony, gg.wlf));
}
BENCHMARK(BM_ResidualFraction);

void BM_SimulateForming(benchmark::State& state) {
    auto c = cover_case();
    c.config.grid_points = static_cast<std::size_t>(state.range(0));
    const auto molds = design_initial_molds(c);
    for (auto _ : state) benchmark::DoNotOptimize(simulate_forming(molds, c));
}
BENCHMARK(BM_SimulateForming)->Arg(201)->Arg(401)->Unit(benchmark::kMicrosecond);

void BM_RunCompensation(benchmark::State& state) {
    const auto c = cover_case();
    for (auto _ : state) benchmark::DoNotOptimize(run_compensation(c));
}
BENCHMARK(BM_RunCompensation)->Unit(benchmark::kMillisecond);

void BM_Forward(benchmark::State& state) {
    const auto net = init_network(1, SurfaceTag::Upper);
    const std::array<double, 6> x{0.4, 0.05, 0.3, 0.5, 1.0, 700.0};
    for (auto _ : state) benchmark::DoNotOptimize(forward(net, x));
}
BENCHMARK(BM_Forward);

}  // namespace

BENCHMARK_MAIN();
