#include <benchmark/benchmark.h>

#include "disempower/analysis.hpp"
#include "disempower/scenario.hpp"
#include "disempower/simulation.hpp"

using namespace disempower;

static void BM_Simulate(benchmark::State& state) {
    const ScenarioConfig s = builtin_scenario("full-architecture");
    const double horizon = static_cast<double>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate(s.initial, s.params, s.interventions, horizon));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(horizon / s.params.dt));
}
BENCHMARK(BM_Simulate)->Arg(60)->Arg(600);

static void BM_Threshold(benchmark::State& state) {
    const ModelParams p = builtin_scenario("baseline").params;
    for (auto _ : state) benchmark::DoNotOptimize(estimate_reversibility_threshold(p));
}
BENCHMARK(BM_Threshold);

static void BM_Sweep(benchmark::State& state) {
    const ScenarioConfig s = builtin_scenario("baseline");
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(sweep(s, {0.03, 0.15, n}, {0.02, 0.15, n}));
    }
    state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_Sweep)->Arg(7)->Arg(25)->UseRealTime();

static void BM_MonteCarlo(benchmark::State& state) {
    const ScenarioConfig s = builtin_scenario("decoupled");
    for (auto _ : state) {
        benchmark::DoNotOptimize(monte_carlo_band(s, default_intervals(), 200, 7));
    }
}
BENCHMARK(BM_MonteCarlo)->UseRealTime();

BENCHMARK_MAIN();
