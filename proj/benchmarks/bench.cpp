#include <benchmark/benchmark.h>

#include "markoff/identity.hpp"
#include "markoff/markoff_map.hpp"

using namespace markoff;

static void BM_eval_deep(benchmark::State& state) {
    MuMarkoffMap m = MuMarkoffMap::from_triple(3, 3, 3);
    FareyFraction r = FareyFraction::make(514229, 832040); // consecutive Fibonaccis
    for (auto _ : state) benchmark::DoNotOptimize(m.eval(r));
}
BENCHMARK(BM_eval_deep);

static void BM_eval_long_fan(benchmark::State& state) {
    MuMarkoffMap m = MuMarkoffMap::from_triple(3, 3, 3);
    FareyFraction r = FareyFraction::make(1'000'000, 1);
    for (auto _ : state) benchmark::DoNotOptimize(m.eval(r));
}
BENCHMARK(BM_eval_long_fan);

static void BM_omega_scan(benchmark::State& state) {
    MuMarkoffMap m = MuMarkoffMap::from_triple(2, complexd{2, -1}, complexd{2, -3});
    SearchBudget b;
    for (auto _ : state) benchmark::DoNotOptimize(omega_leq(m, 2.0, b));
}
BENCHMARK(BM_omega_scan);

static void BM_branch_sum(benchmark::State& state) {
    MuMarkoffMap m = MuMarkoffMap::from_triple(3, 3, 3);
    TreeEdge e = TreeEdge::make({0, 1}, {1, 1});
    DirectedEdge de = DirectedEdge::make(e, FareyFraction::infinity());
    SearchBudget b;
    for (auto _ : state)
        benchmark::DoNotOptimize(branch_sum(m, de, 1e-9, b));
}
BENCHMARK(BM_branch_sum);

static void BM_mcshane_fuchsian(benchmark::State& state) {
    MuMarkoffMap m = MuMarkoffMap::from_triple(3, 3, 3);
    SearchBudget b;
    for (auto _ : state) benchmark::DoNotOptimize(mcshane_sum(m, 1e-8, b));
}
BENCHMARK(BM_mcshane_fuchsian);

BENCHMARK_MAIN();
