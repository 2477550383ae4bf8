#include <benchmark/benchmark.h>

#include "cqns/heuristics.hpp"
#include "cqns/qubo.hpp"
#include "cqns/scoring.hpp"
#include "fixtures.hpp"

namespace {

using namespace cqns;

constexpr std::size_t kEvals = 1000;

SolverBudget budget(std::uint64_t seed) {
    SolverBudget b;
    b.max_evaluations = kEvals;
    b.max_seconds = 60.0;
    b.seed = seed;
    return b;
}

// All four solvers at the same evaluation budget on the same universe, so
// the relative per-evaluation overhead of each strategy is visible.
void BM_MonteCarlo(benchmark::State& state) {
    Universe u = bench::make_universe(50);
    CqnsPower w = calibrate_power(u).power;
    McConfig cfg;
    cfg.mode = McMode::fixed_k;
    cfg.k = 20;

    std::uint64_t seed = 1;
    for (auto _ : state)
        benchmark::DoNotOptimize(monte_carlo(u, w, cfg, budget(seed++)));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kEvals));
}
BENCHMARK(BM_MonteCarlo)->Unit(benchmark::kMillisecond);

void BM_SimulatedAnnealing(benchmark::State& state) {
    Universe u = bench::make_universe(50);
    CqnsPower w = calibrate_power(u).power;

    std::uint64_t seed = 1;
    for (auto _ : state)
        benchmark::DoNotOptimize(simulated_annealing(u, w, 20, SaSchedule{}, budget(seed++)));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kEvals));
}
BENCHMARK(BM_SimulatedAnnealing)->Unit(benchmark::kMillisecond);

void BM_Genetic(benchmark::State& state) {
    Universe u = bench::make_universe(50);
    CqnsPower w = calibrate_power(u).power;

    std::uint64_t seed = 1;
    for (auto _ : state)
        benchmark::DoNotOptimize(genetic(u, w, 20, GaConfig{}, budget(seed++)));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kEvals));
}
BENCHMARK(BM_Genetic)->Unit(benchmark::kMillisecond);

void BM_TabuSearch(benchmark::State& state) {
    Universe u = bench::make_universe(50);
    QuboBuildSpec spec;
    spec.target_k = 20;
    spec.power = calibrate_power(u).power;
    Qubo q = scale_qubo(build_cqns_qubo(u, spec), spec.scale_range).qubo;

    std::uint64_t seed = 1;
    for (auto _ : state)
        benchmark::DoNotOptimize(tabu_search(q, TabuParams{}, budget(seed++)));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kEvals));
}
BENCHMARK(BM_TabuSearch)->Unit(benchmark::kMillisecond);

}  // namespace
