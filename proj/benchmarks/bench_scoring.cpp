#include <random>

#include <benchmark/benchmark.h>

#include "cqns/scoring.hpp"
#include "fixtures.hpp"

namespace {

using namespace cqns;

// Score evaluation is the inner loop of every heuristic, so its cost per
// call bounds the evaluation budgets a wall-clock-constrained run can spend.
void BM_CqnsFinal(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Universe u = bench::make_universe(n);
    CqnsPower w = calibrate_power(u).power;

    std::mt19937_64 rng(17);
    std::vector<Portfolio> subsets;
    for (int i = 0; i < 256; ++i) {
        Portfolio p(n);
        while (p.cardinality() < n / 2)
            p.set(rng() % n, true);
        subsets.push_back(std::move(p));
    }

    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cqns_final(u, subsets[i & 255], w));
        ++i;
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_CqnsFinal)->Arg(50)->Arg(134);

void BM_PortfolioVariance(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Universe u = bench::make_universe(n);
    Portfolio half = Portfolio::all_in(n);
    for (std::size_t j = 0; j < n; j += 2) half.set(j, false);

    for (auto _ : state)
        benchmark::DoNotOptimize(portfolio_variance(u, half));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_PortfolioVariance)->Arg(50)->Arg(134);

void BM_CalibratePower(benchmark::State& state) {
    Universe u = bench::make_universe(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(calibrate_power(u));
}
BENCHMARK(BM_CalibratePower)->Arg(134);

}  // namespace
