#include <vector>

#include <benchmark/benchmark.h>

#include "cqns/qubo.hpp"
#include "cqns/scoring.hpp"
#include "fixtures.hpp"

namespace {

using namespace cqns;

void BM_BuildCqnsQubo(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Universe u = bench::make_universe(n);
    QuboBuildSpec spec;
    spec.target_k = n / 3;
    spec.power = calibrate_power(u).power;

    for (auto _ : state)
        benchmark::DoNotOptimize(build_cqns_qubo(u, spec));
}
BENCHMARK(BM_BuildCqnsQubo)->Arg(50)->Arg(134);

void BM_QuboToIsing(benchmark::State& state) {
    Qubo q = bench::random_qubo(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(qubo_to_ising(q));
}
BENCHMARK(BM_QuboToIsing)->Arg(134)->Arg(512);

// One energy evaluation is the unit of work tabu search spends its budget
// on; the N^2 matrix-vector product dominates.
void BM_QuboEnergy(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Qubo q = bench::random_qubo(n);
    std::vector<int> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = i % 2;

    for (auto _ : state)
        benchmark::DoNotOptimize(qubo_energy(q, x));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_QuboEnergy)->Arg(134)->Arg(512)->Arg(1024);

void BM_IsingEnergy(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    IsingModel m = qubo_to_ising(bench::random_qubo(n));
    std::vector<int> z(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = (i % 2) * 2 - 1;

    for (auto _ : state)
        benchmark::DoNotOptimize(ising_energy(m, z));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_IsingEnergy)->Arg(134)->Arg(512)->Arg(1024);

}  // namespace
