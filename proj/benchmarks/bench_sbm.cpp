#include <benchmark/benchmark.h>

#include "cqns/qubo.hpp"
#include "cqns/sbm.hpp"
#include "fixtures.hpp"

namespace {

using namespace cqns;

// Whole-run cost at a fixed iteration count. The per-iteration cost is the
// J*x product, so items/sec here is iterations/sec at the given size.
void BM_SbmRun(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    IsingModel m = qubo_to_ising(bench::random_qubo(n));
    constexpr std::size_t kIterations = 200;
    SbmParams params;
    params.iterations = kIterations;

    std::uint64_t seed = 1;
    for (auto _ : state) {
        params.seed = seed++;
        benchmark::DoNotOptimize(run_sbm(m, params));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kIterations));
}
BENCHMARK(BM_SbmRun)->Arg(64)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
