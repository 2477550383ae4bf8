#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cqns/market_data.hpp"
#include "cqns/qubo.hpp"
#include "cqns/scoring.hpp"

namespace cqns {

// Wall-clock limits are advisory; when reproducibility matters, cap the run
// by max_evaluations instead and fix the seed.
struct SolverBudget {
    double max_seconds = 300.0;
    std::optional<std::uint64_t> max_evaluations;
    std::uint64_t seed = 0;
};

struct PoolEntry {
    Portfolio selection;
    double score = 0.0;
    std::string source;
    std::uint64_t sequence = 0;  // insertion order within the owning pool
};

// Collects the "better" portfolios a solver encounters: an entry is accepted
// when it improves on the pool's best at insertion time, and each solver
// additionally force-inserts its final best. Selections are unique; the
// first-seen entry wins on duplicates.
class SolutionPool {
public:
    SolutionPool() = default;
    explicit SolutionPool(std::size_t universe_size,
                          std::optional<std::size_t> capacity = std::nullopt);

    std::size_t universe_size() const { return n_; }
    std::optional<std::size_t> capacity() const { return capacity_; }

    // Insert only if the score beats the current pool best (or the pool is
    // empty). Returns true when the entry was stored.
    bool offer(const Portfolio& selection, double score, const std::string& source);

    // Unconditional insert (still deduplicated); used for final bests.
    bool insert(const Portfolio& selection, double score, const std::string& source);

    bool contains(const Portfolio& selection) const;
    std::optional<PoolEntry> best() const;
    std::size_t size() const;
    bool empty() const { return size() == 0; }

    // Snapshot in insertion order.
    std::vector<PoolEntry> entries() const;

    // Snapshot sorted ascending by score (ties keep insertion order).
    std::vector<PoolEntry> ranked() const;

    // One JSON object per line: {"selection":"<hex>","score":...,"source":...,"k":...}
    std::string to_jsonl() const;
    static SolutionPool from_jsonl(std::size_t universe_size, const std::string& text);

private:
    bool store(const Portfolio& selection, double score, const std::string& source);

    std::size_t n_ = 0;
    std::optional<std::size_t> capacity_;
    std::vector<PoolEntry> entries_;
    std::uint64_t next_sequence_ = 0;
    mutable std::mutex mutex_;

public:
    SolutionPool(const SolutionPool& other);
    SolutionPool& operator=(const SolutionPool& other);
    SolutionPool(SolutionPool&& other) noexcept;
    SolutionPool& operator=(SolutionPool&& other) noexcept;
};

// Union of the inputs, deduplicated by selection (first-seen entry and source
// tag win), sorted ascending by score.
SolutionPool pool_merge(const std::vector<SolutionPool>& pools);

// Per-evaluation progress rows for the score-vs-sequence charts. QUBO/Ising
// solvers record their native energy in `score` and leave `sharpe` unset.
struct TraceRow {
    double score = 0.0;
    std::optional<double> sharpe;
    std::size_t cardinality = 0;
};
using ScoreTrace = std::vector<TraceRow>;

enum class McMode { around_half, fixed_k };

struct McConfig {
    McMode mode = McMode::around_half;
    std::size_t k = 0;  // required for fixed_k
};

SolutionPool monte_carlo(const Universe& u, CqnsPower w, const McConfig& mode,
                         const SolverBudget& budget, ScoreTrace* trace = nullptr);

struct SaSchedule {
    // When unset, calibrated as the standard deviation of the score over
    // `calibration_samples` random k-subsets.
    std::optional<double> initial_temperature;
    double cooling_ratio = 0.995;
    std::size_t calibration_samples = 200;
};

SolutionPool simulated_annealing(const Universe& u, CqnsPower w, std::size_t k,
                                 const SaSchedule& schedule, const SolverBudget& budget,
                                 ScoreTrace* trace = nullptr);

struct GaConfig {
    std::size_t population_size = 64;
    std::size_t generations = 80;
    double crossover_rate = 0.9;
    double mutation_rate = 0.05;
    std::size_t elitism_count = 2;
    std::vector<Portfolio> seeds;
};

SolutionPool genetic(const Universe& u, CqnsPower w, std::size_t k, const GaConfig& cfg,
                     const SolverBudget& budget, ScoreTrace* trace = nullptr);

struct TabuParams {
    std::optional<std::size_t> tenure;  // default: ceil(N / 10)
    std::size_t restart_after = 5000;   // non-improving moves before a restart
};

// Plain single-flip tabu search over the QUBO. Scores in the returned pool
// are QUBO energies and cardinality is not constrained.
SolutionPool tabu_search(const Qubo& q, const TabuParams& params, const SolverBudget& budget,
                         ScoreTrace* trace = nullptr);

}  // namespace cqns
