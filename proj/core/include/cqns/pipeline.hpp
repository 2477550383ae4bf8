#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cqns/heuristics.hpp"
#include "cqns/market_data.hpp"
#include "cqns/qubo.hpp"
#include "cqns/sbm.hpp"
#include "cqns/scoring.hpp"

namespace cqns {

/// carry_forward keeps the power calibrated on the full universe for the
/// restricted stage; recalibrate solves for a fresh power on the
/// sub-universe, which makes stage scores incomparable across stages.
enum class PowerPolicy { carry_forward, recalibrate };

struct PipelineConfig {
    std::size_t step1_target_n = 0;
    std::vector<std::size_t> step2_target_ks;  // empty: derived from step1_target_n
    SolverBudget per_solver_budget;            // seed acts as the master seed
    QuboBuildSpec qubo_spec;                   // target_k and power filled per run
    PowerPolicy power_policy = PowerPolicy::carry_forward;
    SaSchedule sa;
    GaConfig ga;  // seeds are supplied by the pipeline itself
    TabuParams tabu;
    SbmParams sbm;  // seed is overridden per run
    bool concurrent = true;
};

/// {n/2, n/3, n/4, n/8, 3} rounded, clamped to [1, n], deduplicated,
/// descending.
std::vector<std::size_t> default_step2_ks(std::size_t step1_target_n);

/// One solver execution: its progress trace (one row per evaluation, the
/// chart series), its raw pool in the solver's native objective, and
/// wall-clock cost. Seconds are reported separately from the
/// deterministic artifacts.
struct SolverRun {
    std::string stage;   // "step1" or "step2/k=<k>"
    std::string solver;  // mc | sa | ga | tabu | sbm
    std::uint64_t evaluations = 0;
    double seconds = 0.0;
    ScoreTrace trace;
    SolutionPool pool;
};

struct Step1Result {
    CalibrationResult calibration;
    double all_in_score = 0.0;  // full universe, calibrated power
    SolutionPool pool;          // merged across solvers, full-universe indexing
    Portfolio selection;        // best exactly-n entry
    double selection_score = 0.0;
    std::vector<std::size_t> sub_indices;
    std::vector<std::string> sub_tickers;
    Universe sub;  // rebuilt from the selected return rows
    std::vector<SolverRun> runs;
};

/// A portfolio surfaced by any solver, re-scored with the ranking power.
/// Off-cardinality rows stay in the report but are barred from the final
/// ranking.
struct CandidateRow {
    Portfolio selection;  // sub-universe indexing
    std::size_t cardinality = 0;
    std::size_t target_k = 0;
    double cqns = 0.0;
    std::optional<double> sharpe;
    std::string source;
    std::string stage;
    bool valid = false;  // cardinality == target_k
};

struct PipelineReport {
    // Stage 1 (absent when run_step2 is invoked standalone).
    std::optional<Step1Result> step1;

    // Ranking scope: the universe candidates are scored against.
    std::vector<std::string> tickers;
    CalibrationResult ranking_calibration;
    PowerPolicy power_policy = PowerPolicy::carry_forward;
    double all_in_score = 0.0;  // all-in over the ranking universe

    std::vector<std::size_t> target_ks;
    std::map<std::size_t, SolutionPool> pools_by_k;  // cqns objective, merged
    std::vector<CandidateRow> candidates;

    Portfolio final_best;
    ScoreReport final_best_report;
    std::vector<SolverRun> runs;  // step-2 runs (step-1 runs live in step1)

    /// Deterministic document: no wall-clock content, keys sorted,
    /// shortest round-trip doubles.
    std::string to_json() const;
};

Step1Result run_step1(const Universe& u, const PipelineConfig& cfg);

/// carried_power feeds the carry_forward policy; when absent the power is
/// calibrated on `sub` regardless of policy.
PipelineReport run_step2(const Universe& sub, const PipelineConfig& cfg,
                         std::optional<CalibrationResult> carried_power = std::nullopt);

PipelineReport run_full(const Universe& u, const PipelineConfig& cfg);

}  // namespace cqns
