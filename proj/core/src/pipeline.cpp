#include "cqns/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <future>

#include <json.hpp>

#include "cqns/error.hpp"
#include "cqns/rng.hpp"

namespace cqns {

namespace {

constexpr const char* kVersion = "0.1.0";

double now_seconds(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

// cqns_final with the negative-mean / fractional-power domain error mapped
// to +inf, so undefined candidates drop out of rankings instead of
// aborting the run.
double scored_or_inf(const Universe& u, const Portfolio& p, CqnsPower w) {
    if (p.cardinality() == 0) return std::numeric_limits<double>::infinity();
    double mean = portfolio_mean(u, p);
    bool integer_power = std::isfinite(w.w) && w.w == std::floor(w.w);
    if (mean < 0.0 && !integer_power) return std::numeric_limits<double>::infinity();
    return cqns_final(u, p, w);
}

std::optional<double> sharpe_or_null(const Universe& u, const Portfolio& p) {
    if (p.cardinality() == 0) return std::nullopt;
    double var = portfolio_variance(u, p);
    if (!(var > 0.0)) return std::nullopt;
    return portfolio_mean(u, p) / std::sqrt(var);
}

SolverBudget derived_budget(const SolverBudget& base, const std::string& tag) {
    SolverBudget b = base;
    b.seed = derive_seed(base.seed, tag);
    return b;
}

// Runs the group either concurrently or in sequence; results come back in
// the callers' order either way, so downstream merges are identical.
std::vector<SolverRun> run_group(std::vector<std::function<SolverRun()>> jobs, bool concurrent) {
    std::vector<SolverRun> out;
    out.reserve(jobs.size());
    if (concurrent) {
        std::vector<std::future<SolverRun>> futures;
        futures.reserve(jobs.size());
        for (auto& job : jobs) futures.push_back(std::async(std::launch::async, job));
        for (auto& f : futures) out.push_back(f.get());
    } else {
        for (auto& job : jobs) out.push_back(job());
    }
    return out;
}

void validate_common(const PipelineConfig& cfg) {
    if (!(cfg.per_solver_budget.max_seconds > 0.0))
        raise(ErrorCode::InvalidArgument, "budget max_seconds must be positive");
}

std::vector<std::size_t> resolve_ks(const PipelineConfig& cfg, std::size_t bound,
                                    ErrorCode bound_error) {
    std::vector<std::size_t> ks =
        cfg.step2_target_ks.empty() ? default_step2_ks(cfg.step1_target_n ? cfg.step1_target_n
                                                                          : bound)
                                    : cfg.step2_target_ks;
    for (std::size_t k : ks) {
        if (k < 1 || k > bound)
            raise(bound_error, "step-2 target k = " + std::to_string(k) +
                                   " outside [1, " + std::to_string(bound) + "]");
    }
    if (ks.empty()) raise(ErrorCode::InvalidTargetK, "no step-2 target sizes configured");
    return ks;
}

ScoreTrace sbm_trace_rows(const std::vector<std::pair<std::size_t, double>>& trace) {
    ScoreTrace rows;
    rows.reserve(trace.size());
    for (const auto& [iteration, energy] : trace) rows.push_back({energy, std::nullopt, 0});
    return rows;
}

nlohmann::json calibration_json(const CalibrationResult& c) {
    nlohmann::json j;
    j["power"] = c.power.w;
    j["degenerate"] = c.degenerate;
    return j;
}

nlohmann::json candidate_json(const CandidateRow& row) {
    nlohmann::json j;
    j["selection"] = row.selection.to_hex();
    j["cardinality"] = row.cardinality;
    j["target_k"] = row.target_k;
    j["cqns"] = row.cqns;
    if (row.sharpe)
        j["sharpe"] = *row.sharpe;
    else
        j["sharpe"] = nullptr;
    j["source"] = row.source;
    j["stage"] = row.stage;
    j["valid"] = row.valid;
    return j;
}

}  // namespace

std::vector<std::size_t> default_step2_ks(std::size_t step1_target_n) {
    const double n = static_cast<double>(step1_target_n);
    std::vector<double> fractions = {n / 2.0, n / 3.0, n / 4.0, n / 8.0, 3.0};
    std::vector<std::size_t> ks;
    for (double f : fractions) {
        auto k = static_cast<std::size_t>(std::llround(f));
        if (k >= 1 && k <= step1_target_n) ks.push_back(k);
    }
    std::sort(ks.begin(), ks.end(), std::greater<>());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    return ks;
}

Step1Result run_step1(const Universe& u, const PipelineConfig& cfg) {
    validate_common(cfg);
    const std::size_t n = u.size();
    if (cfg.step1_target_n < 1 || cfg.step1_target_n > n)
        raise(ErrorCode::InvalidTargetK,
              "step-1 target size " + std::to_string(cfg.step1_target_n) +
                  " outside [1, " + std::to_string(n) + "]");

    Step1Result result;
    result.calibration = calibrate_power(u);
    const CqnsPower w = result.calibration.power;
    result.all_in_score = cqns_final(u, Portfolio::all_in(n), w);

    const std::size_t target = cfg.step1_target_n;
    const SolverBudget& base = cfg.per_solver_budget;

    auto timed = [&](const std::string& solver,
                     const std::function<SolutionPool(ScoreTrace*)>& body) {
        return [solver, body]() {
            SolverRun run;
            run.stage = "step1";
            run.solver = solver;
            auto start = std::chrono::steady_clock::now();
            run.pool = body(&run.trace);
            run.seconds = now_seconds(start);
            run.evaluations = run.trace.size();
            return run;
        };
    };

    std::vector<std::function<SolverRun()>> jobs;
    jobs.push_back(timed("mc", [&](ScoreTrace* t) {
        return monte_carlo(u, w, {McMode::around_half, 0},
                           derived_budget(base, "step1/mc_half"), t);
    }));
    jobs.push_back(timed("mc", [&](ScoreTrace* t) {
        return monte_carlo(u, w, {McMode::fixed_k, target},
                           derived_budget(base, "step1/mc_fixed"), t);
    }));
    jobs.push_back(timed("ga", [&](ScoreTrace* t) {
        GaConfig ga = cfg.ga;
        ga.seeds.clear();  // step 1 runs the GA from a random population
        return genetic(u, w, target, ga, derived_budget(base, "step1/ga"), t);
    }));
    jobs.push_back(timed("sa", [&](ScoreTrace* t) {
        return simulated_annealing(u, w, target, cfg.sa, derived_budget(base, "step1/sa"), t);
    }));

    result.runs = run_group(std::move(jobs), cfg.concurrent);

    std::vector<SolutionPool> pools;
    for (const SolverRun& run : result.runs) pools.push_back(run.pool);
    result.pool = pool_merge(pools);
    if (result.pool.empty())
        raise(ErrorCode::EmptyPool, "no solver produced a scorable portfolio in step 1");

    bool found = false;
    for (const PoolEntry& e : result.pool.ranked()) {
        if (e.selection.cardinality() == target) {
            result.selection = e.selection;
            result.selection_score = e.score;
            found = true;
            break;
        }
    }
    if (!found)
        raise(ErrorCode::EmptyPool,
              "no portfolio of the step-1 target size " + std::to_string(target) + " was found");

    result.sub_indices = result.selection.indices();
    Eigen::MatrixXd sub_returns(static_cast<Eigen::Index>(result.sub_indices.size()),
                                u.returns.cols());
    for (std::size_t r = 0; r < result.sub_indices.size(); ++r) {
        sub_returns.row(static_cast<Eigen::Index>(r)) =
            u.returns.row(static_cast<Eigen::Index>(result.sub_indices[r]));
        result.sub_tickers.push_back(u.tickers[result.sub_indices[r]]);
    }
    result.sub = make_universe(result.sub_tickers, sub_returns, u.index_returns);
    return result;
}

PipelineReport run_step2(const Universe& sub, const PipelineConfig& cfg,
                         std::optional<CalibrationResult> carried_power) {
    validate_common(cfg);
    const std::size_t n = sub.size();
    if (n < 2) raise(ErrorCode::InvalidSubUniverse, "sub-universe needs at least two assets");
    std::vector<std::size_t> ks = resolve_ks(cfg, n, ErrorCode::InvalidSubUniverse);

    PipelineReport report;
    report.tickers = sub.tickers;
    report.power_policy = cfg.power_policy;
    report.target_ks = ks;

    if (cfg.power_policy == PowerPolicy::carry_forward && carried_power) {
        report.ranking_calibration = *carried_power;
        // The all-in reference stays the one the power was calibrated on;
        // the caller carries that value. Recompute over the sub-universe
        // for visibility all the same.
        report.all_in_score = cqns_final(sub, Portfolio::all_in(n), report.ranking_calibration.power);
    } else {
        report.ranking_calibration = calibrate_power(sub);
        report.all_in_score = cqns_final(sub, Portfolio::all_in(n), report.ranking_calibration.power);
    }
    const CqnsPower w = report.ranking_calibration.power;
    const SolverBudget& base = cfg.per_solver_budget;

    for (std::size_t k : ks) {
        const std::string stage = "step2/k=" + std::to_string(k);
        QuboBuildSpec qspec = cfg.qubo_spec;
        qspec.target_k = k;
        qspec.power = w;
        Qubo qubo = build_cqns_qubo(sub, qspec);
        ScaledQubo scaled = scale_qubo(qubo, qspec.scale_range);
        IsingModel ising = qubo_to_ising(scaled.qubo);

        auto timed = [&stage](const std::string& solver,
                              const std::function<SolutionPool(ScoreTrace*)>& body) {
            return [stage, solver, body]() {
                SolverRun run;
                run.stage = stage;
                run.solver = solver;
                auto start = std::chrono::steady_clock::now();
                run.pool = body(&run.trace);
                run.seconds = now_seconds(start);
                run.evaluations = run.trace.size();
                return run;
            };
        };

        std::vector<std::function<SolverRun()>> jobs;
        jobs.push_back(timed("sa", [&, k](ScoreTrace* t) {
            return simulated_annealing(sub, w, k, cfg.sa,
                                       derived_budget(base, stage + "/sa"), t);
        }));
        jobs.push_back(timed("sbm", [&, k](ScoreTrace* t) {
            SbmParams params = cfg.sbm;
            params.seed = derive_seed(base.seed, stage + "/sbm");
            params.record_trace = true;
            SbmResult r = run_sbm(ising, params);
            *t = sbm_trace_rows(r.trace);
            std::vector<int> bits(r.best_spins.size());
            for (std::size_t i = 0; i < bits.size(); ++i)
                bits[i] = (r.best_spins[i] + 1) / 2;
            SolutionPool pool(sub.size());
            pool.insert(portfolio_from_bits(bits), r.best_energy, "sbm");
            return pool;
        }));
        jobs.push_back(timed("tabu", [&](ScoreTrace* t) {
            return tabu_search(scaled.qubo, cfg.tabu, derived_budget(base, stage + "/tabu"), t);
        }));

        std::vector<SolverRun> runs = run_group(std::move(jobs), cfg.concurrent);

        // Re-score everything the solvers surfaced with the ranking power.
        // Feasible (exactly-k) selections join the merged pool; everything
        // else is reported but barred from the ranking.
        SolutionPool feasible(n);
        std::vector<Portfolio> off_k;  // still usable as GA seed material
        for (const SolverRun& run : runs) {
            for (const PoolEntry& e : run.pool.ranked()) {
                double score = scored_or_inf(sub, e.selection, w);
                if (!std::isfinite(score)) continue;
                if (e.selection.cardinality() == k)
                    feasible.insert(e.selection, score, e.source);
                else
                    off_k.push_back(e.selection);
            }
            // One summary row per solver: its native best, re-scored.
            if (auto b = run.pool.best()) {
                double score = scored_or_inf(sub, b->selection, w);
                if (std::isfinite(score)) {
                    CandidateRow row;
                    row.selection = b->selection;
                    row.cardinality = b->selection.cardinality();
                    row.target_k = k;
                    row.cqns = score;
                    row.sharpe = sharpe_or_null(sub, b->selection);
                    row.source = b->source;
                    row.stage = stage;
                    row.valid = row.cardinality == k;
                    report.candidates.push_back(row);
                }
            }
        }

        // Seeded GA over the merged pool: feasible entries first (best
        // ranked), then off-cardinality material for repair.
        GaConfig ga = cfg.ga;
        ga.seeds.clear();
        for (const PoolEntry& e : feasible.ranked()) {
            if (ga.seeds.size() >= ga.population_size) break;
            ga.seeds.push_back(e.selection);
        }
        for (const Portfolio& p : off_k) {
            if (ga.seeds.size() >= ga.population_size) break;
            ga.seeds.push_back(p);
        }

        SolverRun ga_run = timed("ga", [&, k, ga](ScoreTrace* t) {
            return genetic(sub, w, k, ga, derived_budget(base, stage + "/ga"), t);
        })();
        if (auto b = ga_run.pool.best()) {
            CandidateRow row;
            row.selection = b->selection;
            row.cardinality = b->selection.cardinality();
            row.target_k = k;
            row.cqns = b->score;
            row.sharpe = sharpe_or_null(sub, b->selection);
            row.source = "ga";
            row.stage = stage;
            row.valid = row.cardinality == k;
            report.candidates.push_back(row);
        }

        report.pools_by_k.emplace(k, pool_merge({feasible, ga_run.pool}));
        for (SolverRun& run : runs) report.runs.push_back(std::move(run));
        report.runs.push_back(std::move(ga_run));
    }

    // Final ranking over feasible pool entries only.
    bool found = false;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t k : ks) {
        const SolutionPool& pool = report.pools_by_k.at(k);
        for (const PoolEntry& e : pool.ranked()) {
            if (e.selection.cardinality() != k) continue;  // GA pools are feasible by construction
            if (e.score < best_score) {
                best_score = e.score;
                report.final_best = e.selection;
                found = true;
            }
            break;  // ranked: first feasible entry is the pool's best
        }
    }
    if (!found)
        raise(ErrorCode::EmptyPool, "no feasible candidate survived step 2");

    const Portfolio& fb = report.final_best;
    double mean = portfolio_mean(sub, fb);
    double var = portfolio_variance(sub, fb);
    report.final_best_report.cqns_final = best_score;
    report.final_best_report.cqns_legacy = cqns_legacy(sub, fb, w);
    report.final_best_report.expected_return = mean;
    report.final_best_report.variance = var;
    report.final_best_report.sharpe =
        var > 0.0 ? mean / std::sqrt(var) : std::numeric_limits<double>::quiet_NaN();
    report.final_best_report.power_used = w.w;
    return report;
}

PipelineReport run_full(const Universe& u, const PipelineConfig& cfg) {
    PipelineConfig step2_cfg = cfg;
    if (cfg.step2_target_ks.empty())
        step2_cfg.step2_target_ks = default_step2_ks(cfg.step1_target_n);
    for (std::size_t k : step2_cfg.step2_target_ks)
        if (k < 1 || k > cfg.step1_target_n)
            raise(ErrorCode::InvalidTargetK,
                  "step-2 target k = " + std::to_string(k) +
                      " outside the step-1 portfolio size " +
                      std::to_string(cfg.step1_target_n));

    Step1Result s1 = run_step1(u, cfg);

    std::optional<CalibrationResult> carried;
    if (cfg.power_policy == PowerPolicy::carry_forward) carried = s1.calibration;

    PipelineReport report = run_step2(s1.sub, step2_cfg, carried);

    // The step-1 selection is the sub-universe's all-in portfolio; it
    // competes in the final ranking under its own target size.
    CandidateRow s1_row;
    s1_row.selection = Portfolio::all_in(s1.sub.size());
    s1_row.cardinality = s1.sub.size();
    s1_row.target_k = cfg.step1_target_n;
    s1_row.cqns = scored_or_inf(s1.sub, s1_row.selection, report.ranking_calibration.power);
    s1_row.sharpe = sharpe_or_null(s1.sub, s1_row.selection);
    s1_row.source = "step1";
    s1_row.stage = "step1";
    s1_row.valid = s1_row.cardinality == cfg.step1_target_n;

    if (std::isfinite(s1_row.cqns)) {
        report.candidates.insert(report.candidates.begin(), s1_row);
        if (s1_row.valid && s1_row.cqns < report.final_best_report.cqns_final) {
            report.final_best = s1_row.selection;
            double mean = portfolio_mean(s1.sub, s1_row.selection);
            double var = portfolio_variance(s1.sub, s1_row.selection);
            report.final_best_report.cqns_final = s1_row.cqns;
            report.final_best_report.cqns_legacy =
                cqns_legacy(s1.sub, s1_row.selection, report.ranking_calibration.power);
            report.final_best_report.expected_return = mean;
            report.final_best_report.variance = var;
            report.final_best_report.sharpe =
                var > 0.0 ? mean / std::sqrt(var) : std::numeric_limits<double>::quiet_NaN();
        }
    }

    // When the power carries forward, the calibration reference is the
    // full universe: its all-in row is the zero of the score scale.
    if (cfg.power_policy == PowerPolicy::carry_forward)
        report.all_in_score = s1.all_in_score;

    report.step1 = std::move(s1);
    return report;
}

std::string PipelineReport::to_json() const {
    nlohmann::json j;
    j["version"] = kVersion;
    j["tickers"] = tickers;
    j["power"] = calibration_json(ranking_calibration);
    j["power"]["policy"] =
        power_policy == PowerPolicy::carry_forward ? "carry_forward" : "recalibrate";
    j["all_in"] = {{"cqns", all_in_score}};
    j["target_ks"] = target_ks;

    nlohmann::json pools = nlohmann::json::object();
    for (const auto& [k, pool] : pools_by_k) {
        nlohmann::json entry;
        entry["size"] = pool.size();
        if (auto b = pool.best()) {
            entry["best_cqns"] = b->score;
            entry["best_selection"] = b->selection.to_hex();
        } else {
            entry["best_cqns"] = nullptr;
            entry["best_selection"] = nullptr;
        }
        pools[std::to_string(k)] = entry;
    }
    j["pools"] = pools;

    nlohmann::json candidate_rows = nlohmann::json::array();
    std::vector<CandidateRow> sorted = candidates;
    std::stable_sort(sorted.begin(), sorted.end(), [](const CandidateRow& a, const CandidateRow& b) {
        if (a.cqns != b.cqns) return a.cqns < b.cqns;
        if (a.stage != b.stage) return a.stage < b.stage;
        if (a.source != b.source) return a.source < b.source;
        return a.selection.to_hex() < b.selection.to_hex();
    });
    for (const CandidateRow& row : sorted) candidate_rows.push_back(candidate_json(row));
    j["candidates"] = candidate_rows;

    nlohmann::json fb;
    fb["selection"] = final_best.to_hex();
    fb["cardinality"] = final_best.cardinality();
    nlohmann::json fb_tickers = nlohmann::json::array();
    for (std::size_t i : final_best.indices()) fb_tickers.push_back(tickers[i]);
    fb["tickers"] = fb_tickers;
    fb["cqns_final"] = final_best_report.cqns_final;
    fb["cqns_legacy"] = final_best_report.cqns_legacy;
    fb["expected_return"] = final_best_report.expected_return;
    fb["variance"] = final_best_report.variance;
    if (std::isfinite(final_best_report.sharpe))
        fb["sharpe"] = final_best_report.sharpe;
    else
        fb["sharpe"] = nullptr;
    fb["power_used"] = final_best_report.power_used;
    j["final_best"] = fb;

    nlohmann::json solver_rows = nlohmann::json::array();
    auto run_row = [](const SolverRun& run) {
        nlohmann::json r;
        r["stage"] = run.stage;
        r["solver"] = run.solver;
        r["evaluations"] = run.evaluations;
        r["pool_size"] = run.pool.size();
        return r;
    };
    if (step1)
        for (const SolverRun& run : step1->runs) solver_rows.push_back(run_row(run));
    for (const SolverRun& run : runs) solver_rows.push_back(run_row(run));
    j["solvers"] = solver_rows;

    if (step1) {
        nlohmann::json s1;
        s1["target_n"] = step1->sub_indices.size();
        s1["calibration"] = calibration_json(step1->calibration);
        s1["all_in_cqns"] = step1->all_in_score;
        s1["pool_size"] = step1->pool.size();
        s1["best"] = {{"cqns", step1->selection_score},
                      {"selection", step1->selection.to_hex()}};
        s1["sub_tickers"] = step1->sub_tickers;
        j["step1"] = s1;
    } else {
        j["step1"] = nullptr;
    }

    return j.dump(2);
}

}  // namespace cqns
