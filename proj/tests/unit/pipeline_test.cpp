#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cqns/pipeline.hpp"
#include "support/synthetic.hpp"

using namespace cqns;
using test::random_universe;
using test::synthetic_universe;

namespace {

PipelineConfig small_config(std::size_t target_n, std::vector<std::size_t> ks,
                            std::uint64_t seed, std::uint64_t evals = 1500) {
    PipelineConfig cfg;
    cfg.step1_target_n = target_n;
    cfg.step2_target_ks = std::move(ks);
    cfg.per_solver_budget.max_evaluations = evals;
    cfg.per_solver_budget.seed = seed;
    cfg.ga.population_size = 24;
    cfg.ga.generations = 200;
    return cfg;
}

// One asset dominates: five percent daily drift at a fifth of everyone
// else's volatility, so subsets holding it beat the calibrated all-in
// zero. Built from actual return rows because the funnel re-slices them.
Universe dominant_asset_universe() {
    const std::size_t n = 20, days = 200;
    std::mt19937_64 rng(4242);
    std::vector<std::string> tickers;
    Eigen::MatrixXd returns(n, days);
    for (std::size_t j = 0; j < n; ++j) {
        tickers.push_back("S" + std::to_string(j));
        std::normal_distribution<double> d(j == 0 ? 0.05 : 0.005,
                                           j == 0 ? 0.002 : 0.010);
        for (std::size_t t = 0; t < days; ++t)
            returns(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(t)) = d(rng);
    }
    std::normal_distribution<double> idx(0.004, 0.010);
    Eigen::VectorXd index_returns(days);
    for (std::size_t t = 0; t < days; ++t)
        index_returns[static_cast<Eigen::Index>(t)] = idx(rng);
    return make_universe(std::move(tickers), std::move(returns), std::move(index_returns));
}

}  // namespace

TEST_CASE("default step-2 sizes scale down the step-1 target") {
    auto ks = default_step2_ks(134);
    REQUIRE(ks.size() == 5);
    CHECK(ks[0] == 67);
    CHECK(ks[1] == 45);
    CHECK(ks[2] == 34);
    CHECK(ks[3] == 17);
    CHECK(ks[4] == 3);
    CHECK(std::is_sorted(ks.begin(), ks.end(), std::greater<>()));

    auto tiny = default_step2_ks(2);
    REQUIRE(tiny.size() == 1);
    CHECK(tiny[0] == 1);
}

TEST_CASE("step one returns a sub-universe of exactly the target size") {
    Universe u = random_universe(20, 140, 11);
    PipelineConfig cfg = small_config(8, {4}, 5);
    Step1Result s1 = run_step1(u, cfg);

    CHECK(s1.sub.size() == 8);
    CHECK(s1.sub_tickers.size() == 8);
    CHECK(s1.selection.cardinality() == 8);
    CHECK(s1.sub_indices.size() == 8);
    for (std::size_t i = 0; i < s1.sub_indices.size(); ++i)
        CHECK(s1.sub_tickers[i] == u.tickers[s1.sub_indices[i]]);

    // Four solvers ran in the documented order.
    REQUIRE(s1.runs.size() == 4);
    CHECK(s1.runs[0].solver == "mc");
    CHECK(s1.runs[1].solver == "mc");
    CHECK(s1.runs[2].solver == "ga");
    CHECK(s1.runs[3].solver == "sa");
    for (const SolverRun& run : s1.runs) {
        CHECK(run.stage == "step1");
        CHECK(run.evaluations == run.trace.size());
        CHECK(run.evaluations > 0);
    }

    // The all-in reference calibrates to zero.
    CHECK(std::abs(s1.all_in_score) <= 1e-12);
}

TEST_CASE("step one finds a strictly negative score when one asset dominates") {
    Universe u = dominant_asset_universe();
    PipelineConfig cfg = small_config(4, {2}, 3);
    Step1Result s1 = run_step1(u, cfg);

    CHECK(std::abs(s1.all_in_score) <= 1e-12);
    REQUIRE(s1.pool.best().has_value());
    CHECK(s1.pool.best()->score < 0.0);
    CHECK(s1.selection_score < 0.0);

    // Holding the dominant asset alone beats the all-in zero, which is
    // what guarantees a strictly negative optimum exists at all.
    Portfolio solo = Portfolio::from_indices(20, {0});
    CHECK(cqns_final(u, solo, s1.calibration.power) < 0.0);

    // The funnel keeps the dominant asset.
    CHECK(s1.selection.test(0));
}

TEST_CASE("step one is deterministic for a fixed seed") {
    Universe u = random_universe(20, 140, 11);
    PipelineConfig cfg = small_config(8, {4}, 21);
    Step1Result a = run_step1(u, cfg);
    Step1Result b = run_step1(u, cfg);
    CHECK(a.selection == b.selection);
    CHECK(a.sub_tickers == b.sub_tickers);
    CHECK(a.pool.to_jsonl() == b.pool.to_jsonl());
}

TEST_CASE("step one validates the target size") {
    Universe u = random_universe(10, 100, 2);
    CHECK_THROWS_AS(run_step1(u, small_config(0, {1}, 1)), Error);
    CHECK_THROWS_AS(run_step1(u, small_config(11, {1}, 1)), Error);
}

TEST_CASE("step two ranks candidates and the seeded GA dominates per-k") {
    Universe u = random_universe(20, 140, 11);
    PipelineConfig cfg = small_config(10, {4, 3}, 31);
    Step1Result s1 = run_step1(u, cfg);
    PipelineReport report = run_step2(s1.sub, cfg, s1.calibration);

    REQUIRE(report.target_ks == std::vector<std::size_t>{4, 3});
    CHECK(report.ranking_calibration.power.w == s1.calibration.power.w);

    // Within each stage the GA candidate row is at least as good as every
    // valid row from the other solvers.
    for (std::size_t k : report.target_ks) {
        const std::string stage = "step2/k=" + std::to_string(k);
        double ga_best = std::numeric_limits<double>::infinity();
        double other_best = std::numeric_limits<double>::infinity();
        for (const CandidateRow& row : report.candidates) {
            if (row.stage != stage) continue;
            if (row.source == "ga")
                ga_best = std::min(ga_best, row.cqns);
            else if (row.valid)
                other_best = std::min(other_best, row.cqns);
        }
        REQUIRE(std::isfinite(ga_best));
        if (std::isfinite(other_best)) CHECK(ga_best <= other_best);
    }

    // Final best dominates every merged-pool entry.
    for (const auto& [k, pool] : report.pools_by_k) {
        for (const PoolEntry& e : pool.entries())
            CHECK(report.final_best_report.cqns_final <= e.score);
    }

    // Every reported score re-verifies against the universe.
    for (const CandidateRow& row : report.candidates) {
        if (row.stage == "step1") continue;
        CHECK(cqns_final(s1.sub, row.selection, report.ranking_calibration.power) ==
              doctest::Approx(row.cqns).epsilon(1e-12));
    }
    CHECK(cqns_final(s1.sub, report.final_best, report.ranking_calibration.power) ==
          doctest::Approx(report.final_best_report.cqns_final).epsilon(1e-12));

    // run_step2 standalone calibrates on the sub-universe when nothing is
    // carried: its all-in row is the zero reference.
    PipelineReport standalone = run_step2(s1.sub, cfg);
    CHECK(std::abs(standalone.all_in_score) <= 1e-12);
}

TEST_CASE("unconstrained qubo solvers surface off-cardinality rows flagged invalid") {
    Universe u = random_universe(14, 120, 19);
    PipelineConfig cfg = small_config(8, {3}, 41);
    cfg.qubo_spec.penalty_lambda = 0.0;  // nothing pins the cardinality
    Step1Result s1 = run_step1(u, cfg);
    PipelineReport report = run_step2(s1.sub, cfg, s1.calibration);

    bool saw_invalid = false;
    for (const CandidateRow& row : report.candidates) {
        if (!row.valid) {
            saw_invalid = true;
            CHECK(row.cardinality != row.target_k);
        }
    }
    CHECK(saw_invalid);

    // Off-cardinality rows never win the final ranking.
    CHECK(report.final_best.cardinality() == 3);
}

TEST_CASE("sbm spin output scores identically in qubo and ising form") {
    // Strictly positive means keep the compiled linear term real under a
    // non-integer power.
    const int n = 12;
    Eigen::VectorXd mu(n), v(n);
    for (int i = 0; i < n; ++i) {
        mu[i] = 0.004 + 0.001 * i;
        v[i] = 0.010 + 0.0005 * i;
    }
    Eigen::MatrixXd cov = 0.5 * v * v.transpose();
    for (int i = 0; i < n; ++i) cov(i, i) += 1e-4 * (1.0 + 0.1 * i);
    Universe u = synthetic_universe(mu, cov);
    CalibrationResult cal = calibrate_power(u);
    QuboBuildSpec qspec;
    qspec.target_k = 4;
    qspec.power = cal.power;
    Qubo q = build_cqns_qubo(u, qspec);
    ScaledQubo scaled = scale_qubo(q, qspec.scale_range);
    IsingModel ising = qubo_to_ising(scaled.qubo);

    SbmParams params;
    params.seed = 7;
    SbmResult r = run_sbm(ising, params);

    std::vector<int> bits(r.best_spins.size());
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = (r.best_spins[i] + 1) / 2;
    CHECK(qubo_energy(scaled.qubo, bits) == doctest::Approx(r.best_energy).epsilon(1e-10));
    CHECK(ising_energy(ising, r.best_spins) == doctest::Approx(r.best_energy).epsilon(1e-10));
}

TEST_CASE("full pipeline on a mid-sized universe keeps its books straight") {
    Universe u = random_universe(50, 160, 77);
    PipelineConfig cfg = small_config(12, {6, 3}, 13, 2500);
    PipelineReport report = run_full(u, cfg);

    REQUIRE(report.step1.has_value());
    CHECK(report.step1->sub.size() == 12);
    CHECK(std::abs(report.all_in_score) <= 1e-12);  // calibration reference

    // carry_forward: both stages share one power.
    CHECK(report.ranking_calibration.power.w == report.step1->calibration.power.w);
    CHECK(report.final_best_report.power_used == report.step1->calibration.power.w);

    // The funnel found something at least as good as the calibrated zero.
    CHECK(report.final_best_report.cqns_final <= 0.0);

    // Chart bookkeeping: one trace row per evaluation, every solver ran.
    REQUIRE(report.step1->runs.size() == 4);
    REQUIRE(report.runs.size() == 8);  // (sa, sbm, tabu, ga) x 2 ks
    for (const SolverRun& run : report.runs) {
        CHECK(run.evaluations == run.trace.size());
        CHECK(run.evaluations > 0);
    }

    // The step-1 selection appears as a ranked candidate row.
    bool saw_step1_row = false;
    for (const CandidateRow& row : report.candidates)
        if (row.stage == "step1") {
            saw_step1_row = true;
            CHECK(row.cardinality == 12);
            CHECK(row.valid);
        }
    CHECK(saw_step1_row);

    // Final best never loses to any pool entry or valid candidate.
    for (const auto& [k, pool] : report.pools_by_k)
        for (const PoolEntry& e : pool.entries())
            CHECK(report.final_best_report.cqns_final <= e.score);
    for (const CandidateRow& row : report.candidates)
        if (row.valid) CHECK(report.final_best_report.cqns_final <= row.cqns);
}

TEST_CASE("full pipeline reports are byte-identical for a fixed seed") {
    Universe u = random_universe(24, 130, 3);
    PipelineConfig cfg = small_config(8, {4, 3}, 99, 1200);
    PipelineReport a = run_full(u, cfg);
    PipelineReport b = run_full(u, cfg);
    CHECK(a.to_json() == b.to_json());
    CHECK(!a.to_json().empty());
}

TEST_CASE("concurrent and sequential execution produce identical reports") {
    Universe u = random_universe(24, 130, 3);
    PipelineConfig cfg = small_config(8, {4, 3}, 55, 1200);
    cfg.concurrent = true;
    PipelineReport par = run_full(u, cfg);
    cfg.concurrent = false;
    PipelineReport seq = run_full(u, cfg);

    CHECK(par.to_json() == seq.to_json());
    for (std::size_t k : par.target_ks)
        CHECK(par.pools_by_k.at(k).to_jsonl() == seq.pools_by_k.at(k).to_jsonl());
    CHECK(par.step1->pool.to_jsonl() == seq.step1->pool.to_jsonl());
}

TEST_CASE("recalibrate policy solves a fresh power on the sub-universe") {
    Universe u = dominant_asset_universe();
    PipelineConfig cfg = small_config(6, {3}, 17);
    cfg.power_policy = PowerPolicy::recalibrate;
    PipelineReport report = run_full(u, cfg);

    REQUIRE(report.step1.has_value());
    // The sub-universe all-in is the new zero reference.
    CHECK(std::abs(report.all_in_score) <= 1e-12);
    CHECK(std::abs(cqns_final(report.step1->sub, Portfolio::all_in(6),
                              report.ranking_calibration.power)) <= 1e-12);
}

TEST_CASE("pipeline validates step-2 targets") {
    Universe u = random_universe(10, 100, 2);
    CHECK_THROWS_AS(run_full(u, small_config(5, {6}, 1)), Error);  // k > step-1 size

    Universe sub = random_universe(6, 100, 2);
    PipelineConfig cfg = small_config(6, {7}, 1);
    try {
        run_step2(sub, cfg);
        FAIL("expected InvalidSubUniverse");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidSubUniverse);
    }
}
