#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cqns/scoring.hpp"
#include "support/synthetic.hpp"

using namespace cqns;
using test::random_universe;
using test::synthetic_universe;

namespace {

Universe three_asset_universe() {
    Eigen::VectorXd mu(3);
    mu << 0.010, 0.020, 0.030;
    Eigen::MatrixXd cov(3, 3);
    cov << 4e-4, 1e-4, -5e-5,
           1e-4, 9e-4,  2e-4,
          -5e-5, 2e-4, 16e-4;
    return synthetic_universe(mu, cov);
}

}  // namespace

TEST_CASE("Portfolio: bit bookkeeping and hex round trip") {
    Portfolio p(10);
    CHECK(p.size() == 10);
    CHECK(p.cardinality() == 0);
    p.set(0);
    p.set(1);
    p.set(9);
    CHECK(p.cardinality() == 3);
    CHECK(p.test(0));
    CHECK(p.test(9));
    CHECK_FALSE(p.test(5));
    CHECK(p.indices() == std::vector<std::size_t>{0, 1, 9});

    // bits 0,1 -> first byte 0x03; bit 9 -> second byte 0x02
    CHECK(p.to_hex() == "0302");
    CHECK(Portfolio::from_hex(10, "0302") == p);

    p.flip(9);
    CHECK(p.cardinality() == 2);
    CHECK(p.to_hex() == "0300");

    CHECK(Portfolio::from_indices(10, {0, 1}) == p);
    CHECK(Portfolio::all_in(4).to_hex() == "0f");
    CHECK(Portfolio::all_in(4).cardinality() == 4);
}

TEST_CASE("Portfolio: hex decoding validates its input") {
    CHECK_THROWS_AS(Portfolio::from_hex(10, "03"), Error);        // wrong length
    CHECK_THROWS_AS(Portfolio::from_hex(10, "03zz"), Error);      // non-hex digit
    CHECK_THROWS_AS(Portfolio::from_hex(10, "03fc"), Error);      // bits past N
    CHECK_NOTHROW(Portfolio::from_hex(10, "ff03"));               // all 10 bits set
}

TEST_CASE("portfolio_mean: zero returns, single asset, arithmetic mean") {
    Universe zero = synthetic_universe(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Zero(3, 3));
    CHECK(portfolio_mean(zero, Portfolio::all_in(3)) == 0.0);

    Universe u = three_asset_universe();
    CHECK(portfolio_mean(u, Portfolio::from_indices(3, {1})) == doctest::Approx(0.020));

    Eigen::VectorXd mu(2);
    mu << 0.01, 0.03;
    Universe two = synthetic_universe(mu, Eigen::MatrixXd::Zero(2, 2));
    CHECK(portfolio_mean(two, Portfolio::all_in(2)) == doctest::Approx(0.02));
}

TEST_CASE("portfolio_variance: identity covariance gives 1/k") {
    for (int n : {2, 5, 8}) {
        Universe u = synthetic_universe(Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Identity(n, n));
        CHECK(portfolio_variance(u, Portfolio::all_in(n)) == doctest::Approx(1.0 / n));
    }
}

TEST_CASE("portfolio_variance: single asset returns its own variance") {
    Universe u = three_asset_universe();
    CHECK(portfolio_variance(u, Portfolio::from_indices(3, {2})) == doctest::Approx(16e-4));
}

TEST_CASE("portfolio_variance matches the brute-force double sum") {
    Universe u = three_asset_universe();
    Portfolio p = Portfolio::from_indices(3, {0, 2});
    double oracle = 0.0;
    for (std::size_t i : {0, 2}) {
        for (std::size_t j : {0, 2}) {
            oracle += u.cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    oracle /= 4.0;
    CHECK(portfolio_variance(u, p) == doctest::Approx(oracle).epsilon(1e-14));
}

TEST_CASE("scoring rejects empty or mismatched portfolios") {
    Universe u = three_asset_universe();
    try {
        portfolio_mean(u, Portfolio(3));
        FAIL("expected Error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyPortfolio);
    }
    try {
        portfolio_variance(u, Portfolio::all_in(5));
        FAIL("expected Error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UniverseMismatch);
    }
}

TEST_CASE("cqns_final: zero statistics score zero for any positive power") {
    Universe zero = synthetic_universe(Eigen::VectorXd::Zero(4), Eigen::MatrixXd::Zero(4, 4));
    CHECK(cqns_final(zero, Portfolio::all_in(4), CqnsPower{3.0}) == 0.0);
    CHECK(cqns_final(zero, Portfolio::all_in(4), CqnsPower{2.5}) == 0.0);
}

TEST_CASE("cqns_final matches a direct arithmetic oracle") {
    Universe u = three_asset_universe();
    Portfolio p = Portfolio::from_indices(3, {0, 1});
    const double mean = (0.010 + 0.020) / 2.0;
    const double var = (4e-4 + 9e-4 + 2 * 1e-4) / 4.0;
    CHECK(cqns_final(u, p, CqnsPower{3.0}) ==
          doctest::Approx(var - mean * mean * mean).epsilon(1e-14));
}

TEST_CASE("cqns_final reports a negative base under a fractional power") {
    Eigen::VectorXd mu(2);
    mu << -0.02, -0.01;
    Universe u = synthetic_universe(mu, 1e-4 * Eigen::MatrixXd::Identity(2, 2));
    // integer powers of a negative mean are fine
    CHECK(std::isfinite(cqns_final(u, Portfolio::all_in(2), CqnsPower{3.0})));
    try {
        cqns_final(u, Portfolio::all_in(2), CqnsPower{2.5});
        FAIL("expected Error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NegativeBaseNonIntegerPower);
    }
}

TEST_CASE("cqns_legacy coincides with cqns_final only at cardinality one") {
    Universe u = three_asset_universe();
    for (std::size_t i = 0; i < 3; ++i) {
        Portfolio p = Portfolio::from_indices(3, {i});
        CHECK(cqns_legacy(u, p, CqnsPower{3.0}) == cqns_final(u, p, CqnsPower{3.0}));
    }
}

TEST_CASE("cqns_legacy: equal means make the two forms differ by the stated amount") {
    Eigen::VectorXd mu(2);
    mu << 0.03, 0.03;
    Eigen::MatrixXd cov(2, 2);
    cov << 2e-4, 5e-5, 5e-5, 3e-4;
    Universe u = synthetic_universe(mu, cov);
    Portfolio p = Portfolio::all_in(2);

    const double var = portfolio_variance(u, p);
    const double legacy = cqns_legacy(u, p, CqnsPower{3.0});
    const double final_score = cqns_final(u, p, CqnsPower{3.0});

    CHECK(legacy == doctest::Approx(var - 2.0 * std::pow(0.015, 3)).epsilon(1e-14));
    CHECK(final_score == doctest::Approx(var - std::pow(0.03, 3)).epsilon(1e-14));
    CHECK(legacy != final_score);
}

TEST_CASE("cqns_legacy with zero means reduces to the variance") {
    Universe u = synthetic_universe(Eigen::VectorXd::Zero(3),
                                    1e-4 * Eigen::MatrixXd::Identity(3, 3));
    Portfolio p = Portfolio::from_indices(3, {0, 1});
    CHECK(cqns_legacy(u, p, CqnsPower{3.0}) == portfolio_variance(u, p));
}

TEST_CASE("calibrate_power: exact powers of ten give w = 2") {
    // all-in mean 1e-2, all-in variance 1e-4
    Eigen::VectorXd mu(2);
    mu << 0.01, 0.01;
    Universe u = synthetic_universe(mu, 2e-4 * Eigen::MatrixXd::Identity(2, 2));
    auto result = calibrate_power(u);
    CHECK_FALSE(result.degenerate);
    CHECK(result.power.w == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("calibrate_power: equal variance and mean give w = 1") {
    Eigen::VectorXd mu(2);
    mu << 0.5, 0.5;
    Universe u = synthetic_universe(mu, Eigen::MatrixXd::Identity(2, 2));
    auto result = calibrate_power(u);
    CHECK_FALSE(result.degenerate);
    CHECK(result.power.w == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("calibrate_power zeroes the all-in score on random universes") {
    for (std::uint64_t seed : {11u, 22u, 33u, 44u, 55u}) {
        Universe u = random_universe(8, 120, seed);
        auto result = calibrate_power(u);
        REQUIRE_FALSE(result.degenerate);
        CHECK(std::abs(cqns_final(u, Portfolio::all_in(u.size()), result.power)) <= 1e-12);
    }
}

TEST_CASE("calibrate_power falls back to the cubic on degenerate statistics") {
    // negative all-in mean
    Eigen::VectorXd mu(2);
    mu << -0.01, -0.02;
    Universe neg = synthetic_universe(mu, 1e-4 * Eigen::MatrixXd::Identity(2, 2));
    auto r1 = calibrate_power(neg);
    CHECK(r1.degenerate);
    CHECK(r1.power.w == 3.0);

    // variance above 1 with mean below 1 makes the log ratio negative
    Eigen::VectorXd mu2(2);
    mu2 << 0.5, 0.5;
    Universe hot = synthetic_universe(mu2, 8.0 * Eigen::MatrixXd::Identity(2, 2));
    auto r2 = calibrate_power(hot);
    CHECK(r2.degenerate);
    CHECK(r2.power.w == 3.0);

    // zero variance
    Universe flat = synthetic_universe(mu2, Eigen::MatrixXd::Zero(2, 2));
    auto r3 = calibrate_power(flat);
    CHECK(r3.degenerate);

    // all-in mean exactly 1 would divide by log(1) = 0
    Eigen::VectorXd mu3(2);
    mu3 << 1.0, 1.0;
    Universe unit = synthetic_universe(mu3, 1e-4 * Eigen::MatrixXd::Identity(2, 2));
    auto r4 = calibrate_power(unit);
    CHECK(r4.degenerate);
}

TEST_CASE("sharpe: zero excess return, simple arithmetic, error on zero variance") {
    Eigen::VectorXd mu(1);
    mu << 0.001;
    Eigen::MatrixXd cov(1, 1);
    cov << 2.5e-5;
    // one-asset universes are not buildable through the pipeline, use two
    Eigen::VectorXd mu2(2);
    mu2 << 0.001, 0.02;
    Eigen::MatrixXd cov2(2, 2);
    cov2 << 2.5e-5, 0.0, 0.0, 1e-4;
    Universe u = synthetic_universe(mu2, cov2);

    CHECK(sharpe(u, Portfolio::from_indices(2, {0}), 0.001) == doctest::Approx(0.0));
    CHECK(sharpe(u, Portfolio::from_indices(2, {1}), 0.0) == doctest::Approx(2.0));

    Universe flat = synthetic_universe(mu2, Eigen::MatrixXd::Zero(2, 2));
    try {
        sharpe(flat, Portfolio::all_in(2), 0.0);
        FAIL("expected Error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroVariancePortfolio);
    }
}

TEST_CASE("sharpe rises when a held asset's mean return rises") {
    Universe u = three_asset_universe();
    Portfolio p = Portfolio::from_indices(3, {0, 1});
    const double before = sharpe(u, p, 0.0);
    Universe bumped = u;
    bumped.mu(1) += 1e-6;
    CHECK(sharpe(bumped, p, 0.0) > before);
}

TEST_CASE("both CQNS forms are invariant under asset relabeling") {
    Universe u = random_universe(6, 80, 99);
    // permutation (0 1 2 3 4 5) -> (3 5 0 2 4 1)
    std::vector<std::size_t> perm{3, 5, 0, 2, 4, 1};

    Universe shuffled;
    shuffled.mu = Eigen::VectorXd(6);
    shuffled.cov = Eigen::MatrixXd(6, 6);
    for (std::size_t i = 0; i < 6; ++i) {
        shuffled.tickers.push_back(u.tickers[perm[i]]);
        shuffled.mu(static_cast<Eigen::Index>(i)) = u.mu(static_cast<Eigen::Index>(perm[i]));
        for (std::size_t j = 0; j < 6; ++j) {
            shuffled.cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                u.cov(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[j]));
        }
    }

    Portfolio original = Portfolio::from_indices(6, {0, 2, 5});
    Portfolio relabeled(6);
    for (std::size_t i = 0; i < 6; ++i) {
        if (original.test(perm[i])) relabeled.set(i);
    }

    CqnsPower w{2.7};
    CHECK(cqns_final(shuffled, relabeled, w) ==
          doctest::Approx(cqns_final(u, original, w)).epsilon(1e-12));
    CHECK(cqns_legacy(shuffled, relabeled, w) ==
          doctest::Approx(cqns_legacy(u, original, w)).epsilon(1e-12));
}

TEST_CASE("portfolio_variance is nonnegative on exactly PSD matrices") {
    // integer Gram matrices keep every subset sum exact, so the sign
    // check is meaningful with tol = 0
    std::mt19937_64 rng(777);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 5);
        Eigen::MatrixXd l(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) l(i, j) = static_cast<double>(static_cast<int>(rng() % 7) - 3);
        Eigen::MatrixXd cov = l * l.transpose();
        Universe u = synthetic_universe(Eigen::VectorXd::Zero(n), cov);

        for (std::size_t mask = 1; mask < (1u << n); ++mask) {
            Portfolio p(n);
            for (int i = 0; i < n; ++i) {
                if (mask & (1u << i)) p.set(static_cast<std::size_t>(i));
            }
            CHECK(portfolio_variance(u, p) >= 0.0);
        }
    }
}

TEST_CASE("solver ranking treats lower scores as better") {
    CHECK(more_attractive(-2.0, -1.0));
    CHECK_FALSE(more_attractive(-1.0, -2.0));
    CHECK_FALSE(more_attractive(-1.0, -1.0));

    std::vector<double> scores{0.3, -1.2, 0.0, -0.4};
    std::sort(scores.begin(), scores.end(),
              [](double a, double b) { return more_attractive(a, b); });
    CHECK(scores == std::vector<double>{-1.2, -0.4, 0.0, 0.3});
}

TEST_CASE("ScoreReport serializes every field by name") {
    Universe u = random_universe(5, 60, 7);
    auto calibrated = calibrate_power(u);
    ScoreReport r = score_portfolio(u, Portfolio::from_indices(5, {0, 3}), calibrated.power);
    CHECK(r.power_used == calibrated.power.w);

    const std::string json = r.to_json();
    for (const char* field : {"cqns_final", "cqns_legacy", "expected_return", "variance",
                              "sharpe", "power_used"}) {
        CHECK(json.find(std::string("\"") + field + "\"") != std::string::npos);
    }
}
