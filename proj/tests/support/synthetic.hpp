#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cqns/market_data.hpp"
#include "cqns/rng.hpp"

namespace cqns::test {

// Universe with prescribed statistics. Scoring and the QUBO build read
// only tickers/mu/cov, so the return series can stay empty.
inline Universe synthetic_universe(Eigen::VectorXd mu, Eigen::MatrixXd cov) {
    Universe u;
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        u.tickers.push_back("S" + std::to_string(i));
    }
    u.mu = std::move(mu);
    u.cov = std::move(cov);
    u.betas = Eigen::VectorXd::Ones(u.mu.size());
    return u;
}

// Fully consistent universe built from randomly generated return paths
// with a positive drift, so calibration preconditions hold.
inline Universe random_universe(std::size_t n, std::size_t days, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> noise(0.0008, 0.012);
    Eigen::MatrixXd returns(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(days));
    Eigen::VectorXd index(static_cast<Eigen::Index>(days));
    for (Eigen::Index t = 0; t < index.size(); ++t) index(t) = noise(rng);
    for (Eigen::Index i = 0; i < returns.rows(); ++i) {
        for (Eigen::Index t = 0; t < returns.cols(); ++t) {
            returns(i, t) = 0.5 * index(t) + noise(rng);
        }
    }
    std::vector<std::string> tickers;
    for (std::size_t i = 0; i < n; ++i) tickers.push_back("R" + std::to_string(i));
    return make_universe(std::move(tickers), std::move(returns), std::move(index));
}

}  // namespace cqns::test
