#pragma once

#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cqns/market_data.hpp"
#include "cqns/qubo.hpp"

namespace bench {

// Synthetic daily-return universe with a mild positive drift so that
// calibrated scores stay defined for every subset the solvers visit.
inline cqns::Universe make_universe(std::size_t n, std::size_t days = 253,
                                    std::uint64_t seed = 99) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> idx(0.0008, 0.009);
    Eigen::VectorXd index_returns(static_cast<Eigen::Index>(days));
    for (std::size_t t = 0; t < days; ++t)
        index_returns[static_cast<Eigen::Index>(t)] = idx(rng);

    std::vector<std::string> tickers;
    Eigen::MatrixXd returns(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(days));
    for (std::size_t j = 0; j < n; ++j) {
        tickers.push_back("B" + std::to_string(j));
        const double beta = 0.4 + 0.02 * static_cast<double>(j % 80);
        std::normal_distribution<double> noise(0.0018, 0.006);
        for (std::size_t t = 0; t < days; ++t)
            returns(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(t)) =
                beta * index_returns[static_cast<Eigen::Index>(t)] + noise(rng);
    }
    return cqns::make_universe(std::move(tickers), std::move(returns),
                               std::move(index_returns));
}

inline cqns::Qubo random_qubo(int n, std::uint64_t seed = 7) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    cqns::Qubo q;
    q.A = Eigen::MatrixXd::Zero(n, n);
    q.B = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            const double v = coeff(rng);
            q.A(i, j) = v;
            q.A(j, i) = v;
        }
        q.B(i) = coeff(rng);
    }
    return q;
}

}  // namespace bench
