#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "cqns/qubo.hpp"
#include "cqns/scoring.hpp"

namespace cqns::test {

inline std::vector<int> bits_from_mask(std::uint32_t mask, std::size_t n) {
    std::vector<int> x(n, 0);
    for (std::size_t i = 0; i < n; ++i) x[i] = (mask >> i) & 1u;
    return x;
}

inline std::vector<int> spins_from_mask(std::uint32_t mask, std::size_t n) {
    std::vector<int> z(n, -1);
    for (std::size_t i = 0; i < n; ++i) z[i] = (mask >> i) & 1u ? 1 : -1;
    return z;
}

struct EnumerationResult {
    double best_energy = std::numeric_limits<double>::infinity();
    std::vector<std::uint32_t> argmin_masks;  // every mask attaining the minimum
};

// Exhaustive sweep over all 2^N bit-vectors. Ties collected so scaling
// tests can compare whole argmin sets.
inline EnumerationResult enumerate_qubo(const Qubo& q, double tie_tol = 0.0) {
    EnumerationResult r;
    const auto n = static_cast<std::size_t>(q.size());
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        const double e = qubo_energy(q, bits_from_mask(mask, n));
        if (e < r.best_energy - tie_tol) {
            r.best_energy = e;
            r.argmin_masks.clear();
            r.argmin_masks.push_back(mask);
        } else if (e <= r.best_energy + tie_tol) {
            r.argmin_masks.push_back(mask);
        }
    }
    return r;
}

inline EnumerationResult enumerate_ising(const IsingModel& m, double tie_tol = 0.0) {
    EnumerationResult r;
    const auto n = static_cast<std::size_t>(m.size());
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        const double e = ising_energy(m, spins_from_mask(mask, n));
        if (e < r.best_energy - tie_tol) {
            r.best_energy = e;
            r.argmin_masks.clear();
            r.argmin_masks.push_back(mask);
        } else if (e <= r.best_energy + tie_tol) {
            r.argmin_masks.push_back(mask);
        }
    }
    return r;
}

struct SubsetOracle {
    Portfolio best;
    double best_score = std::numeric_limits<double>::infinity();
};

// Best exactly-k subset by cqns_final over all C(N, k) candidates.
inline SubsetOracle enumerate_best_subset(const Universe& u, std::size_t k, CqnsPower w) {
    SubsetOracle r;
    const std::size_t n = u.size();
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
        Portfolio p(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) p.set(i);
        }
        const double score = cqns_final(u, p, w);
        if (score < r.best_score) {
            r.best_score = score;
            r.best = p;
        }
    }
    return r;
}

}  // namespace cqns::test
