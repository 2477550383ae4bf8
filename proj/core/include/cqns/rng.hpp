#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cqns {

/// All stochastic components draw from a mt19937_64 seeded explicitly.
/// Runs are reproducible for a fixed seed; no global RNG state exists.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

/// Deterministic per-component sub-seed so concurrent solvers never share
/// RNG streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) noexcept {
    std::uint64_t state = master ^ fnv1a64(tag);
    std::uint64_t a = splitmix64(state);
    std::uint64_t b = splitmix64(state);
    return a ^ (b << 1);
}

}  // namespace cqns
