#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cqns/error.hpp"
#include "cqns/qubo.hpp"
#include "cqns/rng.hpp"

namespace cqns {

enum class PressureSchedule { linear, logistic };

/// Tuning constants for the bifurcation dynamics. Leaving xi0 or
/// iterations unset picks default_xi0 / default_iterations at run time.
struct SbmParams {
    double delta = 1.0;
    double kerr = 1.0;
    std::optional<double> xi0;
    double epsilon = 0.5;
    std::optional<std::size_t> iterations;
    PressureSchedule pressure_schedule = PressureSchedule::linear;
    double clamp_threshold = 1.0;
    std::uint64_t seed = 0;
    bool record_trajectory = false;
    bool record_trace = false;
};

struct SbmResult {
    std::vector<int> best_spins;
    double best_energy = 0.0;
    std::size_t best_iteration = 0;
    std::size_t iterations_run = 0;
    /// Number of full energy evaluations performed. The sign readout is
    /// checked every iteration but only re-scored when it changed.
    std::size_t energy_evaluations = 0;
    /// (iteration, energy) each time the best-so-far improved.
    std::vector<std::pair<std::size_t, double>> improvements;
    /// One (iteration, energy) row per energy evaluation, when
    /// record_trace is set.
    std::vector<std::pair<std::size_t, double>> trace;
    /// Downsampled position snapshots (at most 1000), when
    /// record_trajectory is set.
    std::vector<std::pair<std::size_t, Eigen::VectorXd>> trajectory;
};

/// Ramp from 0 to 1 over the run. linear: t/T. logistic:
/// 1/(1+exp(-12(t/T - 1/2))), which stays within 0.01 of the endpoints.
double pressure(std::size_t t, std::size_t iterations, PressureSchedule schedule);

/// xi0 = 0.5*delta / (sigma_offdiag(J) * sqrt(N)). When the off-diagonal
/// spread is zero the coupling strength is set from the fields instead:
/// delta / (2*max|C|), or from max|J| when the fields vanish too.
/// A model with J = 0 and C = 0 has nothing to optimize.
double default_xi0(const IsingModel& m, const SbmParams& params);

/// 2,000 iterations up to 64 spins, 10,016 beyond.
std::size_t default_iterations(Eigen::Index n);

/// Integrates the oscillator network and returns the best sign readout
/// seen at any iteration (ties keep the earliest). Single-threaded: a
/// run uses no worker parallelism, so a fixed seed fixes the result
/// bit for bit.
SbmResult run_sbm(const IsingModel& m, const SbmParams& params);

}  // namespace cqns
