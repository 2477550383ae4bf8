#include "cqns/sbm.hpp"

#include <cmath>
#include <random>

namespace cqns {

double pressure(std::size_t t, std::size_t iterations, PressureSchedule schedule) {
    if (iterations == 0) {
        raise(ErrorCode::InvalidArgument, "iterations must be at least 1");
    }
    if (t > iterations) {
        raise(ErrorCode::InvalidArgument, "pressure index past the final iteration");
    }
    const double frac = static_cast<double>(t) / static_cast<double>(iterations);
    if (schedule == PressureSchedule::linear) {
        return frac;
    }
    return 1.0 / (1.0 + std::exp(-12.0 * (frac - 0.5)));
}

double default_xi0(const IsingModel& m, const SbmParams& params) {
    const Eigen::Index n = m.size();
    if (n < 2) {
        raise(ErrorCode::InvalidArgument, "coupling default needs at least 2 spins");
    }

    // population standard deviation over the N(N-1) off-diagonal
    // entries, two-pass so constant couplings give exactly zero spread
    double sum = 0.0, max_abs = 0.0;
    const double count = static_cast<double>(n) * static_cast<double>(n - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double v = m.J(i, j);
            sum += v;
            max_abs = std::max(max_abs, std::abs(v));
        }
    }
    const double mean = sum / count;
    double sq_dev = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d = m.J(i, j) - mean;
            sq_dev += d * d;
        }
    }
    const double sigma = std::sqrt(sq_dev / count);

    // a spread within rounding error of zero (constant couplings) is
    // treated as zero so the fallback engages
    if (sigma > 1e-12 * max_abs) {
        return 0.5 * params.delta / (sigma * std::sqrt(static_cast<double>(n)));
    }
    const double max_field = m.C.size() ? m.C.cwiseAbs().maxCoeff() : 0.0;
    if (max_field > 0.0) {
        return params.delta / (2.0 * max_field);
    }
    if (max_abs > 0.0) {
        // uniform nonzero couplings: no spread to normalize by, fall back
        // to the magnitude itself
        return 0.5 * params.delta / (max_abs * std::sqrt(static_cast<double>(n)));
    }
    raise(ErrorCode::DegenerateModel, "J = 0 and C = 0: nothing to optimize");
}

std::size_t default_iterations(Eigen::Index n) { return n <= 64 ? 2000 : 10016; }

SbmResult run_sbm(const IsingModel& m, const SbmParams& params) {
    const Eigen::Index n = m.size();
    if (n < 1) {
        raise(ErrorCode::InvalidArgument, "empty model");
    }
    if (m.J.rows() != n || m.J.cols() != n) {
        raise(ErrorCode::DimensionMismatch, "J/C dimensions disagree");
    }
    if (params.epsilon <= 0.0 || params.delta <= 0.0 || params.clamp_threshold <= 0.0) {
        raise(ErrorCode::InvalidArgument, "epsilon, delta and clamp_threshold must be positive");
    }
    const std::size_t iterations =
        params.iterations ? *params.iterations : default_iterations(n);
    if (iterations == 0) {
        raise(ErrorCode::InvalidArgument, "iterations must be at least 1");
    }
    const double xi0 = params.xi0 ? *params.xi0 : default_xi0(m, params);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd y(n);
    {
        Rng rng(params.seed);
        std::uniform_real_distribution<double> init(-0.1, 0.1);
        for (Eigen::Index i = 0; i < n; ++i) y(i) = init(rng);
    }

    SbmResult result;
    result.iterations_run = iterations;

    const std::size_t trajectory_stride =
        params.record_trajectory ? std::max<std::size_t>(1, (iterations + 999) / 1000) : 0;

    Eigen::VectorXd signs(n), last_signs(n);
    Eigen::VectorXd jx(n);
    bool have_last = false;
    double last_energy = 0.0;

    auto readout_signs = [&](Eigen::VectorXd& out) {
        for (Eigen::Index i = 0; i < n; ++i) out(i) = x(i) >= 0.0 ? 1.0 : -1.0;
    };

    for (std::size_t t = 1; t <= iterations; ++t) {
        const double p = pressure(t, iterations, params.pressure_schedule);

        jx.noalias() = m.J * x;
        y.array() += params.epsilon * (-(params.delta - p) * x.array() -
                                       params.kerr * x.array().cube() -
                                       xi0 * (2.0 * jx.array() + m.C.array()));
        x.array() += params.epsilon * params.delta * y.array();

        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(x(i)) > params.clamp_threshold) {
                x(i) = x(i) > 0.0 ? params.clamp_threshold : -params.clamp_threshold;
                y(i) = 0.0;
            }
        }

        if (!x.allFinite() || !y.allFinite()) {
            raise(ErrorCode::NonFiniteState,
                  "state diverged at iteration " + std::to_string(t) +
                      "; epsilon is likely too large for this model");
        }

        readout_signs(signs);
        if (!have_last || signs != last_signs) {
            last_energy = signs.dot(m.J * signs) + m.C.dot(signs) + m.K2;
            last_signs = signs;
            have_last = true;
            ++result.energy_evaluations;
            if (params.record_trace) {
                result.trace.emplace_back(t, last_energy);
            }
        }

        if (result.improvements.empty() || last_energy < result.best_energy) {
            result.best_energy = last_energy;
            result.best_iteration = t;
            result.best_spins.resize(static_cast<std::size_t>(n));
            for (Eigen::Index i = 0; i < n; ++i) {
                result.best_spins[static_cast<std::size_t>(i)] = signs(i) > 0.0 ? 1 : -1;
            }
            result.improvements.emplace_back(t, last_energy);
        }

        if (trajectory_stride && (t % trajectory_stride == 0 || t == iterations)) {
            result.trajectory.emplace_back(t, x);
        }
    }

    return result;
}

}  // namespace cqns
