#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cqns/error.hpp"
#include "cqns/market_data.hpp"
#include "cqns/scoring.hpp"

namespace cqns {

/// Quadratic binary objective x'Ax + B.x + K1 over x in {0,1}^N.
struct Qubo {
    Eigen::MatrixXd A;  // N x N, symmetric
    Eigen::VectorXd B;  // length N
    double K1 = 0.0;

    Eigen::Index size() const { return B.size(); }
};

/// Spin-space equivalent z'Jz + C.z + K2 over z in {-1,1}^N. J carries a
/// zero diagonal: self-couplings are constant over spins and live in K2.
struct IsingModel {
    Eigen::MatrixXd J;
    Eigen::VectorXd C;
    double K2 = 0.0;

    Eigen::Index size() const { return C.size(); }
};

/// Recipe for compiling the separable CQNS objective plus a cardinality
/// penalty into a Qubo. When penalty_lambda is unset the build picks
/// default_penalty_lambda, sized so a one-asset cardinality violation
/// costs more than any coefficient of the unpenalized objective.
struct QuboBuildSpec {
    std::size_t target_k = 1;
    CqnsPower power;
    std::optional<double> penalty_lambda;
    double scale_range = 4.0;
};

/// max row-sum of |A'| plus max |B'_i| over the unpenalized problem.
double default_penalty_lambda(const Universe& u, const QuboBuildSpec& spec);

/// A = cov/k^2 + lambda * ones, B_i = -(mu_i/k)^w - 2*lambda*k,
/// K1 = lambda * k^2. Minimizing this over k-subsets minimizes the
/// separable CQNS score.
Qubo build_cqns_qubo(const Universe& u, const QuboBuildSpec& spec);

struct ScaledQubo {
    Qubo qubo;
    double factor = 1.0;  // original = scaled * factor
};

/// Divides A, B and K1 by s = max_abs_coeff / range so the largest
/// coefficient magnitude lands on `range`. Energies scale by 1/s, so
/// argmin sets are untouched.
ScaledQubo scale_qubo(const Qubo& q, double range);

/// Change of variables z = 2x - 1: J = A/4 (diagonal folded into K2),
/// C = (B + A.1)/2, and K2 fixed by evaluating both forms at x = 0,
/// z = -1 so total energies agree exactly.
IsingModel qubo_to_ising(const Qubo& q);

double qubo_energy(const Qubo& q, const std::vector<int>& x);
double ising_energy(const IsingModel& m, const std::vector<int>& z);

/// Coordinate text format: `N <n> K1 <constant>` header, then `i j coeff`
/// with i <= j under the {0,1} polynomial convention (diagonal entries
/// carry A_ii + B_i, off-diagonal carry 2*A_ij). Zero coefficients are
/// omitted. Doubles print with 17 significant digits so import is
/// bit-exact.
void export_qubo(const Qubo& q, const std::string& path);

/// Inverse of export_qubo up to the diagonal split: the polynomial's
/// diagonal coefficient comes back in B with A_ii = 0, which leaves
/// every {0,1} energy and the derived Ising model unchanged.
Qubo import_qubo(const std::string& path);

}  // namespace cqns
