#include "cqns/qubo.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace cqns {

namespace {

bool is_integer(double w) { return std::isfinite(w) && w == std::floor(w); }

void require_qubo(const Qubo& q) {
    if (q.A.rows() != q.A.cols() || q.A.rows() != q.B.size()) {
        raise(ErrorCode::DimensionMismatch, "Qubo A/B dimensions disagree");
    }
    if (q.size() > 0 && (q.A - q.A.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        raise(ErrorCode::AsymmetricMatrix, "Qubo quadratic matrix is asymmetric");
    }
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Linear coefficients of the unpenalized objective: -(mu_i/k)^w. A
// negative mean under a fractional exponent has no real power, which
// would put a complex number on the QUBO diagonal.
Eigen::VectorXd linear_terms(const Universe& u, const QuboBuildSpec& spec) {
    const double k = static_cast<double>(spec.target_k);
    Eigen::VectorXd b(u.mu.size());
    for (Eigen::Index i = 0; i < u.mu.size(); ++i) {
        const double base = u.mu(i) / k;
        if (base < 0.0 && !is_integer(spec.power.w)) {
            raise(ErrorCode::ComplexPowerTerm,
                  "mu[" + std::to_string(i) + "]/k = " + std::to_string(base) +
                      " under non-integer power " + std::to_string(spec.power.w));
        }
        b(i) = -std::pow(base, spec.power.w);
    }
    return b;
}

void require_spec(const Universe& u, const QuboBuildSpec& spec) {
    if (spec.target_k < 1 || spec.target_k > u.size()) {
        raise(ErrorCode::InvalidTargetK,
              "target_k = " + std::to_string(spec.target_k) + " outside [1, " +
                  std::to_string(u.size()) + "]");
    }
    if (spec.penalty_lambda && *spec.penalty_lambda < 0.0) {
        raise(ErrorCode::InvalidArgument, "penalty_lambda must be nonnegative");
    }
}

}  // namespace

double default_penalty_lambda(const Universe& u, const QuboBuildSpec& spec) {
    require_spec(u, spec);
    const double k = static_cast<double>(spec.target_k);
    const Eigen::MatrixXd a = u.cov / (k * k);
    const Eigen::VectorXd b = linear_terms(u, spec);
    const double max_row_sum = a.cwiseAbs().rowwise().sum().maxCoeff();
    const double max_linear = b.size() ? b.cwiseAbs().maxCoeff() : 0.0;
    return max_row_sum + max_linear;
}

Qubo build_cqns_qubo(const Universe& u, const QuboBuildSpec& spec) {
    require_spec(u, spec);
    const auto n = static_cast<Eigen::Index>(u.size());
    const double k = static_cast<double>(spec.target_k);
    const double lambda =
        spec.penalty_lambda ? *spec.penalty_lambda : default_penalty_lambda(u, spec);

    Qubo q;
    q.A = u.cov / (k * k) + lambda * Eigen::MatrixXd::Ones(n, n);
    q.B = linear_terms(u, spec) - Eigen::VectorXd::Constant(n, 2.0 * lambda * k);
    q.K1 = lambda * k * k;
    return q;
}

ScaledQubo scale_qubo(const Qubo& q, double range) {
    require_qubo(q);
    if (range <= 0.0) {
        raise(ErrorCode::InvalidArgument, "scale range must be positive");
    }
    const double max_abs = std::max(q.A.cwiseAbs().maxCoeff(), q.B.cwiseAbs().maxCoeff());
    if (max_abs == 0.0) {
        raise(ErrorCode::AllZeroQubo, "cannot scale a QUBO with no nonzero coefficients");
    }
    const double s = max_abs / range;
    ScaledQubo out;
    out.qubo.A = q.A / s;
    out.qubo.B = q.B / s;
    out.qubo.K1 = q.K1 / s;
    out.factor = s;
    return out;
}

IsingModel qubo_to_ising(const Qubo& q) {
    require_qubo(q);
    const Eigen::Index n = q.size();

    IsingModel m;
    m.J = q.A / 4.0;
    m.J.diagonal().setZero();
    m.C = 0.5 * (q.B + q.A * Eigen::VectorXd::Ones(n));

    // Pin the constant by direct evaluation at the paired points x = 0,
    // z = -1 instead of trusting a closed-form expression for K2.
    const Eigen::VectorXd minus_one = Eigen::VectorXd::Constant(n, -1.0);
    const double spin_part = minus_one.dot(m.J * minus_one) + m.C.dot(minus_one);
    m.K2 = q.K1 - spin_part;
    return m;
}

double qubo_energy(const Qubo& q, const std::vector<int>& x) {
    require_qubo(q);
    if (static_cast<Eigen::Index>(x.size()) != q.size()) {
        raise(ErrorCode::DimensionMismatch,
              "bit vector length " + std::to_string(x.size()) + ", QUBO size " +
                  std::to_string(q.size()));
    }
    Eigen::VectorXd v(q.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] != 0 && x[i] != 1) {
            raise(ErrorCode::InvalidEntry, "bit vector entries must be 0 or 1");
        }
        v(static_cast<Eigen::Index>(i)) = static_cast<double>(x[i]);
    }
    return v.dot(q.A * v) + q.B.dot(v) + q.K1;
}

double ising_energy(const IsingModel& m, const std::vector<int>& z) {
    if (static_cast<Eigen::Index>(z.size()) != m.size()) {
        raise(ErrorCode::DimensionMismatch,
              "spin vector length " + std::to_string(z.size()) + ", model size " +
                  std::to_string(m.size()));
    }
    Eigen::VectorXd v(m.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] != -1 && z[i] != 1) {
            raise(ErrorCode::InvalidEntry, "spin vector entries must be -1 or 1");
        }
        v(static_cast<Eigen::Index>(i)) = static_cast<double>(z[i]);
    }
    return v.dot(m.J * v) + m.C.dot(v) + m.K2;
}

void export_qubo(const Qubo& q, const std::string& path) {
    require_qubo(q);
    std::ofstream out(path);
    if (!out) {
        raise(ErrorCode::IoError, "cannot write '" + path + "'");
    }
    const Eigen::Index n = q.size();
    out << "N " << n << " K1 " << format_double(q.K1) << "\n";
    for (Eigen::Index i = 0; i < n; ++i) {
        const double diag = q.A(i, i) + q.B(i);
        if (diag != 0.0) {
            out << i << " " << i << " " << format_double(diag) << "\n";
        }
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double coeff = 2.0 * q.A(i, j);
            if (coeff != 0.0) {
                out << i << " " << j << " " << format_double(coeff) << "\n";
            }
        }
    }
    if (!out.good()) {
        raise(ErrorCode::IoError, "write to '" + path + "' failed");
    }
}

Qubo import_qubo(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        raise(ErrorCode::IoError, "cannot read '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        raise(ErrorCode::IoError, "'" + path + "' is empty");
    }
    std::istringstream header(line);
    std::string n_tag, k1_tag;
    long long n = -1;
    double k1 = 0.0;
    header >> n_tag >> n >> k1_tag >> k1;
    if (header.fail() || n_tag != "N" || k1_tag != "K1" || n < 0) {
        raise(ErrorCode::InvalidEntry, "'" + path + "': bad header, expected `N <n> K1 <c>`");
    }

    Qubo q;
    q.A = Eigen::MatrixXd::Zero(n, n);
    q.B = Eigen::VectorXd::Zero(n);
    q.K1 = k1;

    std::set<std::pair<long long, long long>> seen;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        long long i = -1, j = -1;
        double coeff = 0.0;
        row >> i >> j >> coeff;
        if (row.fail() || i < 0 || j < i || j >= n) {
            raise(ErrorCode::InvalidEntry,
                  "'" + path + "' line " + std::to_string(line_no) + ": expected `i j coeff`");
        }
        if (!seen.insert({i, j}).second) {
            raise(ErrorCode::InvalidEntry, "'" + path + "' line " + std::to_string(line_no) +
                                               ": duplicate coefficient");
        }
        if (i == j) {
            q.B(i) = coeff;
        } else {
            q.A(i, j) = coeff / 2.0;
            q.A(j, i) = coeff / 2.0;
        }
    }
    return q;
}

}  // namespace cqns
