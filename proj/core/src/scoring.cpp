#include "cqns/scoring.hpp"

#include <cmath>

#include <json.hpp>

namespace cqns {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

bool is_integer(double w) { return std::isfinite(w) && w == std::floor(w); }

// base^w guarded so scores stay real-valued. Negative base with a
// fractional exponent is an error, not a NaN.
double real_pow(double base, double w) {
    if (base < 0.0 && !is_integer(w)) {
        raise(ErrorCode::NegativeBaseNonIntegerPower,
              "cannot raise negative mean " + std::to_string(base) +
                  " to non-integer power " + std::to_string(w));
    }
    return std::pow(base, w);
}

void require_valid(const Universe& u, const Portfolio& p) {
    if (p.size() != u.size()) {
        raise(ErrorCode::UniverseMismatch,
              "portfolio is over " + std::to_string(p.size()) + " assets, universe has " +
                  std::to_string(u.size()));
    }
    if (p.cardinality() == 0) {
        raise(ErrorCode::EmptyPortfolio, "portfolio holds no assets");
    }
}

}  // namespace

Portfolio Portfolio::all_in(std::size_t n) {
    Portfolio p(n);
    for (std::size_t i = 0; i < n; ++i) p.set(i);
    return p;
}

Portfolio Portfolio::from_indices(std::size_t n, const std::vector<std::size_t>& indices) {
    Portfolio p(n);
    for (std::size_t i : indices) p.set(i);
    return p;
}

Portfolio Portfolio::from_hex(std::size_t n, std::string_view hex) {
    Portfolio p(n);
    if (hex.size() != p.bytes_.size() * 2) {
        raise(ErrorCode::InvalidEntry,
              "hex selection has " + std::to_string(hex.size()) + " digits, expected " +
                  std::to_string(p.bytes_.size() * 2));
    }
    for (std::size_t b = 0; b < p.bytes_.size(); ++b) {
        const int hi = hex_value(hex[2 * b]);
        const int lo = hex_value(hex[2 * b + 1]);
        if (hi < 0 || lo < 0) {
            raise(ErrorCode::InvalidEntry, "non-hex digit in selection");
        }
        p.bytes_[b] = static_cast<std::uint8_t>(hi << 4 | lo);
    }
    // bits beyond n must be clear, otherwise two strings would decode to
    // the same selection
    for (std::size_t i = n; i < p.bytes_.size() * 8; ++i) {
        if (p.bytes_[i >> 3] & (1u << (i & 7))) {
            raise(ErrorCode::InvalidEntry, "selection sets bits past the universe size");
        }
    }
    return p;
}

std::size_t Portfolio::cardinality() const {
    std::size_t count = 0;
    for (std::uint8_t byte : bytes_) {
        count += static_cast<std::size_t>(__builtin_popcount(byte));
    }
    return count;
}

bool Portfolio::test(std::size_t i) const {
    if (i >= n_) raise(ErrorCode::InvalidArgument, "bit index out of range");
    return bytes_[i >> 3] & (1u << (i & 7));
}

void Portfolio::set(std::size_t i, bool value) {
    if (i >= n_) raise(ErrorCode::InvalidArgument, "bit index out of range");
    if (value) {
        bytes_[i >> 3] |= static_cast<std::uint8_t>(1u << (i & 7));
    } else {
        bytes_[i >> 3] &= static_cast<std::uint8_t>(~(1u << (i & 7)));
    }
}

void Portfolio::flip(std::size_t i) { set(i, !test(i)); }

std::vector<std::size_t> Portfolio::indices() const {
    std::vector<std::size_t> out;
    out.reserve(cardinality());
    for (std::size_t i = 0; i < n_; ++i) {
        if (bytes_[i >> 3] & (1u << (i & 7))) out.push_back(i);
    }
    return out;
}

std::string Portfolio::to_hex() const {
    std::string out(bytes_.size() * 2, '0');
    for (std::size_t b = 0; b < bytes_.size(); ++b) {
        out[2 * b] = kHexDigits[bytes_[b] >> 4];
        out[2 * b + 1] = kHexDigits[bytes_[b] & 0xf];
    }
    return out;
}

double portfolio_mean(const Universe& u, const Portfolio& p) {
    require_valid(u, p);
    const auto held = p.indices();
    double sum = 0.0;
    for (std::size_t i : held) sum += u.mu(static_cast<Eigen::Index>(i));
    return sum / static_cast<double>(held.size());
}

double portfolio_variance(const Universe& u, const Portfolio& p) {
    require_valid(u, p);
    const auto held = p.indices();
    const double k = static_cast<double>(held.size());
    // Wide subsets amortize better as a dense quadratic form; small ones
    // (the regime the samplers live in) stay on the pair loop.
    if (held.size() > 64) {
        Eigen::VectorXd ind = Eigen::VectorXd::Zero(u.cov.rows());
        for (std::size_t i : held) ind[static_cast<Eigen::Index>(i)] = 1.0;
        return ind.dot(u.cov * ind) / (k * k);
    }
    double sum = 0.0;
    for (std::size_t i : held) {
        for (std::size_t j : held) {
            sum += u.cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    return sum / (k * k);
}

double cqns_final(const Universe& u, const Portfolio& p, CqnsPower w) {
    return portfolio_variance(u, p) - real_pow(portfolio_mean(u, p), w.w);
}

double cqns_legacy(const Universe& u, const Portfolio& p, CqnsPower w) {
    require_valid(u, p);
    const auto held = p.indices();
    const double k = static_cast<double>(held.size());
    double linear = 0.0;
    for (std::size_t i : held) {
        linear += real_pow(u.mu(static_cast<Eigen::Index>(i)) / k, w.w);
    }
    return portfolio_variance(u, p) - linear;
}

CalibrationResult calibrate_power(const Universe& u) {
    const Portfolio all = Portfolio::all_in(u.size());
    const double var_all = portfolio_variance(u, all);
    const double mean_all = portfolio_mean(u, all);

    CalibrationResult result;
    if (var_all > 0.0 && mean_all > 0.0 && mean_all != 1.0) {
        const double w = std::log(var_all) / std::log(mean_all);
        if (std::isfinite(w) && w > 0.0) {
            result.power.w = w;
            return result;
        }
    }
    result.power.w = 3.0;
    result.degenerate = true;
    return result;
}

double sharpe(const Universe& u, const Portfolio& p, double risk_free) {
    const double var = portfolio_variance(u, p);
    if (var <= 0.0) {
        raise(ErrorCode::ZeroVariancePortfolio,
              "portfolio variance " + std::to_string(var) + " admits no Sharpe ratio");
    }
    return (portfolio_mean(u, p) - risk_free) / std::sqrt(var);
}

ScoreReport score_portfolio(const Universe& u, const Portfolio& p, CqnsPower w,
                            double risk_free) {
    ScoreReport r;
    r.cqns_final = cqns_final(u, p, w);
    r.cqns_legacy = cqns_legacy(u, p, w);
    r.expected_return = portfolio_mean(u, p);
    r.variance = portfolio_variance(u, p);
    r.sharpe = sharpe(u, p, risk_free);
    r.power_used = w.w;
    return r;
}

std::string ScoreReport::to_json() const {
    nlohmann::json j;
    j["cqns_final"] = cqns_final;
    j["cqns_legacy"] = cqns_legacy;
    j["expected_return"] = expected_return;
    j["variance"] = variance;
    j["sharpe"] = sharpe;
    j["power_used"] = power_used;
    return j.dump();
}

Portfolio portfolio_from_bits(const std::vector<int>& bits) {
    Portfolio p(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] != 0 && bits[i] != 1)
            raise(ErrorCode::InvalidEntry, "bit vector entries must be 0 or 1");
        if (bits[i]) p.set(i);
    }
    return p;
}

std::vector<int> bits_from_portfolio(const Portfolio& p) {
    std::vector<int> bits(p.size(), 0);
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p.test(i)) bits[i] = 1;
    return bits;
}

}  // namespace cqns
