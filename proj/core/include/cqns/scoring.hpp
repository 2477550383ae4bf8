#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cqns/error.hpp"
#include "cqns/market_data.hpp"

namespace cqns {

/// Subset of a Universe as a fixed-length bit-vector. Bit i corresponds
/// to tickers[i]. Stored LSB-first in byte i/8, which also defines the
/// hex serialization: two lowercase digits per byte, bytes in index
/// order, so "03" over N=8 means assets {0, 1}.
class Portfolio {
public:
    Portfolio() = default;
    explicit Portfolio(std::size_t n) : n_(n), bytes_((n + 7) / 8, 0) {}

    static Portfolio all_in(std::size_t n);
    static Portfolio from_indices(std::size_t n, const std::vector<std::size_t>& indices);
    static Portfolio from_hex(std::size_t n, std::string_view hex);

    std::size_t size() const { return n_; }
    std::size_t cardinality() const;
    bool empty() const { return cardinality() == 0; }

    bool test(std::size_t i) const;
    void set(std::size_t i, bool value = true);
    void flip(std::size_t i);

    std::vector<std::size_t> indices() const;
    std::string to_hex() const;

    friend bool operator==(const Portfolio& a, const Portfolio& b) {
        return a.n_ == b.n_ && a.bytes_ == b.bytes_;
    }
    friend bool operator!=(const Portfolio& a, const Portfolio& b) { return !(a == b); }
    friend bool operator<(const Portfolio& a, const Portfolio& b) {
        if (a.n_ != b.n_) return a.n_ < b.n_;
        return a.bytes_ < b.bytes_;
    }

private:
    std::size_t n_ = 0;
    std::vector<std::uint8_t> bytes_;
};

/// Exponent applied to the portfolio mean inside both CQNS forms. The
/// uncalibrated default is the cubic from the score's original
/// definition.
struct CqnsPower {
    double w = 3.0;
};

struct CalibrationResult {
    CqnsPower power;
    /// True when the all-in statistics could not support the log-ratio
    /// formula and the cubic fallback was used instead. Callers should
    /// warn the user.
    bool degenerate = false;
};

struct ScoreReport {
    double cqns_final = 0.0;
    double cqns_legacy = 0.0;
    double expected_return = 0.0;
    double variance = 0.0;
    double sharpe = 0.0;
    double power_used = 0.0;

    std::string to_json() const;
};

/// Equal-weight portfolio mean: sum of mu_i / k over held assets.
double portfolio_mean(const Universe& u, const Portfolio& p);

/// Equal-weight portfolio variance: (1/k^2) * sum of cov_ij over held pairs.
double portfolio_variance(const Universe& u, const Portfolio& p);

/// Net score actually used for ranking: Var[P] - mean(P)^w. More
/// negative is more attractive.
double cqns_final(const Universe& u, const Portfolio& p, CqnsPower w);

/// Separable variant the QUBO compilation uses: Var[P] - sum_i (mu_i/k)^w.
double cqns_legacy(const Universe& u, const Portfolio& p, CqnsPower w);

/// w = ln(Var_all) / ln(E_all) over the all-in portfolio, chosen so the
/// all-in score is zero. Falls back to w = 3 (degenerate = true) when
/// the all-in variance or mean makes the ratio undefined, nonpositive,
/// or not finite.
CalibrationResult calibrate_power(const Universe& u);

/// (mean - risk_free) / stddev, per-day units.
double sharpe(const Universe& u, const Portfolio& p, double risk_free = 0.0);

ScoreReport score_portfolio(const Universe& u, const Portfolio& p, CqnsPower w,
                            double risk_free = 0.0);

/// Ranking rule every solver shares: ascending by score, so the most
/// negative score is the best portfolio.
inline constexpr bool more_attractive(double score_a, double score_b) noexcept {
    return score_a < score_b;
}

/// Bridges to the QUBO solvers' bit-vector representation.
Portfolio portfolio_from_bits(const std::vector<int>& bits);
std::vector<int> bits_from_portfolio(const Portfolio& p);

}  // namespace cqns
