#pragma once

#include <chrono>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cqns/error.hpp"

namespace cqns {

using Date = std::chrono::sys_days;

/// Parses an ISO-8601 calendar date ("YYYY-MM-DD"). Throws
/// std::invalid_argument on anything else; callers translate into
/// MalformedRow with a line number.
Date parse_date(std::string_view text);
std::string format_date(Date d);

/// Adjusted-close history for one ticker. As loaded from disk the prices
/// may still contain defects (negative values, NaN for missing cells);
/// validate_universe is the pass that rejects those.
struct PriceSeries {
    std::string ticker;
    std::vector<Date> dates;       // strictly increasing
    std::vector<double> adj_close; // same length as dates; NaN = missing

    std::size_t size() const { return dates.size(); }
};

enum class CsvFormat { long_csv, wide_csv };

/// Reads a price CSV into one series per ticker.
///
/// long_csv:  header `date,ticker,adj_close`, one observation per row.
/// wide_csv:  header `date,<ticker1>,<ticker2>,...`; an empty cell is a
///            missing price (stored as NaN).
///
/// Rows are sorted by date per ticker after parsing. Errors:
/// FileUnreadable (missing/empty file or bad header), MalformedRow
/// (unparseable field, with line number), DuplicateDateForTicker.
std::map<std::string, PriceSeries> load_prices(const std::string& path, CsvFormat format);

enum class RejectReason {
    NegativePrice,
    MissingPrice,
    IncompleteHistory,
    DownloadFailed,
    NegativeBeta,
    BetaOutOfRange,
};

const char* to_string(RejectReason reason) noexcept;

struct BetaRange {
    double min = 0.0;
    double max = std::numeric_limits<double>::infinity();
};

/// Outcome of the universe validation pass. accepted and rejected
/// partition the input ticker set.
struct ValidationReport {
    std::vector<std::string> accepted;
    std::map<std::string, RejectReason> rejected;

    /// `{"accepted":[...],"rejected":{"TICK":"NegativePrice",...}}`
    std::string to_json() const;
};

/// Applies the data-quality rules to every ticker. A ticker is rejected
/// with the first failing rule, checked in the order: empty series
/// (DownloadFailed), NegativePrice, MissingPrice, IncompleteHistory,
/// then beta screens (NegativeBeta when beta < 0, else BetaOutOfRange).
/// `expected_days` is the required trading-day count; series must also
/// align date-for-date with the index. Throws InvalidIndexSeries if the
/// index itself has defects.
ValidationReport validate_universe(const std::map<std::string, PriceSeries>& series,
                                   std::size_t expected_days, const BetaRange& beta_range,
                                   const PriceSeries& index);

/// Daily simple returns r_t = p_{t+1} / p_t - 1. Length = len - 1.
std::vector<double> compute_returns(const PriceSeries& series);

/// Sample covariance (unbiased, T-1 denominator) of an N x T matrix of
/// per-asset return rows. Output is exactly symmetric.
Eigen::MatrixXd compute_covariance(const Eigen::MatrixXd& returns);

struct PsdReport {
    bool psd = false;
    double min_eigenvalue = 0.0;
};

/// True iff the minimum eigenvalue is >= -tol. Requires symmetry within
/// 1e-12 (AsymmetricMatrix otherwise).
PsdReport check_psd(const Eigen::MatrixXd& cov, double tol);

/// Default eigenvalue tolerance: 1e-8 x max diagonal entry.
double default_psd_tol(const Eigen::MatrixXd& cov);

/// beta_i = Cov(r_i, index) / Var(index).
Eigen::VectorXd compute_betas(const Eigen::MatrixXd& returns,
                              const Eigen::VectorXd& index_returns);

/// Validated asset universe: everything downstream scoring and the
/// solvers consume. Immutable after construction.
struct Universe {
    std::vector<std::string> tickers;  // length N
    Eigen::MatrixXd returns;           // N x (T-1) daily simple returns
    Eigen::VectorXd mu;                // mean daily return per asset
    Eigen::MatrixXd cov;               // N x N sample covariance
    Eigen::VectorXd betas;             // vs. index_returns
    Eigen::VectorXd index_returns;     // length T-1

    std::size_t size() const { return tickers.size(); }
};

/// Assembles a Universe from raw return rows (used by tests and when
/// subsetting). mu, cov and betas are recomputed so the documented
/// identities hold exactly.
Universe make_universe(std::vector<std::string> tickers, Eigen::MatrixXd returns,
                       Eigen::VectorXd index_returns);

/// Assembles a Universe from validated price series.
Universe build_universe(const std::map<std::string, PriceSeries>& series,
                        const std::vector<std::string>& accepted, const PriceSeries& index);

}  // namespace cqns
