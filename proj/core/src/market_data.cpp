#include "cqns/market_data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace cqns {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(trim(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(trim(current));
    return fields;
}

// Empty field = missing observation (NaN). Anything non-numeric throws.
double parse_price_field(const std::string& field) {
    if (field.empty()) return std::numeric_limits<double>::quiet_NaN();
    const char* begin = field.c_str();
    char* end = nullptr;
    double value = std::strtod(begin, &end);
    if (end != begin + field.size()) {
        throw std::invalid_argument("not a number: '" + field + "'");
    }
    return value;
}

void sort_and_check_dates(PriceSeries& s) {
    std::vector<std::size_t> order(s.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s.dates[a] < s.dates[b]; });
    std::vector<Date> dates(s.size());
    std::vector<double> prices(s.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        dates[i] = s.dates[order[i]];
        prices[i] = s.adj_close[order[i]];
    }
    for (std::size_t i = 1; i < dates.size(); ++i) {
        if (dates[i] == dates[i - 1]) {
            raise(ErrorCode::DuplicateDateForTicker,
                  "duplicate date " + format_date(dates[i]) + " for ticker " + s.ticker);
        }
    }
    s.dates = std::move(dates);
    s.adj_close = std::move(prices);
}

bool has_negative(const PriceSeries& s) {
    return std::any_of(s.adj_close.begin(), s.adj_close.end(),
                       [](double p) { return p <= 0.0; });
}

bool has_missing(const PriceSeries& s) {
    return std::any_of(s.adj_close.begin(), s.adj_close.end(),
                       [](double p) { return std::isnan(p); });
}

}  // namespace

Date parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw std::invalid_argument("expected YYYY-MM-DD, got '" + std::string(text) + "'");
    }
    auto digits = [&](std::size_t pos, std::size_t len) -> int {
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            char c = text[i];
            if (c < '0' || c > '9') {
                throw std::invalid_argument("expected YYYY-MM-DD, got '" + std::string(text) + "'");
            }
            v = v * 10 + (c - '0');
        }
        return v;
    };
    std::chrono::year_month_day ymd{std::chrono::year{digits(0, 4)},
                                    std::chrono::month{static_cast<unsigned>(digits(5, 2))},
                                    std::chrono::day{static_cast<unsigned>(digits(8, 2))}};
    if (!ymd.ok()) {
        throw std::invalid_argument("invalid calendar date '" + std::string(text) + "'");
    }
    return std::chrono::sys_days{ymd};
}

std::string format_date(Date d) {
    std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()));
    return buf;
}

std::map<std::string, PriceSeries> load_prices(const std::string& path, CsvFormat format) {
    std::ifstream in(path);
    if (!in) {
        raise(ErrorCode::FileUnreadable, "cannot open '" + path + "'");
    }
    std::string line;
    std::size_t line_no = 0;

    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!trim(line).empty()) return true;
        }
        return false;
    };

    if (!next_line()) {
        raise(ErrorCode::FileUnreadable, "'" + path + "' is empty");
    }

    std::map<std::string, PriceSeries> out;
    const auto header = split_csv_line(line);

    if (format == CsvFormat::long_csv) {
        if (header.size() != 3 || lower(header[0]) != "date" || lower(header[1]) != "ticker" ||
            lower(header[2]) != "adj_close") {
            raise(ErrorCode::FileUnreadable,
                  "'" + path + "': expected header date,ticker,adj_close");
        }
        while (next_line()) {
            const auto fields = split_csv_line(line);
            if (fields.size() != 3 || fields[1].empty()) {
                raise(ErrorCode::MalformedRow,
                      "line " + std::to_string(line_no) + ": expected date,ticker,adj_close");
            }
            try {
                Date d = parse_date(fields[0]);
                double p = parse_price_field(fields[2]);
                PriceSeries& s = out[fields[1]];
                s.ticker = fields[1];
                s.dates.push_back(d);
                s.adj_close.push_back(p);
            } catch (const std::invalid_argument& e) {
                raise(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": " + e.what());
            }
        }
    } else {
        if (header.size() < 2 || lower(header[0]) != "date") {
            raise(ErrorCode::FileUnreadable, "'" + path + "': expected header date,<tickers...>");
        }
        std::vector<std::string> tickers(header.begin() + 1, header.end());
        for (const auto& t : tickers) {
            if (t.empty() || out.count(t)) {
                raise(ErrorCode::FileUnreadable, "'" + path + "': bad or duplicate ticker in header");
            }
            out[t].ticker = t;
        }
        while (next_line()) {
            const auto fields = split_csv_line(line);
            if (fields.size() != tickers.size() + 1) {
                raise(ErrorCode::MalformedRow,
                      "line " + std::to_string(line_no) + ": expected " +
                          std::to_string(tickers.size() + 1) + " fields, got " +
                          std::to_string(fields.size()));
            }
            try {
                Date d = parse_date(fields[0]);
                for (std::size_t i = 0; i < tickers.size(); ++i) {
                    PriceSeries& s = out[tickers[i]];
                    s.dates.push_back(d);
                    s.adj_close.push_back(parse_price_field(fields[i + 1]));
                }
            } catch (const std::invalid_argument& e) {
                raise(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": " + e.what());
            }
        }
    }

    for (auto& [ticker, s] : out) {
        sort_and_check_dates(s);
    }
    return out;
}

const char* to_string(RejectReason reason) noexcept {
    switch (reason) {
        case RejectReason::NegativePrice: return "NegativePrice";
        case RejectReason::MissingPrice: return "MissingPrice";
        case RejectReason::IncompleteHistory: return "IncompleteHistory";
        case RejectReason::DownloadFailed: return "DownloadFailed";
        case RejectReason::NegativeBeta: return "NegativeBeta";
        case RejectReason::BetaOutOfRange: return "BetaOutOfRange";
    }
    return "?";
}

std::string ValidationReport::to_json() const {
    nlohmann::json j;
    j["accepted"] = accepted;
    nlohmann::json rej = nlohmann::json::object();
    for (const auto& [ticker, reason] : rejected) {
        rej[ticker] = to_string(reason);
    }
    j["rejected"] = rej;
    return j.dump();
}

ValidationReport validate_universe(const std::map<std::string, PriceSeries>& series,
                                   std::size_t expected_days, const BetaRange& beta_range,
                                   const PriceSeries& index) {
    if (expected_days < 2) {
        raise(ErrorCode::InvalidArgument, "expected_days must be >= 2");
    }
    if (index.size() < 2 || has_negative(index) || has_missing(index)) {
        raise(ErrorCode::InvalidIndexSeries,
              "index series '" + index.ticker + "' fails its own price checks");
    }

    const std::vector<double> index_ret = compute_returns(index);
    const Eigen::Map<const Eigen::VectorXd> index_vec(index_ret.data(),
                                                      static_cast<Eigen::Index>(index_ret.size()));

    ValidationReport report;
    for (const auto& [ticker, s] : series) {
        if (s.size() == 0) {
            report.rejected[ticker] = RejectReason::DownloadFailed;
            continue;
        }
        if (has_negative(s)) {
            report.rejected[ticker] = RejectReason::NegativePrice;
            continue;
        }
        if (has_missing(s)) {
            report.rejected[ticker] = RejectReason::MissingPrice;
            continue;
        }
        if (s.size() != expected_days || s.size() != index.size() || s.dates != index.dates) {
            report.rejected[ticker] = RejectReason::IncompleteHistory;
            continue;
        }
        const std::vector<double> ret = compute_returns(s);
        Eigen::MatrixXd row(1, static_cast<Eigen::Index>(ret.size()));
        for (std::size_t i = 0; i < ret.size(); ++i) row(0, static_cast<Eigen::Index>(i)) = ret[i];
        const double beta = compute_betas(row, index_vec)(0);
        if (beta < beta_range.min || beta > beta_range.max) {
            report.rejected[ticker] =
                beta < 0.0 ? RejectReason::NegativeBeta : RejectReason::BetaOutOfRange;
            continue;
        }
        report.accepted.push_back(ticker);
    }
    return report;
}

std::vector<double> compute_returns(const PriceSeries& series) {
    if (series.size() < 2) {
        raise(ErrorCode::SeriesTooShort,
              "ticker '" + series.ticker + "' has " + std::to_string(series.size()) +
                  " observations, need at least 2");
    }
    std::vector<double> out(series.size() - 1);
    for (std::size_t t = 0; t + 1 < series.size(); ++t) {
        const double p0 = series.adj_close[t];
        const double p1 = series.adj_close[t + 1];
        if (!(p0 > 0.0) || !(p1 > 0.0)) {
            raise(ErrorCode::InvalidEntry,
                  "ticker '" + series.ticker + "' has a non-positive price; validate first");
        }
        out[t] = p1 / p0 - 1.0;
    }
    return out;
}

Eigen::MatrixXd compute_covariance(const Eigen::MatrixXd& returns) {
    const Eigen::Index T = returns.cols();
    if (T < 2) {
        raise(ErrorCode::InsufficientObservations,
              "covariance needs at least 2 observations, got " + std::to_string(T));
    }
    const Eigen::VectorXd means = returns.rowwise().mean();
    const Eigen::MatrixXd centered = returns.colwise() - means;
    Eigen::MatrixXd cov = (centered * centered.transpose()) / static_cast<double>(T - 1);
    cov = ((cov + cov.transpose()) / 2.0).eval();
    return cov;
}

PsdReport check_psd(const Eigen::MatrixXd& cov, double tol) {
    if (cov.rows() != cov.cols()) {
        raise(ErrorCode::AsymmetricMatrix, "matrix is not square");
    }
    const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12) {
        raise(ErrorCode::AsymmetricMatrix,
              "matrix is asymmetric (max deviation " + std::to_string(asym) + ")");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov, Eigen::EigenvaluesOnly);
    const double min_eig = solver.eigenvalues().minCoeff();
    return PsdReport{min_eig >= -tol, min_eig};
}

double default_psd_tol(const Eigen::MatrixXd& cov) {
    return 1e-8 * std::max(0.0, cov.diagonal().maxCoeff());
}

Eigen::VectorXd compute_betas(const Eigen::MatrixXd& returns,
                              const Eigen::VectorXd& index_returns) {
    const Eigen::Index T = returns.cols();
    if (T != index_returns.size()) {
        raise(ErrorCode::DimensionMismatch, "returns and index_returns lengths differ");
    }
    if (T < 2) {
        raise(ErrorCode::InsufficientObservations, "beta needs at least 2 observations");
    }
    const Eigen::VectorXd idx_centered =
        index_returns.array() - index_returns.mean();
    const double idx_var = idx_centered.squaredNorm() / static_cast<double>(T - 1);
    if (idx_var == 0.0) {
        raise(ErrorCode::ZeroVarianceIndex, "index returns have zero variance");
    }
    const Eigen::VectorXd means = returns.rowwise().mean();
    const Eigen::MatrixXd centered = returns.colwise() - means;
    Eigen::VectorXd betas =
        (centered * idx_centered) / static_cast<double>(T - 1) / idx_var;
    return betas;
}

Universe make_universe(std::vector<std::string> tickers, Eigen::MatrixXd returns,
                       Eigen::VectorXd index_returns) {
    if (tickers.size() < 2) {
        raise(ErrorCode::InvalidArgument, "a universe needs at least 2 assets");
    }
    if (static_cast<Eigen::Index>(tickers.size()) != returns.rows()) {
        raise(ErrorCode::DimensionMismatch, "tickers/returns row count mismatch");
    }
    Universe u;
    u.tickers = std::move(tickers);
    u.mu = returns.rowwise().mean();
    u.cov = compute_covariance(returns);
    u.betas = compute_betas(returns, index_returns);
    u.returns = std::move(returns);
    u.index_returns = std::move(index_returns);
    return u;
}

Universe build_universe(const std::map<std::string, PriceSeries>& series,
                        const std::vector<std::string>& accepted, const PriceSeries& index) {
    const std::vector<double> index_ret = compute_returns(index);
    Eigen::VectorXd index_vec(static_cast<Eigen::Index>(index_ret.size()));
    for (std::size_t i = 0; i < index_ret.size(); ++i)
        index_vec(static_cast<Eigen::Index>(i)) = index_ret[i];

    Eigen::MatrixXd returns(static_cast<Eigen::Index>(accepted.size()), index_vec.size());
    for (std::size_t a = 0; a < accepted.size(); ++a) {
        auto it = series.find(accepted[a]);
        if (it == series.end()) {
            raise(ErrorCode::InvalidArgument, "ticker '" + accepted[a] + "' not in series map");
        }
        const std::vector<double> ret = compute_returns(it->second);
        if (static_cast<Eigen::Index>(ret.size()) != index_vec.size()) {
            raise(ErrorCode::DimensionMismatch,
                  "ticker '" + accepted[a] + "' return length differs from index");
        }
        for (std::size_t t = 0; t < ret.size(); ++t)
            returns(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(t)) = ret[t];
    }
    return make_universe(accepted, std::move(returns), std::move(index_vec));
}

}  // namespace cqns
