#include "run_config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>

#include "cqns/rng.hpp"

namespace cqnscli {

using cqns::ErrorCode;
using cqns::raise;

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
    raise(ErrorCode::UsageError,
          "config key '" + key + "': cannot read '" + value + "' as " + expected);
}

double parse_double(const std::string& key, const std::string& value) {
    if (value == "inf") return std::numeric_limits<double>::infinity();
    if (value == "-inf") return -std::numeric_limits<double>::infinity();
    try {
        std::size_t pos = 0;
        double d = std::stod(value, &pos);
        if (pos != value.size()) bad_value(key, value, "a number");
        return d;
    } catch (const std::exception&) {
        bad_value(key, value, "a number");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        bad_value(key, value, "an unsigned integer");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad_value(key, value, "true or false");
}

std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& value) {
    std::vector<std::size_t> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) bad_value(key, value, "a comma-separated list of sizes");
        out.push_back(static_cast<std::size_t>(parse_u64(key, item)));
    }
    return out;
}

}  // namespace

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::FileUnreadable, "cannot open config file: " + path);

    RunConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::string stripped = trim(line);
        if (stripped.empty()) continue;

        auto eq = stripped.find('=');
        if (eq == std::string::npos)
            raise(ErrorCode::UsageError, "config line " + std::to_string(line_no) +
                                             ": expected key = value, got '" + stripped + "'");
        std::string key = trim(stripped.substr(0, eq));
        std::string value = trim(stripped.substr(eq + 1));
        if (key.empty() || value.empty())
            raise(ErrorCode::UsageError,
                  "config line " + std::to_string(line_no) + ": empty key or value");

        if (key == "prices") {
            cfg.prices = value;
        } else if (key == "format") {
            if (value == "long")
                cfg.format = cqns::CsvFormat::long_csv;
            else if (value == "wide")
                cfg.format = cqns::CsvFormat::wide_csv;
            else
                bad_value(key, value, "'long' or 'wide'");
        } else if (key == "index_file") {
            cfg.index_file = value;
        } else if (key == "index_ticker") {
            cfg.index_ticker = value;
        } else if (key == "days") {
            cfg.days = static_cast<std::size_t>(parse_u64(key, value));
        } else if (key == "beta_min") {
            cfg.beta_range.min = parse_double(key, value);
        } else if (key == "beta_max") {
            cfg.beta_range.max = parse_double(key, value);
        } else if (key == "step1_target_n") {
            cfg.pipeline.step1_target_n = static_cast<std::size_t>(parse_u64(key, value));
        } else if (key == "step2_target_ks") {
            cfg.pipeline.step2_target_ks = parse_size_list(key, value);
        } else if (key == "seed") {
            cfg.pipeline.per_solver_budget.seed = parse_u64(key, value);
        } else if (key == "max_evaluations") {
            cfg.pipeline.per_solver_budget.max_evaluations = parse_u64(key, value);
        } else if (key == "max_seconds") {
            cfg.pipeline.per_solver_budget.max_seconds = parse_double(key, value);
        } else if (key == "power_policy") {
            if (value == "carry_forward")
                cfg.pipeline.power_policy = cqns::PowerPolicy::carry_forward;
            else if (value == "recalibrate")
                cfg.pipeline.power_policy = cqns::PowerPolicy::recalibrate;
            else
                bad_value(key, value, "'carry_forward' or 'recalibrate'");
        } else if (key == "penalty_lambda") {
            cfg.pipeline.qubo_spec.penalty_lambda = parse_double(key, value);
        } else if (key == "scale_range") {
            cfg.pipeline.qubo_spec.scale_range = parse_double(key, value);
        } else if (key == "concurrent") {
            cfg.pipeline.concurrent = parse_bool(key, value);
        } else if (key == "sa_initial_temperature") {
            cfg.pipeline.sa.initial_temperature = parse_double(key, value);
        } else if (key == "sa_cooling_ratio") {
            cfg.pipeline.sa.cooling_ratio = parse_double(key, value);
        } else if (key == "sa_calibration_samples") {
            cfg.pipeline.sa.calibration_samples = static_cast<std::size_t>(parse_u64(key, value));
        } else if (key == "ga_population_size") {
            cfg.pipeline.ga.population_size = static_cast<std::size_t>(parse_u64(key, value));
        } else if (key == "ga_generations") {
            cfg.pipeline.ga.generations = static_cast<std::size_t>(parse_u64(key, value));
        } else if (key == "ga_crossover_rate") {
            cfg.pipeline.ga.crossover_rate = parse_double(key, value);
        } else if (key == "ga_mutation_rate") {
            cfg.pipeline.ga.mutation_rate = parse_double(key, value);
        } else if (key == "ga_elitism_count") {
            cfg.pipeline.ga.elitism_count = static_cast<std::size_t>(parse_u64(key, value));
        } else if (key == "tabu_tenure") {
            cfg.pipeline.tabu.tenure = static_cast<std::size_t>(parse_u64(key, value));
        } else if (key == "tabu_restart_after") {
            cfg.pipeline.tabu.restart_after = static_cast<std::size_t>(parse_u64(key, value));
        } else if (key == "sbm_iterations") {
            cfg.pipeline.sbm.iterations = static_cast<std::size_t>(parse_u64(key, value));
        } else if (key == "sbm_epsilon") {
            cfg.pipeline.sbm.epsilon = parse_double(key, value);
        } else if (key == "sbm_pressure_schedule") {
            if (value == "linear")
                cfg.pipeline.sbm.pressure_schedule = cqns::PressureSchedule::linear;
            else if (value == "logistic")
                cfg.pipeline.sbm.pressure_schedule = cqns::PressureSchedule::logistic;
            else
                bad_value(key, value, "'linear' or 'logistic'");
        } else if (key == "out") {
            cfg.out = value;
        } else {
            raise(ErrorCode::UsageError,
                  "config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }

    if (!cfg.index_file.empty() && !cfg.index_ticker.empty())
        raise(ErrorCode::UsageError, "config sets both index_file and index_ticker");
    return cfg;
}

void apply_overrides(RunConfig& cfg, std::optional<std::uint64_t> seed,
                     const std::string& out) {
    if (seed) cfg.pipeline.per_solver_budget.seed = *seed;
    if (!out.empty()) cfg.out = out;
}

LoadedUniverse load_universe(const RunConfig& cfg) {
    if (cfg.prices.empty()) raise(ErrorCode::UsageError, "config is missing 'prices'");
    if (cfg.index_file.empty() && cfg.index_ticker.empty())
        raise(ErrorCode::UsageError, "config needs 'index_file' or 'index_ticker'");

    auto series = cqns::load_prices(cfg.prices, cfg.format);

    cqns::PriceSeries index;
    if (!cfg.index_ticker.empty()) {
        auto it = series.find(cfg.index_ticker);
        if (it == series.end())
            raise(ErrorCode::InvalidIndexSeries,
                  "index ticker '" + cfg.index_ticker + "' not present in " + cfg.prices);
        index = it->second;
        series.erase(it);
    } else {
        auto loaded = cqns::load_prices(cfg.index_file, cfg.format);
        if (loaded.size() != 1)
            raise(ErrorCode::InvalidIndexSeries,
                  "index file must hold exactly one series, got " +
                      std::to_string(loaded.size()));
        index = loaded.begin()->second;
    }

    const std::size_t days = cfg.days > 0 ? cfg.days : index.size();
    LoadedUniverse out;
    out.validation = cqns::validate_universe(series, days, cfg.beta_range, index);
    out.universe = cqns::build_universe(series, out.validation.accepted, index);
    return out;
}

std::string file_hash_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::FileUnreadable, "cannot open for hashing: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    const std::uint64_t h = cqns::fnv1a64(bytes);
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return std::string(out);
}

}  // namespace cqnscli
