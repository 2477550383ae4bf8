#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cqns/pipeline.hpp"
#include "emit.hpp"
#include "run_config.hpp"

namespace {

using cqnscli::ManifestInfo;
using cqnscli::RunConfig;
using nlohmann::json;

std::string join_argv(int argc, char** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (i) out += ' ';
        out += argv[i];
    }
    return out;
}

cqns::CsvFormat parse_format(const std::string& name) {
    return name == "wide" ? cqns::CsvFormat::wide_csv : cqns::CsvFormat::long_csv;
}

int run_ingest(const std::string& prices, const std::string& format) {
    auto series = cqns::load_prices(prices, parse_format(format));
    json per = json::object();
    for (const auto& [ticker, s] : series) {
        std::size_t missing = 0;
        for (double p : s.adj_close)
            if (std::isnan(p)) ++missing;
        json row;
        row["rows"] = s.size();
        row["missing"] = missing;
        if (s.size() > 0) {
            row["start"] = cqns::format_date(s.dates.front());
            row["end"] = cqns::format_date(s.dates.back());
        } else {
            row["start"] = nullptr;
            row["end"] = nullptr;
        }
        per[ticker] = row;
    }
    json j;
    j["format"] = format;
    j["path"] = prices;
    j["tickers"] = series.size();
    j["series"] = per;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_validate(const std::string& prices, const std::string& index_path, std::size_t days,
                 double beta_min, double beta_max, const std::string& format) {
    const auto fmt = parse_format(format);
    auto series = cqns::load_prices(prices, fmt);
    auto index_set = cqns::load_prices(index_path, fmt);
    if (index_set.size() != 1)
        cqns::raise(cqns::ErrorCode::InvalidIndexSeries,
                    "index file must hold exactly one series, got " +
                        std::to_string(index_set.size()));
    cqns::BetaRange range{beta_min, beta_max};
    auto report = cqns::validate_universe(series, days, range, index_set.begin()->second);
    std::cout << report.to_json() << "\n";
    return 0;
}

int run_optimize(const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& out_flag, const std::string& command) {
    RunConfig cfg = cqnscli::parse_config_file(config_path);
    cqnscli::apply_overrides(cfg, seed, out_flag);
    if (cfg.pipeline.step1_target_n == 0)
        cqns::raise(cqns::ErrorCode::UsageError, "config is missing 'step1_target_n'");

    cqnscli::LoadedUniverse loaded = cqnscli::load_universe(cfg);
    cqns::PipelineReport report = cqns::run_full(loaded.universe, cfg.pipeline);

    ManifestInfo manifest;
    manifest.command = command;
    manifest.config_path = config_path;
    manifest.config_hash = cqnscli::file_hash_hex(config_path);
    manifest.seed = cfg.pipeline.per_solver_budget.seed;
    cqnscli::emit_report(report, loaded.validation.to_json(), cfg.out, manifest);

    json j;
    j["out"] = cfg.out;
    j["final_best"] = {
        {"selection", report.final_best.to_hex()},
        {"cardinality", report.final_best.cardinality()},
        {"cqns", report.final_best_report.cqns_final},
    };
    j["accepted_tickers"] = loaded.validation.accepted.size();
    j["rejected_tickers"] = loaded.validation.rejected.size();
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_export_qubo(const std::string& config_path, std::size_t k, const std::string& out_path,
                    const std::string& command) {
    RunConfig cfg = cqnscli::parse_config_file(config_path);
    cqnscli::LoadedUniverse loaded = cqnscli::load_universe(cfg);

    cqns::CalibrationResult cal = cqns::calibrate_power(loaded.universe);
    if (cal.degenerate)
        std::cerr << "warning: calibration degenerate, using the cubic fallback power\n";

    cqns::QuboBuildSpec spec = cfg.pipeline.qubo_spec;
    spec.target_k = k;
    spec.power = cal.power;
    cqns::Qubo q = cqns::build_cqns_qubo(loaded.universe, spec);
    cqns::ScaledQubo scaled = cqns::scale_qubo(q, spec.scale_range);
    cqns::export_qubo(scaled.qubo, out_path);

    ManifestInfo manifest;
    manifest.command = command;
    manifest.config_path = config_path;
    manifest.config_hash = cqnscli::file_hash_hex(config_path);
    manifest.seed = cfg.pipeline.per_solver_budget.seed;
    cqnscli::write_text_file(out_path + ".manifest.json", cqnscli::manifest_json(manifest));

    json j;
    j["out"] = out_path;
    j["assets"] = loaded.universe.size();
    j["k"] = k;
    j["power_w"] = cal.power.w;
    j["scale_factor"] = scaled.factor;
    j["scale_range"] = spec.scale_range;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_sbm_cmd(const std::string& qubo_path, std::optional<std::size_t> iterations,
                double epsilon, std::optional<double> xi0, const std::string& trajectory_path,
                const std::string& command) {
    cqns::Qubo q = cqns::import_qubo(qubo_path);
    cqns::IsingModel ising = cqns::qubo_to_ising(q);

    cqns::SbmParams params;
    params.epsilon = epsilon;
    if (iterations) params.iterations = *iterations;
    if (xi0) params.xi0 = *xi0;
    params.record_trajectory = !trajectory_path.empty();
    cqns::SbmResult result = cqns::run_sbm(ising, params);

    std::vector<int> bits(result.best_spins.size());
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = (result.best_spins[i] + 1) / 2;
    cqns::Portfolio selection = cqns::portfolio_from_bits(bits);

    if (!trajectory_path.empty()) {
        std::string csv = "iteration";
        for (Eigen::Index i = 0; i < ising.size(); ++i)
            csv += ",x" + std::to_string(i);
        csv += '\n';
        char num[32];
        for (const auto& [iteration, positions] : result.trajectory) {
            csv += std::to_string(iteration);
            for (Eigen::Index i = 0; i < positions.size(); ++i) {
                std::snprintf(num, sizeof(num), "%.17g", positions[i]);
                csv += ',';
                csv += num;
            }
            csv += '\n';
        }
        cqnscli::write_text_file(trajectory_path, csv);

        ManifestInfo manifest;
        manifest.command = command;
        manifest.config_path = qubo_path;
        manifest.config_hash = cqnscli::file_hash_hex(qubo_path);
        manifest.seed = params.seed;
        cqnscli::write_text_file(trajectory_path + ".manifest.json",
                                 cqnscli::manifest_json(manifest));
    }

    json j;
    j["qubo"] = qubo_path;
    j["spins"] = ising.size();
    j["best_energy"] = result.best_energy;
    j["best_iteration"] = result.best_iteration;
    j["iterations_run"] = result.iterations_run;
    j["energy_evaluations"] = result.energy_evaluations;
    j["selection"] = selection.to_hex();
    j["cardinality"] = selection.cardinality();
    std::cout << j.dump(2) << "\n";
    return 0;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) cqns::raise(cqns::ErrorCode::IoError, "cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        cqns::raise(cqns::ErrorCode::IoError, path.string() + ": " + e.what());
    }
    return j;
}

std::size_t count_csv_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) cqns::raise(cqns::ErrorCode::IoError, "cannot open " + path.string());
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    if (rows == 0) cqns::raise(cqns::ErrorCode::IoError, path.string() + ": missing header");
    return rows - 1;
}

// Cross-checks the artifacts in a run directory against report.json and
// prints a summary. Catches truncated pools or charts that drifted from
// the recorded evaluation counts.
int run_report(const std::string& in_dir) {
    namespace fs = std::filesystem;
    const fs::path root(in_dir);
    json report = read_json_file(root / "report.json");
    if (!fs::exists(root / "manifest.json"))
        cqns::raise(cqns::ErrorCode::IoError, in_dir + " has no manifest.json");

    const std::size_t n = report.at("tickers").size();

    // Pool files must parse and agree with the summarized sizes/bests.
    for (const auto& [key, summary] : report.at("pools").items()) {
        const fs::path path = root / "pools" / ("k" + key + ".jsonl");
        std::ifstream in(path);
        if (!in) cqns::raise(cqns::ErrorCode::IoError, "missing pool file " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        cqns::SolutionPool pool = cqns::SolutionPool::from_jsonl(n, buf.str());
        if (pool.size() != summary.at("size").get<std::size_t>())
            cqns::raise(cqns::ErrorCode::IoError,
                        path.string() + ": entry count disagrees with report.json");
        if (pool.best() &&
            pool.best()->score != summary.at("best_cqns").get<double>())
            cqns::raise(cqns::ErrorCode::IoError,
                        path.string() + ": best score disagrees with report.json");
    }

    // Chart row counts must equal the recorded evaluation counts.
    std::size_t ordinal = 0;
    for (const json& row : report.at("solvers")) {
        ++ordinal;
        const std::string name = cqnscli::chart_filename(
            ordinal, row.at("stage").get<std::string>(), row.at("solver").get<std::string>());
        const std::size_t rows = count_csv_rows(root / "charts" / name);
        if (rows != row.at("evaluations").get<std::size_t>())
            cqns::raise(cqns::ErrorCode::IoError,
                        name + ": " + std::to_string(rows) + " rows but " +
                            row.at("evaluations").dump() + " evaluations recorded");
    }

    json j;
    j["in"] = in_dir;
    j["final_best"] = report.at("final_best");
    j["target_ks"] = report.at("target_ks");
    j["solver_runs"] = report.at("solvers").size();
    j["pools_verified"] = report.at("pools").size();
    j["charts_verified"] = ordinal;
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Combinatorial portfolio optimization: validate a universe, score"
                 " subsets, compile to QUBO/Ising, and minimize with a solver team"};
    app.require_subcommand(1);

    std::string prices, format = "long";
    auto* ingest = app.add_subcommand("ingest", "Parse a price CSV and summarize each series");
    ingest->add_option("--prices", prices, "price CSV path")->required();
    ingest->add_option("--format", format, "long|wide")
        ->check(CLI::IsMember({"long", "wide"}));

    std::string index_path;
    std::size_t days = 0;
    double beta_min = 0.0, beta_max = 0.0;
    auto* validate = app.add_subcommand("validate", "Apply the data-quality rules to a universe");
    validate->add_option("--prices", prices, "price CSV path")->required();
    validate->add_option("--index", index_path, "index CSV path (single series)")->required();
    validate->add_option("--days", days, "required trading-day count")->required();
    validate->add_option("--beta-min", beta_min, "minimum acceptable beta")->required();
    validate->add_option("--beta-max", beta_max, "maximum acceptable beta")->required();
    validate->add_option("--format", format, "long|wide")
        ->check(CLI::IsMember({"long", "wide"}));

    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed_flag;
    auto* optimize = app.add_subcommand("optimize", "Run the two-step funnel and write a run directory");
    optimize->add_option("--config", config_path, "flat key=value run configuration")->required();
    optimize->add_option("--seed", seed_flag, "master seed (overrides the config)");
    optimize->add_option("--out", out_dir, "run directory (overrides the config)");

    std::size_t export_k = 0;
    std::string export_out;
    auto* export_qubo = app.add_subcommand("export-qubo", "Compile and export the scaled QUBO for one subset size");
    export_qubo->add_option("--config", config_path, "flat key=value run configuration")->required();
    export_qubo->add_option("--k", export_k, "target subset size")->required()
        ->check(CLI::PositiveNumber);
    export_qubo->add_option("--out", export_out, "output path for the coefficient file")->required();

    std::string qubo_path, trajectory_path;
    std::optional<std::size_t> sbm_iterations;
    std::optional<double> sbm_xi0;
    double sbm_epsilon = 0.5;
    auto* sbm_run = app.add_subcommand("sbm-run", "Minimize an exported QUBO with the bifurcation machine");
    sbm_run->add_option("--qubo", qubo_path, "coefficient file from export-qubo")->required();
    sbm_run->add_option("--iterations", sbm_iterations, "integration steps");
    sbm_run->add_option("--epsilon", sbm_epsilon, "integration time step");
    sbm_run->add_option("--xi0", sbm_xi0, "coupling strength (default: derived)");
    sbm_run->add_option("--trajectory", trajectory_path, "write position snapshots CSV here");

    std::string report_in;
    auto* report_cmd = app.add_subcommand("report", "Verify and summarize an existing run directory");
    report_cmd->add_option("--in", report_in, "run directory written by optimize")->required();

    try {
        app.parse(argc, argv);
        const std::string command = join_argv(argc, argv);
        if (ingest->parsed()) return run_ingest(prices, format);
        if (validate->parsed())
            return run_validate(prices, index_path, days, beta_min, beta_max, format);
        if (optimize->parsed()) return run_optimize(config_path, seed_flag, out_dir, command);
        if (export_qubo->parsed())
            return run_export_qubo(config_path, export_k, export_out, command);
        if (sbm_run->parsed())
            return run_sbm_cmd(qubo_path, sbm_iterations, sbm_epsilon, sbm_xi0, trajectory_path,
                               command);
        if (report_cmd->parsed()) return run_report(report_in);
        return 2;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        std::cerr << json{{"error", "UsageError"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    } catch (const cqns::Error& e) {
        std::cerr << json{{"error", cqns::to_string(e.code())}, {"message", e.what()}}.dump()
                  << "\n";
        return e.code() == cqns::ErrorCode::UsageError ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "Internal"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
}
