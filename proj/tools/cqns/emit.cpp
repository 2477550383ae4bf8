#include "emit.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <Eigen/Core>
#include <json.hpp>

namespace cqnscli {

using cqns::ErrorCode;
using cqns::raise;

namespace fs = std::filesystem;

namespace {

constexpr const char* kToolkitVersion = "0.1.0";

std::string shortest_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string manifest_json(const ManifestInfo& info) {
    nlohmann::json j;
    j["command"] = info.command;
    j["config"] = info.config_path.empty() ? nlohmann::json() : nlohmann::json(info.config_path);
    j["config_hash"] = info.config_hash.empty() ? nlohmann::json() : nlohmann::json(info.config_hash);
    j["seed"] = info.seed;
    j["versions"] = {
        {"cqns", kToolkitVersion},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                      "." + std::to_string(EIGEN_MINOR_VERSION)},
        {"compiler", __VERSION__},
    };
    return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::IoError, "cannot create " + path);
    out << content;
    if (!out) raise(ErrorCode::IoError, "short write to " + path);
}

std::string chart_filename(std::size_t ordinal, const std::string& stage,
                           const std::string& solver) {
    std::string clean;
    for (char c : stage) {
        if (c == '/') clean += '-';
        else if (c != '=') clean += c;
    }
    char prefix[8];
    std::snprintf(prefix, sizeof(prefix), "%02zu", ordinal);
    return std::string(prefix) + "-" + clean + "-" + solver + ".csv";
}

std::string chart_csv(const cqns::SolverRun& run) {
    std::string csv = "solver,sequence,cqns,sharpe\n";
    std::size_t sequence = 0;
    for (const cqns::TraceRow& row : run.trace) {
        ++sequence;
        csv += run.solver;
        csv += ',';
        csv += std::to_string(sequence);
        csv += ',';
        csv += shortest_double(row.score);
        csv += ',';
        if (row.sharpe) csv += shortest_double(*row.sharpe);
        csv += '\n';
    }
    return csv;
}

void emit_report(const cqns::PipelineReport& report, const std::string& validation_json,
                 const std::string& out_dir, const ManifestInfo& manifest) {
    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "charts", ec);
    fs::create_directories(fs::path(out_dir) / "pools", ec);
    if (ec) raise(ErrorCode::IoError, "cannot create run directory " + out_dir);

    const fs::path root(out_dir);
    if (fs::exists(root / "report.json"))
        raise(ErrorCode::IoError,
              out_dir + " already holds a report; runs are write-once per directory");

    write_text_file((root / "report.json").string(), report.to_json() + "\n");
    if (!validation_json.empty())
        write_text_file((root / "validation.json").string(), validation_json + "\n");

    if (report.step1)
        write_text_file((root / "pools" / "step1.jsonl").string(), report.step1->pool.to_jsonl());
    for (const auto& [k, pool] : report.pools_by_k)
        write_text_file((root / "pools" / ("k" + std::to_string(k) + ".jsonl")).string(),
                        pool.to_jsonl());

    std::size_t ordinal = 0;
    auto write_chart = [&](const cqns::SolverRun& run) {
        ++ordinal;
        const std::string name = chart_filename(ordinal, run.stage, run.solver);
        write_text_file((root / "charts" / name).string(), chart_csv(run));
    };
    if (report.step1)
        for (const cqns::SolverRun& run : report.step1->runs) write_chart(run);
    for (const cqns::SolverRun& run : report.runs) write_chart(run);

    // Wall-clock cost lives apart from the deterministic artifacts.
    nlohmann::json timings;
    timings["runs"] = nlohmann::json::array();
    double total = 0.0;
    auto time_row = [&](const cqns::SolverRun& run) {
        timings["runs"].push_back(
            {{"stage", run.stage}, {"solver", run.solver}, {"seconds", run.seconds}});
        total += run.seconds;
    };
    if (report.step1)
        for (const cqns::SolverRun& run : report.step1->runs) time_row(run);
    for (const cqns::SolverRun& run : report.runs) time_row(run);
    timings["total_seconds"] = total;
    write_text_file((root / "timings.json").string(), timings.dump(2) + "\n");

    write_text_file((root / "manifest.json").string(), manifest_json(manifest));
}

}  // namespace cqnscli
