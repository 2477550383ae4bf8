#pragma once

#include <cstdint>
#include <string>

#include "cqns/pipeline.hpp"

namespace cqnscli {

/// What a rerun needs to reproduce this invocation bit for bit on the
/// same build. Deliberately carries no timestamps: the artifacts must
/// hash identically across repeated runs.
struct ManifestInfo {
    std::string command;      // argv joined with single spaces
    std::string config_path;  // file the hash covers; empty when none
    std::string config_hash;  // fnv1a64 hex of that file
    std::uint64_t seed = 0;
};

std::string manifest_json(const ManifestInfo& info);

/// Writes content exactly; raises IoError when the file cannot be
/// created. Parent directories must already exist.
void write_text_file(const std::string& path, const std::string& content);

/// Chart file naming shared by the writer and the `report` verifier:
/// "<ordinal>-<stage>-<solver>.csv" with '/' and '=' stripped from the
/// stage ("step2/k=4" becomes "step2-k4").
std::string chart_filename(std::size_t ordinal, const std::string& stage,
                           const std::string& solver);

/// One evaluation per row, in the solver's native objective:
/// `solver,sequence,cqns,sharpe` with an empty sharpe cell where the
/// solver space has none. Header always present.
std::string chart_csv(const cqns::SolverRun& run);

/// Lays down a full run directory: report.json, pools/*.jsonl,
/// charts/*.csv, validation.json, manifest.json and timings.json.
/// Refuses to overwrite an existing report (write-once per directory).
void emit_report(const cqns::PipelineReport& report, const std::string& validation_json,
                 const std::string& out_dir, const ManifestInfo& manifest);

}  // namespace cqnscli
