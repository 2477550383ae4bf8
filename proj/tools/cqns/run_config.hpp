#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "cqns/market_data.hpp"
#include "cqns/pipeline.hpp"

namespace cqnscli {

/// Everything an optimize / export-qubo invocation needs, read from a
/// flat key=value file. '#' starts a comment, blank lines are skipped,
/// unknown keys are usage errors so typos fail loudly instead of
/// silently running with defaults.
struct RunConfig {
    // data inputs
    std::string prices;
    cqns::CsvFormat format = cqns::CsvFormat::long_csv;
    std::string index_file;    // exactly one of index_file / index_ticker
    std::string index_ticker;  // names a column inside the prices file
    std::size_t days = 0;      // 0: take the index series length
    cqns::BetaRange beta_range;

    // funnel configuration (seed lives in pipeline.per_solver_budget.seed)
    cqns::PipelineConfig pipeline;

    // artifact destination for optimize
    std::string out = "cqns-out";
};

RunConfig parse_config_file(const std::string& path);

/// Command-line flags win over file values.
void apply_overrides(RunConfig& cfg, std::optional<std::uint64_t> seed,
                     const std::string& out);

struct LoadedUniverse {
    cqns::Universe universe;
    cqns::ValidationReport validation;
};

/// Runs the full data path: load prices, resolve the index series,
/// validate every ticker, build the universe from the survivors.
LoadedUniverse load_universe(const RunConfig& cfg);

/// FNV-1a of the raw file bytes, as 16 lowercase hex digits. The
/// manifest records it so a rerun can prove it saw the same config.
std::string file_hash_hex(const std::string& path);

}  // namespace cqnscli
