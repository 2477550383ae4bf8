#pragma once

#include <stdexcept>
#include <string>

namespace cqns {

/// Failure codes surfaced by the library. The CLI maps these to exit
/// status 1 and prints the code name on stderr, so the names are a
/// stable contract.
enum class ErrorCode {
    // market data
    FileUnreadable,
    MalformedRow,
    DuplicateDateForTicker,
    InvalidIndexSeries,
    SeriesTooShort,
    InsufficientObservations,
    AsymmetricMatrix,
    ZeroVarianceIndex,
    // scoring
    EmptyPortfolio,
    NegativeBaseNonIntegerPower,
    DegenerateCalibration,
    ZeroVariancePortfolio,
    // qubo
    ComplexPowerTerm,
    InvalidTargetK,
    AllZeroQubo,
    DimensionMismatch,
    InvalidEntry,
    IoError,
    // sbm
    NonFiniteState,
    DegenerateModel,
    // heuristics
    InvalidK,
    SeedDimensionMismatch,
    UniverseMismatch,
    // pipeline
    EmptyPool,
    InvalidSubUniverse,
    // cli / generic
    UsageError,
    InvalidArgument,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace cqns
