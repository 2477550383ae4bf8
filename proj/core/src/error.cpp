#include "cqns/error.hpp"

namespace cqns {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::FileUnreadable: return "FileUnreadable";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::DuplicateDateForTicker: return "DuplicateDateForTicker";
        case ErrorCode::InvalidIndexSeries: return "InvalidIndexSeries";
        case ErrorCode::SeriesTooShort: return "SeriesTooShort";
        case ErrorCode::InsufficientObservations: return "InsufficientObservations";
        case ErrorCode::AsymmetricMatrix: return "AsymmetricMatrix";
        case ErrorCode::ZeroVarianceIndex: return "ZeroVarianceIndex";
        case ErrorCode::EmptyPortfolio: return "EmptyPortfolio";
        case ErrorCode::NegativeBaseNonIntegerPower: return "NegativeBaseNonIntegerPower";
        case ErrorCode::DegenerateCalibration: return "DegenerateCalibration";
        case ErrorCode::ZeroVariancePortfolio: return "ZeroVariancePortfolio";
        case ErrorCode::ComplexPowerTerm: return "ComplexPowerTerm";
        case ErrorCode::InvalidTargetK: return "InvalidTargetK";
        case ErrorCode::AllZeroQubo: return "AllZeroQubo";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::InvalidEntry: return "InvalidEntry";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::NonFiniteState: return "NonFiniteState";
        case ErrorCode::DegenerateModel: return "DegenerateModel";
        case ErrorCode::InvalidK: return "InvalidK";
        case ErrorCode::SeedDimensionMismatch: return "SeedDimensionMismatch";
        case ErrorCode::UniverseMismatch: return "UniverseMismatch";
        case ErrorCode::EmptyPool: return "EmptyPool";
        case ErrorCode::InvalidSubUniverse: return "InvalidSubUniverse";
        case ErrorCode::UsageError: return "UsageError";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "UnknownError";
}

}  // namespace cqns
