#include "floqnet/error.hpp"

namespace floqnet {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::SingularInput: return "SingularInput";
        case ErrorCode::NonDiagonalizable: return "NonDiagonalizable";
        case ErrorCode::StepFailure: return "StepFailure";
        case ErrorCode::Blowup: return "Blowup";
        case ErrorCode::StepBudgetExceeded: return "StepBudgetExceeded";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::InvalidParam: return "InvalidParam";
        case ErrorCode::FixedPointConvergence: return "FixedPointConvergence";
        case ErrorCode::NoCrossings: return "NoCrossings";
        case ErrorCode::NotPeriodic: return "NotPeriodic";
        case ErrorCode::ClosureDrift: return "ClosureDrift";
        case ErrorCode::InvalidAdjacency: return "InvalidAdjacency";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

bool is_validation_error(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidParam:
        case ErrorCode::InvalidAdjacency:
        case ErrorCode::DimensionMismatch:
        case ErrorCode::DisconnectedGraph:
        case ErrorCode::ConfigError:
            return true;
        default:
            return false;
    }
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace floqnet
