#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace floqnet {

enum class ErrorCode {
    NonConvergence,
    SingularInput,
    NonDiagonalizable,
    StepFailure,
    Blowup,
    StepBudgetExceeded,
    OutOfRange,
    InvalidParam,
    FixedPointConvergence,
    NoCrossings,
    NotPeriodic,
    ClosureDrift,
    InvalidAdjacency,
    DimensionMismatch,
    DisconnectedGraph,
    ConfigError,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

/// True for errors caused by bad user input rather than numerical failure.
[[nodiscard]] bool is_validation_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace floqnet
