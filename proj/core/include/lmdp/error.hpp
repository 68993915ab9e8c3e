#pragma once

#include <stdexcept>
#include <string>

namespace lmdp {

enum class ErrorCode {
    DimensionMismatch,
    NotStochastic,
    NoAbsorption,
    Overflow,
    SingularSystem,
    ZeroNormalizer,
    NonPositiveDesirability,
    InvalidTrajectory,
    DegenerateBasis,
    NonPositiveComposite,
    AllZeroColumn,
    SingularFundamentalMatrix,
    AlreadyTerminated,
    CannotTerminateBase,
    InvalidSpec,
    BlockedCell,
    EmptyTarget,
    ParseError,
};

/// Short identifier for an error code, e.g. "NotStochastic".
const char* to_string(ErrorCode code) noexcept;

/// Base exception of the library. Carries a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// True for codes that describe a failed numerical computation rather than bad input.
bool is_numerical(ErrorCode code) noexcept;

} // namespace lmdp
