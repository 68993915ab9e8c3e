#include "lmdp/error.hpp"

namespace lmdp {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotStochastic: return "NotStochastic";
    case ErrorCode::NoAbsorption: return "NoAbsorption";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::ZeroNormalizer: return "ZeroNormalizer";
    case ErrorCode::NonPositiveDesirability: return "NonPositiveDesirability";
    case ErrorCode::InvalidTrajectory: return "InvalidTrajectory";
    case ErrorCode::DegenerateBasis: return "DegenerateBasis";
    case ErrorCode::NonPositiveComposite: return "NonPositiveComposite";
    case ErrorCode::AllZeroColumn: return "AllZeroColumn";
    case ErrorCode::SingularFundamentalMatrix: return "SingularFundamentalMatrix";
    case ErrorCode::AlreadyTerminated: return "AlreadyTerminated";
    case ErrorCode::CannotTerminateBase: return "CannotTerminateBase";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::BlockedCell: return "BlockedCell";
    case ErrorCode::EmptyTarget: return "EmptyTarget";
    case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

bool is_numerical(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::Overflow:
    case ErrorCode::SingularSystem:
    case ErrorCode::ZeroNormalizer:
    case ErrorCode::NonPositiveDesirability:
    case ErrorCode::NonPositiveComposite:
    case ErrorCode::SingularFundamentalMatrix:
        return true;
    default:
        return false;
    }
}

} // namespace lmdp
