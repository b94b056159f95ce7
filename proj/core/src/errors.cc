#include "pnl/errors.h"

namespace pnl {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::CoincidentPoints: return "CoincidentPoints";
    case ErrorCode::LineThroughCameraCenter: return "LineThroughCameraCenter";
    case ErrorCode::DegenerateNormalization: return "DegenerateNormalization";
    case ErrorCode::ConvergenceFailed: return "ConvergenceFailed";
    case ErrorCode::InsufficientLines: return "InsufficientLines";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::SingularRotationBlock: return "SingularRotationBlock";
    case ErrorCode::DegenerateTranslation: return "DegenerateTranslation";
    case ErrorCode::AmbiguousPose: return "AmbiguousPose";
    case ErrorCode::EmptyLineSet: return "EmptyLineSet";
    case ErrorCode::TooFewInliers: return "TooFewInliers";
    case ErrorCode::SceneGenerationFailed: return "SceneGenerationFailed";
    case ErrorCode::CoincidentEndpoints: return "CoincidentEndpoints";
    case ErrorCode::SingularIntrinsics: return "SingularIntrinsics";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConstraintViolation: return "ConstraintViolation";
    case ErrorCode::JoinError: return "JoinError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string &message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

} // namespace pnl
