#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pnl {

enum class ErrorCode {
    InvalidArgument,
    CoincidentPoints,
    LineThroughCameraCenter,
    DegenerateNormalization,
    ConvergenceFailed,
    InsufficientLines,
    RankDeficient,
    SingularRotationBlock,
    DegenerateTranslation,
    AmbiguousPose,
    EmptyLineSet,
    TooFewInliers,
    SceneGenerationFailed,
    CoincidentEndpoints,
    SingularIntrinsics,
    ParseError,
    ConstraintViolation,
    JoinError,
};

std::string_view error_code_name(ErrorCode code);

// All library failures are reported through this exception type; code() tells
// callers (and the CLI exit-code mapping) what went wrong.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &message);

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

} // namespace pnl
