#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ecbf {

enum class ErrorCode {
  kNonFiniteEvaluation,
  kPreconditionViolated,
  kDegenerateGradient,
  kDegenerateRow,
  kRankDeficient,
  kTooManyRows,
  kTooManyLimits,
  kSingularSubsystem,
  kSegmentCrossesInfeasible,
  kControllerFailure,
  kConfigError,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. Every throw site carries a code so callers that
/// sweep many states (grid classification, simulation) can record failures
/// per cell instead of aborting.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ecbf
