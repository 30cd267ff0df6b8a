#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qef {

enum class ErrorCode {
  kNotHurwitz,
  kSolveFailure,
  kStabilizingSolutionLost,
  kNoConvergence,
  kNotHermitian,
  kNotPsd,
  kSingularTransform,
  kGenerationFailure,
  kGammaSingular,
  kSingularV,
  kThetaBeyondThreshold,
  kOdeBlowup,
  kParseError,
  kValidationError,
  kInvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Every failure in the library surfaces as a qef::Error carrying a code,
// so callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised when the cascade hits a numerically singular gamma_j.
class GammaSingularError : public Error {
 public:
  GammaSingularError(int index, double condition);

  int index() const noexcept { return index_; }
  double condition() const noexcept { return condition_; }

 private:
  int index_;
  double condition_;
};

}  // namespace qef
