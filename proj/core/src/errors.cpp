#include "qef/errors.hpp"

#include <sstream>

namespace qef {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotHurwitz: return "NotHurwitz";
    case ErrorCode::kSolveFailure: return "SolveFailure";
    case ErrorCode::kStabilizingSolutionLost: return "StabilizingSolutionLost";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kNotHermitian: return "NotHermitian";
    case ErrorCode::kNotPsd: return "NotPSD";
    case ErrorCode::kSingularTransform: return "SingularTransform";
    case ErrorCode::kGenerationFailure: return "GenerationFailure";
    case ErrorCode::kGammaSingular: return "GammaSingular";
    case ErrorCode::kSingularV: return "SingularV";
    case ErrorCode::kThetaBeyondThreshold: return "ThetaBeyondThreshold";
    case ErrorCode::kOdeBlowup: return "OdeBlowup";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

namespace {
std::string gamma_message(int index, double condition) {
  std::ostringstream os;
  os << "gamma_" << index << " is numerically singular (condition number " << condition << ")";
  return os.str();
}
}  // namespace

GammaSingularError::GammaSingularError(int index, double condition)
    : Error(ErrorCode::kGammaSingular, gamma_message(index, condition)),
      index_(index),
      condition_(condition) {}

}  // namespace qef
