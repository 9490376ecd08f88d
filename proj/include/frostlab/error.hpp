#pragma once

#include <stdexcept>
#include <string>

namespace frostlab {

enum class ErrorCode {
  kOk = 0,
  kEmptySupport,
  kZeroMassCube,
  kZeroMassSet,
  kBadNormal,
  kDepthMismatch,
  kOutOfRange,
  kHypothesisFailed,
  kNonConcentrationFailed,
  kEpsTooSmallForT,
  kBadDelta,
  kSupportTooLarge,
  kPreconditionFailed,
  kSingularPoint,
  kNotDominated,
  kLinearizationOutOfRange,
  kRhoDecayFailed,
  kNuDecayFailed,
  kDimensionMismatch,
  kUnknownGenerator,
  kInvalidArgument,
  kParseError,
  kIoError,
  kInternal,
};

// Stable identifier used in JSON reports and by the C API.
const char* ErrorName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorName(code)) + ": " + what),
        code_(code),
        detail_(what) {}

  ErrorCode code() const { return code_; }
  // The message without the code name.
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void Require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

}  // namespace frostlab
