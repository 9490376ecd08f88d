#include "frostlab/error.hpp"

namespace frostlab {

const char* ErrorName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kEmptySupport: return "EmptySupport";
    case ErrorCode::kZeroMassCube: return "ZeroMassCube";
    case ErrorCode::kZeroMassSet: return "ZeroMassSet";
    case ErrorCode::kBadNormal: return "BadNormal";
    case ErrorCode::kDepthMismatch: return "DepthMismatch";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kHypothesisFailed: return "HypothesisFailed";
    case ErrorCode::kNonConcentrationFailed: return "NonConcentrationFailed";
    case ErrorCode::kEpsTooSmallForT: return "EpsTooSmallForT";
    case ErrorCode::kBadDelta: return "BadDelta";
    case ErrorCode::kSupportTooLarge: return "SupportTooLarge";
    case ErrorCode::kPreconditionFailed: return "PreconditionFailed";
    case ErrorCode::kSingularPoint: return "SingularPoint";
    case ErrorCode::kNotDominated: return "NotDominated";
    case ErrorCode::kLinearizationOutOfRange: return "LinearizationOutOfRange";
    case ErrorCode::kRhoDecayFailed: return "RhoDecayFailed";
    case ErrorCode::kNuDecayFailed: return "NuDecayFailed";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kUnknownGenerator: return "UnknownGenerator";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

}  // namespace frostlab
