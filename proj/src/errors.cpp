#include "vortexflow/errors.hpp"

namespace vflow {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::OverlappingObstacles: return "OverlappingObstacles";
    case ErrorCode::NonSimpleCurve: return "NonSimpleCurve";
    case ErrorCode::HoleOutsideOuterBoundary: return "HoleOutsideOuterBoundary";
    case ErrorCode::OriginNotInvertible: return "OriginNotInvertible";
    case ErrorCode::TooFewNodes: return "TooFewNodes";
    case ErrorCode::CoincidentPoints: return "CoincidentPoints";
    case ErrorCode::PointOutsideDomain: return "PointOutsideDomain";
    case ErrorCode::IllConditionedSystem: return "IllConditionedSystem";
    case ErrorCode::ResolutionTooLow: return "ResolutionTooLow";
    case ErrorCode::UnresolvedSingularity: return "UnresolvedSingularity";
    case ErrorCode::EvaluationAtAtom: return "EvaluationAtAtom";
    case ErrorCode::InconsistentModes: return "InconsistentModes";
    case ErrorCode::CollidingVortices: return "CollidingVortices";
    case ErrorCode::VortexExitedDomain: return "VortexExitedDomain";
    case ErrorCode::IncompatibleDomain: return "IncompatibleDomain";
    case ErrorCode::BadLocalizer: return "BadLocalizer";
    case ErrorCode::AtomsPresent: return "AtomsPresent";
    case ErrorCode::TrajectoryTooShort: return "TrajectoryTooShort";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace vflow
