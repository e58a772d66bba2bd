#pragma once

#include <stdexcept>
#include <string>

namespace vflow {

enum class ErrorCode {
  OverlappingObstacles,
  NonSimpleCurve,
  HoleOutsideOuterBoundary,
  OriginNotInvertible,
  TooFewNodes,
  CoincidentPoints,
  PointOutsideDomain,
  IllConditionedSystem,
  ResolutionTooLow,
  UnresolvedSingularity,
  EvaluationAtAtom,
  InconsistentModes,
  CollidingVortices,
  VortexExitedDomain,
  IncompatibleDomain,
  BadLocalizer,
  AtomsPresent,
  TrajectoryTooShort,
  InvalidArgument,
  ConfigError,
  IoError,
};

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Config and I/O problems map to exit code 2, everything numerical to 3.
inline bool is_config_error(ErrorCode c) {
  return c == ErrorCode::ConfigError || c == ErrorCode::IoError || c == ErrorCode::InvalidArgument ||
         c == ErrorCode::OverlappingObstacles || c == ErrorCode::NonSimpleCurve ||
         c == ErrorCode::HoleOutsideOuterBoundary || c == ErrorCode::TooFewNodes;
}

}  // namespace vflow
