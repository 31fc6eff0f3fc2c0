#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hardball {

enum class ErrorCode {
  // configuration / parameter errors
  BadDimension,
  OverlapGeometry,
  DegenerateMasses,
  ZeroMass,
  Config,
  // numerical degeneracies
  PackingTimeout,
  TangentialApproach,
  TangentialEvent,
  SimultaneousCollision,
  AccumulationGuard,
  NotInContact,
  RecedingPair,
  SingularSegment,
  SchemeChanged,
  NotConnectedPair,
  // internal consistency
  MethodDisagreement,
  Schema,
};

std::string_view to_string(ErrorCode code);

/// Process exit code associated with an error class:
/// 2 configuration, 3 internal consistency, 4 numerical degeneracy.
int exit_code(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hardball
