#include "hardball/errors.hpp"

namespace hardball {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadDimension: return "BadDimension";
    case ErrorCode::OverlapGeometry: return "OverlapGeometry";
    case ErrorCode::DegenerateMasses: return "DegenerateMasses";
    case ErrorCode::ZeroMass: return "ZeroMass";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::PackingTimeout: return "PackingTimeout";
    case ErrorCode::TangentialApproach: return "TangentialApproach";
    case ErrorCode::TangentialEvent: return "TangentialEvent";
    case ErrorCode::SimultaneousCollision: return "SimultaneousCollision";
    case ErrorCode::AccumulationGuard: return "AccumulationGuard";
    case ErrorCode::NotInContact: return "NotInContact";
    case ErrorCode::RecedingPair: return "RecedingPair";
    case ErrorCode::SingularSegment: return "SingularSegment";
    case ErrorCode::SchemeChanged: return "SchemeChanged";
    case ErrorCode::NotConnectedPair: return "NotConnectedPair";
    case ErrorCode::MethodDisagreement: return "MethodDisagreement";
    case ErrorCode::Schema: return "SchemaError";
  }
  return "UnknownError";
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadDimension:
    case ErrorCode::OverlapGeometry:
    case ErrorCode::DegenerateMasses:
    case ErrorCode::ZeroMass:
    case ErrorCode::Config:
    case ErrorCode::Schema:
      return 2;
    case ErrorCode::MethodDisagreement:
    case ErrorCode::NotConnectedPair:
      return 3;
    default:
      return 4;
  }
}

}  // namespace hardball
