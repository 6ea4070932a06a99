#include "twophase/error.hpp"

namespace twophase {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MalformedDrift: return "MalformedDrift";
    case ErrorCode::GammaInadmissible: return "GammaInadmissible";
    case ErrorCode::AnchorViolation: return "AnchorViolation";
    case ErrorCode::DomainTooLarge: return "DomainTooLarge";
    case ErrorCode::DegenerateGamma: return "DegenerateGamma";
    case ErrorCode::HazardUnderflow: return "HazardUnderflow";
    case ErrorCode::StepCapExceeded: return "StepCapExceeded";
    case ErrorCode::OverflowGuard: return "OverflowGuard";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace twophase
