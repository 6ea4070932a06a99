#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace twophase {

enum class ErrorCode {
  InvalidArgument,
  MalformedDrift,
  GammaInadmissible,
  AnchorViolation,
  DomainTooLarge,
  DegenerateGamma,
  HazardUnderflow,
  StepCapExceeded,
  OverflowGuard,
  ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace twophase
