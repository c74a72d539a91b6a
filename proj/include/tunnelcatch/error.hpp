#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tunnelcatch {

enum class ErrorCode {
  InvalidArgument,
  NoTurningPoint,
  NonMonotoneSlope,
  RootBracketFailure,
  QuadratureFailure,
  EnergyOutOfRange,
  NoDepthRoot,
  NotEnoughBoundStates,
  BarrierPierced,
  InvalidTwoLevel,
  NonPositiveDelta,
  GridMismatch,
  StabilityBudgetExceeded,
  ValidityViolated,
  NotFirstPeak,
  NoPeakFound,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NoTurningPoint: return "NoTurningPoint";
    case ErrorCode::NonMonotoneSlope: return "NonMonotoneSlope";
    case ErrorCode::RootBracketFailure: return "RootBracketFailure";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::EnergyOutOfRange: return "EnergyOutOfRange";
    case ErrorCode::NoDepthRoot: return "NoDepthRoot";
    case ErrorCode::NotEnoughBoundStates: return "NotEnoughBoundStates";
    case ErrorCode::BarrierPierced: return "BarrierPierced";
    case ErrorCode::InvalidTwoLevel: return "InvalidTwoLevel";
    case ErrorCode::NonPositiveDelta: return "NonPositiveDelta";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::StabilityBudgetExceeded: return "StabilityBudgetExceeded";
    case ErrorCode::ValidityViolated: return "ValidityViolated";
    case ErrorCode::NotFirstPeak: return "NotFirstPeak";
    case ErrorCode::NoPeakFound: return "NoPeakFound";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tunnelcatch
