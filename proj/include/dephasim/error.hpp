#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dephasim {

enum class ErrorCode {
  EmptySystem,
  NonPositiveModeFrequency,
  FockLengthMismatch,
  NegativeTemperature,
  InvalidParameter,
  ThermalStateNotFock,
  ZeroPopulationVariance,
  QuadratureNotConverged,
  UnsupportedBath,
  DimensionCapExceeded,
  TruncationInsufficient,
  EigenSolverFailure,
  NonConvergence,
  Config,
  Io,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptySystem: return "EmptySystem";
    case ErrorCode::NonPositiveModeFrequency: return "NonPositiveModeFrequency";
    case ErrorCode::FockLengthMismatch: return "FockLengthMismatch";
    case ErrorCode::NegativeTemperature: return "NegativeTemperature";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::ThermalStateNotFock: return "ThermalStateNotFock";
    case ErrorCode::ZeroPopulationVariance: return "ZeroPopulationVariance";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::UnsupportedBath: return "UnsupportedBath";
    case ErrorCode::DimensionCapExceeded: return "DimensionCapExceeded";
    case ErrorCode::TruncationInsufficient: return "TruncationInsufficient";
    case ErrorCode::EigenSolverFailure: return "EigenSolverFailure";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable code next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dephasim
