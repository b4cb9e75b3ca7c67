#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace batplace {

enum class ErrorCode {
  InvalidGrid,
  DisconnectedGrid,
  InvalidScenario,
  DimensionMismatch,
  BusOutOfRange,
  UnsupportedTopology,
  PreconditionViolated,
  BalanceOutOfRange,
  Infeasible,
  NumericalFailure,
  ParseError,
  MismatchedInstance,
  Io,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::DisconnectedGrid: return "DisconnectedGrid";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BusOutOfRange: return "BusOutOfRange";
    case ErrorCode::UnsupportedTopology: return "UnsupportedTopology";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::BalanceOutOfRange: return "BalanceOutOfRange";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MismatchedInstance: return "MismatchedInstance";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

// All library failures are reported through this exception; `code()` lets
// callers branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace batplace
