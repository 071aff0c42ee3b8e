#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace randens {

/// Failure categories raised by the library. The CLI maps them onto exit codes.
enum class ErrorCode {
  ZeroDispersion,
  NonFinite,
  EmptyTrainingSet,
  MisalignedCycles,
  EmptyPool,
  InvalidAngle,
  DimensionMismatch,
  EmptyGrid,
  InsufficientData,
  InvalidParameter,
  EmptySubsample,
  ParseError,
  GapError,
  DuplicateTimestamp,
  MissingHistory,
  ZeroActual,
  ShapeMismatch,
  WindowMismatch,
  ConfigError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroDispersion: return "ZeroDispersion";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::MisalignedCycles: return "MisalignedCycles";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::InvalidAngle: return "InvalidAngle";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::EmptySubsample: return "EmptySubsample";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::GapError: return "GapError";
    case ErrorCode::DuplicateTimestamp: return "DuplicateTimestamp";
    case ErrorCode::MissingHistory: return "MissingHistory";
    case ErrorCode::ZeroActual: return "ZeroActual";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::WindowMismatch: return "WindowMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace randens
