#pragma once

#include <stdexcept>
#include <string>

namespace chemdist {

enum class ErrorKind {
  NonAdjacent,
  OutOfBox,
  InvalidParams,
  EmptySources,
  UnreachableTarget,
  EmptyCluster,
  RhoTooLargeForN,
  NoCrossing,
  PreconditionViolated,
  StuckIteration,
  RadiusNotFound,
  TooLargeForExact,
  InsufficientReps,
  CalibrationFailed,
  BadConfig,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonAdjacent: return "NonAdjacent";
    case ErrorKind::OutOfBox: return "OutOfBox";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::EmptySources: return "EmptySources";
    case ErrorKind::UnreachableTarget: return "UnreachableTarget";
    case ErrorKind::EmptyCluster: return "EmptyCluster";
    case ErrorKind::RhoTooLargeForN: return "RhoTooLargeForN";
    case ErrorKind::NoCrossing: return "NoCrossing";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::StuckIteration: return "StuckIteration";
    case ErrorKind::RadiusNotFound: return "RadiusNotFound";
    case ErrorKind::TooLargeForExact: return "TooLargeForExact";
    case ErrorKind::InsufficientReps: return "InsufficientReps";
    case ErrorKind::CalibrationFailed: return "CalibrationFailed";
    case ErrorKind::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

}  // namespace chemdist
