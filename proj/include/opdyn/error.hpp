#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace opdyn {

enum class ErrorKind {
  // input validation
  SelfLoop,
  AsymmetricDuplicate,
  NonPositiveWeight,
  Disconnected,
  TooSmall,
  InvalidK,
  InvalidParams,
  LengthMismatch,
  InvalidArgument,
  NegativeBeta,
  ConventionMismatch,
  Parse,
  Io,
  // numerical failures
  NotConverged,
  NoFiniteThreshold,
  IllConditioned,
  Undecided,
  // resource guards
  TooLarge,
  MaxStepsExceeded,
};

constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::SelfLoop: return "SelfLoop";
    case ErrorKind::AsymmetricDuplicate: return "AsymmetricDuplicate";
    case ErrorKind::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorKind::Disconnected: return "Disconnected";
    case ErrorKind::TooSmall: return "TooSmall";
    case ErrorKind::InvalidK: return "InvalidK";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NegativeBeta: return "NegativeBeta";
    case ErrorKind::ConventionMismatch: return "ConventionMismatch";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::Io: return "Io";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::NoFiniteThreshold: return "NoFiniteThreshold";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::Undecided: return "Undecided";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::MaxStepsExceeded: return "MaxStepsExceeded";
  }
  return "Unknown";
}

/// Process exit code for an error class: 2 validation, 3 numerical, 4 resource guard.
constexpr int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::NotConverged:
    case ErrorKind::NoFiniteThreshold:
    case ErrorKind::IllConditioned:
    case ErrorKind::Undecided:
      return 3;
    case ErrorKind::TooLarge:
    case ErrorKind::MaxStepsExceeded:
      return 4;
    default:
      return 2;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace opdyn
