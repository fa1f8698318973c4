#include "memschaos/error.hpp"

namespace memschaos {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::EmptyBand: return "EmptyBand";
    case ErrorKind::NonPositive: return "NonPositive";
    case ErrorKind::NotBistable: return "NotBistable";
    case ErrorKind::GapExceeded: return "GapExceeded";
    case ErrorKind::Singular: return "Singular";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::NoSuppression: return "NoSuppression";
    case ErrorKind::NotChaotic: return "NotChaotic";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::DelayNotOnGrid: return "DelayNotOnGrid";
    case ErrorKind::PullInDuringEstimate: return "PullInDuringEstimate";
    case ErrorKind::AllPathsPulledIn: return "AllPathsPulledIn";
    case ErrorKind::BracketInvalid: return "BracketInvalid";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::UnknownKey:
      return 2;
    case ErrorKind::InvariantViolation:
    case ErrorKind::InvalidSpec:
    case ErrorKind::NonPositive:
    case ErrorKind::NotBistable:
    case ErrorKind::GapExceeded:
      return 3;
    case ErrorKind::IoError:
      return 5;
    default:
      return 4;
  }
}

}  // namespace memschaos
