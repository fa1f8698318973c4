#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace memschaos {

// Every failure the library reports carries one of these kinds. The CLI maps
// kinds onto its exit-code contract (see exit_code()).
enum class ErrorKind {
  InvalidSpec,
  TooShort,
  EmptyBand,
  NonPositive,
  NotBistable,
  GapExceeded,
  Singular,
  QuadratureFailure,
  NoSuppression,
  NotChaotic,
  GridMismatch,
  DelayNotOnGrid,
  PullInDuringEstimate,
  AllPathsPulledIn,
  BracketInvalid,
  ParseError,
  UnknownKey,
  InvariantViolation,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// 2 config parse, 3 invariant, 4 computation, 5 I/O.
int exit_code(ErrorKind kind) noexcept;

}  // namespace memschaos
