#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace adbn {

// Every failure raised by the library carries one of these codes so callers
// (tests, the CLI exit-code mapping) can branch without parsing messages.
enum class Errc {
  // linalg
  NotSquare,
  NegativeRate,
  RowSumNonzero,
  AbsorbingState,
  NonpositiveRate,
  NegativeDuration,
  // model
  ParseError,
  SchemaError,
  ValidationError,
  TopologyError,
  ParamError,
  // bp
  DomainMismatch,
  ZeroBelief,
  TooLarge,
  // engine
  NonpositiveInterval,
  ClockNotMonotone,
  EmptyHistory,
  // sim / harness
  StepTooCoarse,
  ScheduleError,
  ConfigError,
  IoError,
  NoBeliefYet,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

  // Validation-class failures map to CLI exit code 1, everything else to 2.
  bool is_validation() const noexcept;

 private:
  Errc code_;
};

}  // namespace adbn
