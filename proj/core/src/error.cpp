#include "adbn/error.hpp"

namespace adbn {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::NotSquare: return "NotSquare";
    case Errc::NegativeRate: return "NegativeRate";
    case Errc::RowSumNonzero: return "RowSumNonzero";
    case Errc::AbsorbingState: return "AbsorbingState";
    case Errc::NonpositiveRate: return "NonpositiveRate";
    case Errc::NegativeDuration: return "NegativeDuration";
    case Errc::ParseError: return "ParseError";
    case Errc::SchemaError: return "SchemaError";
    case Errc::ValidationError: return "ValidationError";
    case Errc::TopologyError: return "TopologyError";
    case Errc::ParamError: return "ParamError";
    case Errc::DomainMismatch: return "DomainMismatch";
    case Errc::ZeroBelief: return "ZeroBelief";
    case Errc::TooLarge: return "TooLarge";
    case Errc::NonpositiveInterval: return "NonpositiveInterval";
    case Errc::ClockNotMonotone: return "ClockNotMonotone";
    case Errc::EmptyHistory: return "EmptyHistory";
    case Errc::StepTooCoarse: return "StepTooCoarse";
    case Errc::ScheduleError: return "ScheduleError";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
    case Errc::NoBeliefYet: return "NoBeliefYet";
  }
  return "Unknown";
}

bool Error::is_validation() const noexcept {
  switch (code_) {
    case Errc::NotSquare:
    case Errc::NegativeRate:
    case Errc::RowSumNonzero:
    case Errc::ParseError:
    case Errc::SchemaError:
    case Errc::ValidationError:
    case Errc::TopologyError:
    case Errc::ParamError:
    case Errc::ConfigError:
      return true;
    default:
      return false;
  }
}

}  // namespace adbn
