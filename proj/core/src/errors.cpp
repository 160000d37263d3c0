#include "callassist/errors.hpp"

namespace callassist {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::usage:
      return "usage";
    case ErrorCode::parse:
      return "parse";
    case ErrorCode::config:
      return "config";
    case ErrorCode::io:
      return "io";
    case ErrorCode::duplicate_session:
      return "duplicate_session";
    case ErrorCode::unknown_session:
      return "unknown_session";
    case ErrorCode::ordering:
      return "ordering";
    case ErrorCode::session_ended:
      return "session_ended";
    case ErrorCode::state:
      return "state";
    case ErrorCode::invalid_reference:
      return "invalid_reference";
    case ErrorCode::missing_cohort:
      return "missing_cohort";
    case ErrorCode::invariant:
      return "invariant";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::string field)
    : std::runtime_error(message), code_(code), field_(std::move(field)) {}

}  // namespace callassist
