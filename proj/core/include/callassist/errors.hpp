#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace callassist {

enum class ErrorCode {
  usage,
  parse,
  config,
  io,
  duplicate_session,
  unknown_session,
  ordering,
  session_ended,
  state,
  invalid_reference,
  missing_cohort,
  invariant,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure the engine reports carries a stable code; parse errors also
/// name the offending field.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string field = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

}  // namespace callassist
