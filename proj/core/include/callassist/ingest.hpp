#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "callassist/types.hpp"

namespace callassist {

/// The exact field set of one conversation-script event record.
inline constexpr std::array<std::string_view, 8> kEventRecordFields = {
    "session_id", "turn_index", "speaker", "raw_text", "lang", "t_start_ms", "t_end_ms", "is_final"};

/// Parses one conversation-script record. display_text is left empty.
/// Throws Error(parse) whose field() names the offending field.
TranscriptEvent parse_event(std::string_view line);
TranscriptEvent parse_event(const Json& record);
inline TranscriptEvent parse_event(const std::string& line) { return parse_event(std::string_view(line)); }
inline TranscriptEvent parse_event(const char* line) { return parse_event(std::string_view(line)); }

/// The script-format record for an event (display_text omitted).
Json event_record(const TranscriptEvent& event);

/// Source phrase -> English phrase, matched longest-first over
/// lowercase whitespace-separated tokens.
class TransliterationTable {
 public:
  TransliterationTable() = default;

  /// Throws Error(config) when two keys collide after normalization or when a
  /// replacement would itself be rewritten (normalization must be idempotent).
  static TransliterationTable from_json(const Json& doc);
  static TransliterationTable load(const std::filesystem::path& path);

  const std::string& version() const noexcept { return version_; }
  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }
  std::size_t max_phrase_tokens() const noexcept { return max_phrase_tokens_; }

  struct Result {
    std::string text;
    std::size_t unmatched_tokens = 0;
  };
  Result apply(std::string_view text) const;

 private:
  std::map<std::string, std::string> entries_;
  std::string version_;
  std::size_t max_phrase_tokens_ = 0;
};

struct NormalizedEvent {
  TranscriptEvent event;
  std::size_t unmatched_tokens = 0;
};

/// English events keep raw_text verbatim; hi/mixed events go through the
/// table, unmatched tokens passing through unchanged.
NormalizedEvent normalize_display_text(TranscriptEvent event, const TransliterationTable& table);

}  // namespace callassist
