#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "callassist/text.hpp"
#include "callassist/types.hpp"
#include "callassist/understanding.hpp"

namespace callassist {

struct FaqCandidate {
  std::string candidate_id;
  std::string question_text;
  std::string answer_text;
  Provenance provenance = Provenance::mined_live;
  std::int64_t support_count = 1;
  std::int64_t first_seen_ms = 0;
  std::int64_t last_seen_ms = 0;

  bool operator==(const FaqCandidate&) const = default;
};

void to_json(Json& j, const FaqCandidate& v);
void from_json(const Json& j, FaqCandidate& v);

enum class Verdict { accepted, rejected };

struct ValidationReport {
  std::string candidate_id;
  std::string question_text;
  Verdict verdict = Verdict::rejected;
  std::vector<std::string> failed_checks;
  std::int64_t checked_at_ms = 0;
  /// Domain the ontology check resolved the question to.
  std::optional<std::string> kb_domain_tag;

  bool operator==(const ValidationReport&) const = default;
};

void to_json(Json& j, const ValidationReport& v);
void from_json(const Json& j, ValidationReport& v);

struct GovernanceConfig {
  std::int64_t min_support = 3;
  std::size_t question_min_tokens = 3;
  std::size_t answer_min_tokens = 5;
  std::size_t answer_max_tokens = 200;
  std::int64_t ttl_ms = 30LL * 24 * 3600 * 1000;
};

/// Groups answered queries by normalized text. FAQ hits and no-answer
/// records are skipped (nothing new to cache). Each group with at least
/// `min_support` records yields one candidate carrying its most recent answer;
/// groups touching a session of `call_records` are mined-transcript, the rest
/// mined-live. Output is ordered by normalized question.
std::vector<FaqCandidate> mine_candidates(std::span<const CallRecord> call_records,
                                          std::span<const AnswerRecord> answer_log, std::int64_t min_support,
                                          const Tokenizer& tokenizer);

/// Runs H1 (question form), H2 (answer length), H3 (no raw identifiers) and
/// O1 (question resolves to a registry domain), in that order.
ValidationReport validate_candidate(const FaqCandidate& candidate, const IntentRegistry& registry,
                                    const EntityMatcher& matcher, const Tokenizer& tokenizer,
                                    const GovernanceConfig& config, std::int64_t now_ms);

struct LifecycleResult {
  std::vector<FaqEntry> cache;
  /// Reports after the duplicate check (D1 turns an accept into a reject).
  std::vector<ValidationReport> reports;
  std::vector<Json> changes;
};

/// Expires entries past their expiry, then adds every accepted candidate as a
/// validated entry expiring at now + ttl. A question already validated is
/// rejected with D1; one whose earlier entries expired comes back as a new
/// entry with the next version. Nothing is ever removed.
LifecycleResult apply_lifecycle(std::vector<FaqEntry> cache, std::span<const FaqCandidate> candidates,
                                std::span<const ValidationReport> reports, std::int64_t now_ms, std::int64_t ttl_ms,
                                const Tokenizer& tokenizer);

/// Appends change records to a newline-delimited log.
void append_change_log(const std::filesystem::path& path, std::span<const Json> changes);

std::vector<FaqCandidate> load_candidates(const std::filesystem::path& path);
std::vector<ValidationReport> load_reports(const std::filesystem::path& path);

template <class T>
std::string to_ndjson(std::span<const T> items) {
  std::string out;
  for (const auto& item : items) {
    out += canonical_dump(Json(item));
    out += '\n';
  }
  return out;
}

}  // namespace callassist
