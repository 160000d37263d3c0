#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "callassist/types.hpp"
#include "callassist/understanding.hpp"

namespace callassist {

// ---------------------------------------------------------------------------
// Redaction

std::string_view placeholder(EntityKind kind) noexcept;

struct Redaction {
  std::string text;
  std::size_t count = 0;
};

/// Replaces every identifier match with its kind placeholder. Runs to a fixed
/// point, so redacting the result again changes nothing.
Redaction redact_pii(std::string_view text, const EntityMatcher& matcher);

// ---------------------------------------------------------------------------
// Partial summary

struct SummaryConfig {
  std::size_t budget = 10;
  double sentiment_delta = 0.5;
};

/// What one final turn produced, in the order the summary ranks it.
struct TurnSalience {
  std::vector<Entity> new_entities;
  std::vector<std::string> newly_triggered;
  /// Answers delivered since the previous final turn, oldest first.
  std::vector<AnswerRecord> delivered_answers;
  /// Polarity of the previous and current customer samples, when this turn
  /// produced a sample and a previous one exists.
  std::optional<std::pair<double, double>> sentiment_step;
};

std::string entity_bullet(EntityKind kind);
std::string intent_bullet(const std::string& label);
std::string answer_bullet(const AnswerRecord& answer);
std::string sentiment_bullet(double polarity, double previous);

/// The single highest-priority fact of the turn, already redacted:
/// new entity > newly triggered intent > delivered answer > sentiment shift.
std::optional<std::string> salient_bullet(const TurnSalience& turn, const SummaryConfig& config,
                                          const EntityMatcher& matcher);

/// Appends `bullet` (an existing equal bullet moves to the end) and evicts
/// the oldest bullets beyond the budget. as_of_turn becomes `turn_index`.
PartialSummary update_partial_summary(PartialSummary prev, const std::optional<std::string>& bullet,
                                      std::int64_t turn_index);

// ---------------------------------------------------------------------------
// Final summary

struct FinalSummary {
  std::string session_id;
  std::string primary_intent;
  std::vector<std::string> resolution_path;
  std::vector<std::string> agent_actions;
  std::vector<std::pair<std::int64_t, double>> sentiment_trajectory;
  std::string outcome;
  std::string redacted_text;
  std::size_t redaction_count = 0;

  bool operator==(const FinalSummary&) const = default;
};

void to_json(Json& j, const FinalSummary& v);
void from_json(const Json& j, FinalSummary& v);

/// Triggered intent with the highest confidence; ties go to the earliest
/// trigger. "unknown" when nothing triggered.
std::string primary_intent(const SessionState& state);

/// Human-readable summary before redaction.
std::string render_summary(const SessionState& state, const FinalSummary& summary);

/// Throws Error(state) unless the call has ended.
FinalSummary final_summary(const SessionState& state, const EntityMatcher& matcher);

}  // namespace callassist
