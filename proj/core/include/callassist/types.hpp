#pragma once

// Value types shared across the pipeline stages. Every type round-trips
// through the canonical JSON form (see canonical.hpp).

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "callassist/canonical.hpp"

namespace callassist {

enum class Speaker { customer, agent };
enum class Lang { en, hi, mixed };
enum class EntityKind { name, email, phone, account_number };
enum class NpsBand { detractor, passive, promoter };
enum class WorkflowStatus { active, completed, abandoned };
enum class Route { faq, rag };
enum class FaqStatus { candidate, validated, expired };
enum class Provenance { mined_transcript, mined_live };
enum class Cohort { assisted, control };
enum class JournalKind { input_event, assist_output, agent_action };

std::string_view to_string(Speaker v) noexcept;
std::string_view to_string(Lang v) noexcept;
std::string_view to_string(EntityKind v) noexcept;
std::string_view to_string(NpsBand v) noexcept;
std::string_view to_string(WorkflowStatus v) noexcept;
std::string_view to_string(Route v) noexcept;
std::string_view to_string(FaqStatus v) noexcept;
std::string_view to_string(Provenance v) noexcept;
std::string_view to_string(Cohort v) noexcept;
std::string_view to_string(JournalKind v) noexcept;

/// Parses the wire name of an enum value; nullopt when unknown.
template <class E>
std::optional<E> parse_enum(std::string_view name);
template <>
std::optional<Speaker> parse_enum<Speaker>(std::string_view name);
template <>
std::optional<Lang> parse_enum<Lang>(std::string_view name);
template <>
std::optional<EntityKind> parse_enum<EntityKind>(std::string_view name);
template <>
std::optional<NpsBand> parse_enum<NpsBand>(std::string_view name);
template <>
std::optional<WorkflowStatus> parse_enum<WorkflowStatus>(std::string_view name);
template <>
std::optional<Route> parse_enum<Route>(std::string_view name);
template <>
std::optional<FaqStatus> parse_enum<FaqStatus>(std::string_view name);
template <>
std::optional<Provenance> parse_enum<Provenance>(std::string_view name);
template <>
std::optional<Cohort> parse_enum<Cohort>(std::string_view name);
template <>
std::optional<JournalKind> parse_enum<JournalKind>(std::string_view name);

void to_json(Json& j, Speaker v);
void from_json(const Json& j, Speaker& v);
void to_json(Json& j, Lang v);
void from_json(const Json& j, Lang& v);
void to_json(Json& j, EntityKind v);
void from_json(const Json& j, EntityKind& v);
void to_json(Json& j, NpsBand v);
void from_json(const Json& j, NpsBand& v);
void to_json(Json& j, WorkflowStatus v);
void from_json(const Json& j, WorkflowStatus& v);
void to_json(Json& j, Route v);
void from_json(const Json& j, Route& v);
void to_json(Json& j, FaqStatus v);
void from_json(const Json& j, FaqStatus& v);
void to_json(Json& j, Provenance v);
void from_json(const Json& j, Provenance& v);
void to_json(Json& j, Cohort v);
void from_json(const Json& j, Cohort& v);
void to_json(Json& j, JournalKind v);
void from_json(const Json& j, JournalKind& v);

/// Opaque, non-empty call identifier. A default-constructed id is only a
/// placeholder for deserialization.
class SessionId {
 public:
  SessionId() = default;
  explicit SessionId(std::string value);

  const std::string& value() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  auto operator<=>(const SessionId&) const = default;

 private:
  std::string value_;
};

void to_json(Json& j, const SessionId& v);
void from_json(const Json& j, SessionId& v);

struct TranscriptEvent {
  std::string session_id;
  std::int64_t turn_index = 0;
  Speaker speaker = Speaker::customer;
  std::string raw_text;
  Lang lang = Lang::en;
  std::string display_text;
  std::int64_t t_start_ms = 0;
  std::int64_t t_end_ms = 0;
  bool is_final = true;

  bool operator==(const TranscriptEvent&) const = default;
};

struct Entity {
  EntityKind kind = EntityKind::email;
  std::string value;
  std::int64_t turn_index = 0;
  std::size_t span_begin = 0;
  std::size_t span_end = 0;

  bool operator==(const Entity&) const = default;
};

struct CueHit {
  std::string cue_id;
  std::int64_t turn_index = 0;
  double weight = 0.0;

  bool operator==(const CueHit&) const = default;
};

struct IntentHypothesis {
  std::string label;
  double confidence = 0.0;
  std::vector<CueHit> cue_hits;
  bool triggered = false;
  std::optional<std::int64_t> triggered_at_turn;

  bool operator==(const IntentHypothesis&) const = default;
};

struct SentimentSample {
  std::int64_t turn_index = 0;
  double polarity = 0.0;
  double csat_likelihood = 0.5;
  NpsBand nps_band = NpsBand::passive;

  bool operator==(const SentimentSample&) const = default;
};

struct ProfileCues {
  std::int64_t interest_hits = 0;
  std::int64_t hesitation_hits = 0;
  std::vector<std::string> goal_phrases;

  bool operator==(const ProfileCues&) const = default;
};

struct CompletedStep {
  std::string step_id;
  std::int64_t turn_index = 0;

  bool operator==(const CompletedStep&) const = default;
};

struct WorkflowInstance {
  std::string workflow_id;
  std::string session_id;
  std::int64_t triggered_at_turn = 0;
  std::size_t cursor = 0;
  std::vector<CompletedStep> completed_steps;
  WorkflowStatus status = WorkflowStatus::active;
  std::optional<std::string> outcome;

  bool operator==(const WorkflowInstance&) const = default;
};

struct SuggestedQuery {
  std::string query_id;
  std::string session_id;
  std::int64_t source_turn = 0;
  std::string text;
  std::string intent_label;
  std::string kb_domain_tag;
  std::int64_t created_at_ms = 0;

  bool operator==(const SuggestedQuery&) const = default;
};

struct Passage {
  std::string doc_id;
  double score = 0.0;

  bool operator==(const Passage&) const = default;
};

struct AnswerRecord {
  std::string query_id;
  std::string session_id;
  std::string query_text;
  Route route = Route::rag;
  std::string answer_text;
  std::optional<std::string> matched_entry_id;
  std::optional<double> similarity;
  std::optional<std::vector<Passage>> passages;
  std::int64_t simulated_latency_ms = 0;
  int llm_calls_avoided = 0;
  bool no_answer = false;
  std::int64_t answered_at_ms = 0;

  bool operator==(const AnswerRecord&) const = default;
};

struct PartialSummary {
  std::int64_t as_of_turn = -1;
  std::vector<std::string> bullets;
  std::size_t budget = 10;

  bool operator==(const PartialSummary&) const = default;
};

struct FaqEntry {
  std::string entry_id;
  std::string question;
  std::vector<std::string> normalized_question;
  std::string answer;
  std::string kb_domain_tag;
  FaqStatus status = FaqStatus::candidate;
  Provenance provenance = Provenance::mined_transcript;
  std::int64_t version = 1;
  std::int64_t hit_count = 0;
  std::optional<std::int64_t> expires_at_ms;

  bool operator==(const FaqEntry&) const = default;
};

struct SessionMetrics {
  std::int64_t unmatched_tokens = 0;
  std::int64_t skipped_templates = 0;
  std::int64_t faq_hits = 0;
  std::int64_t rag_calls = 0;

  bool operator==(const SessionMetrics&) const = default;
};

/// Evolving per-call memory. Fields after `ended` are bookkeeping the stages
/// need to stay incremental.
struct SessionState {
  SessionId session_id;
  std::int64_t started_at_ms = 0;
  std::map<EntityKind, std::vector<Entity>> entities;
  std::map<std::string, IntentHypothesis> intents;
  std::vector<WorkflowInstance> workflows;
  std::vector<SuggestedQuery> suggestions;
  std::vector<AnswerRecord> answers;
  PartialSummary partial_summary;
  std::vector<SentimentSample> sentiment_trajectory;
  ProfileCues profile;
  std::int64_t turn_count = 0;
  bool ended = false;

  std::int64_t last_final_turn = -1;
  std::string caption_buffer;
  std::optional<std::string> top_intent;
  std::size_t summarized_answers = 0;
  std::int64_t next_query_number = 1;
  SessionMetrics metrics;

  bool operator==(const SessionState&) const = default;
};

/// One finished call as the KPI calculator sees it.
struct CallRecord {
  std::string session_id;
  double duration_s = 0.0;
  Cohort cohort = Cohort::assisted;
  std::int64_t faq_hits = 0;
  std::int64_t rag_calls = 0;
  bool converted_enquiry = false;
  bool converted_booking = false;
  std::string outcome;
  std::string config_version;

  bool operator==(const CallRecord&) const = default;
};

struct JournalEntry {
  std::int64_t seq = 0;
  JournalKind kind = JournalKind::input_event;
  Json payload;
  std::int64_t t_ms = 0;

  bool operator==(const JournalEntry&) const = default;
};

#define CALLASSIST_DECLARE_JSON(T) \
  void to_json(Json& j, const T& v); \
  void from_json(const Json& j, T& v)

CALLASSIST_DECLARE_JSON(TranscriptEvent);
CALLASSIST_DECLARE_JSON(Entity);
CALLASSIST_DECLARE_JSON(CueHit);
CALLASSIST_DECLARE_JSON(IntentHypothesis);
CALLASSIST_DECLARE_JSON(SentimentSample);
CALLASSIST_DECLARE_JSON(ProfileCues);
CALLASSIST_DECLARE_JSON(CompletedStep);
CALLASSIST_DECLARE_JSON(WorkflowInstance);
CALLASSIST_DECLARE_JSON(SuggestedQuery);
CALLASSIST_DECLARE_JSON(Passage);
CALLASSIST_DECLARE_JSON(AnswerRecord);
CALLASSIST_DECLARE_JSON(PartialSummary);
CALLASSIST_DECLARE_JSON(FaqEntry);
CALLASSIST_DECLARE_JSON(SessionMetrics);
CALLASSIST_DECLARE_JSON(SessionState);
CALLASSIST_DECLARE_JSON(CallRecord);
CALLASSIST_DECLARE_JSON(JournalEntry);

#undef CALLASSIST_DECLARE_JSON

}  // namespace callassist
