#include "callassist/types.hpp"

#include <array>
#include <utility>

#include "callassist/errors.hpp"

namespace callassist {

namespace {

template <class T>
void put_optional(Json& j, const char* key, const std::optional<T>& v) {
  if (v) {
    j[key] = *v;
  } else {
    j[key] = nullptr;
  }
}

template <class T>
void get_optional(const Json& j, const char* key, std::optional<T>& v) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    v.reset();
  } else {
    v = it->get<T>();
  }
}

}  // namespace

#define CALLASSIST_ENUM_NAMES(E, ...)                                                  \
  namespace {                                                                          \
  constexpr std::array k##E##Names = {__VA_ARGS__};                                    \
  }                                                                                    \
  std::string_view to_string(E v) noexcept {                                           \
    return k##E##Names[static_cast<std::size_t>(v)];                                   \
  }                                                                                    \
  template <>                                                                          \
  std::optional<E> parse_enum<E>(std::string_view name) {                              \
    for (std::size_t i = 0; i < k##E##Names.size(); ++i) {                             \
      if (k##E##Names[i] == name) return static_cast<E>(i);                            \
    }                                                                                  \
    return std::nullopt;                                                               \
  }                                                                                    \
  void to_json(Json& j, E v) { j = std::string(to_string(v)); }                        \
  void from_json(const Json& j, E& v) {                                                \
    const auto parsed = parse_enum<E>(j.get<std::string>());                           \
    if (!parsed) {                                                                     \
      throw Error(ErrorCode::parse, "unknown " #E " value '" + j.get<std::string>() + "'"); \
    }                                                                                  \
    v = *parsed;                                                                       \
  }

CALLASSIST_ENUM_NAMES(Speaker, std::string_view("customer"), std::string_view("agent"))
CALLASSIST_ENUM_NAMES(Lang, std::string_view("en"), std::string_view("hi"), std::string_view("mixed"))
CALLASSIST_ENUM_NAMES(EntityKind, std::string_view("name"), std::string_view("email"),
                      std::string_view("phone"), std::string_view("account_number"))
CALLASSIST_ENUM_NAMES(NpsBand, std::string_view("detractor"), std::string_view("passive"),
                      std::string_view("promoter"))
CALLASSIST_ENUM_NAMES(WorkflowStatus, std::string_view("active"), std::string_view("completed"),
                      std::string_view("abandoned"))
CALLASSIST_ENUM_NAMES(Route, std::string_view("faq"), std::string_view("rag"))
CALLASSIST_ENUM_NAMES(FaqStatus, std::string_view("candidate"), std::string_view("validated"),
                      std::string_view("expired"))
CALLASSIST_ENUM_NAMES(Provenance, std::string_view("mined-transcript"), std::string_view("mined-live"))
CALLASSIST_ENUM_NAMES(Cohort, std::string_view("assisted"), std::string_view("control"))
CALLASSIST_ENUM_NAMES(JournalKind, std::string_view("input-event"), std::string_view("assist-output"),
                      std::string_view("agent-action"))

#undef CALLASSIST_ENUM_NAMES

SessionId::SessionId(std::string value) : value_(std::move(value)) {
  if (value_.empty()) throw Error(ErrorCode::parse, "session id must be non-empty", "session_id");
}

void to_json(Json& j, const SessionId& v) { j = v.value(); }
void from_json(const Json& j, SessionId& v) { v = SessionId(j.get<std::string>()); }

void to_json(Json& j, const TranscriptEvent& v) {
  j = Json{{"session_id", v.session_id}, {"turn_index", v.turn_index},   {"speaker", v.speaker},
           {"raw_text", v.raw_text},     {"lang", v.lang},               {"display_text", v.display_text},
           {"t_start_ms", v.t_start_ms}, {"t_end_ms", v.t_end_ms},       {"is_final", v.is_final}};
}
void from_json(const Json& j, TranscriptEvent& v) {
  j.at("session_id").get_to(v.session_id);
  j.at("turn_index").get_to(v.turn_index);
  j.at("speaker").get_to(v.speaker);
  j.at("raw_text").get_to(v.raw_text);
  j.at("lang").get_to(v.lang);
  v.display_text = j.value("display_text", std::string{});
  j.at("t_start_ms").get_to(v.t_start_ms);
  j.at("t_end_ms").get_to(v.t_end_ms);
  j.at("is_final").get_to(v.is_final);
}

void to_json(Json& j, const Entity& v) {
  j = Json{{"kind", v.kind},
           {"value", v.value},
           {"turn_index", v.turn_index},
           {"span", Json::array({v.span_begin, v.span_end})}};
}
void from_json(const Json& j, Entity& v) {
  j.at("kind").get_to(v.kind);
  j.at("value").get_to(v.value);
  j.at("turn_index").get_to(v.turn_index);
  const auto& span = j.at("span");
  v.span_begin = span.at(0).get<std::size_t>();
  v.span_end = span.at(1).get<std::size_t>();
}

void to_json(Json& j, const CueHit& v) {
  j = Json{{"cue_id", v.cue_id}, {"turn_index", v.turn_index}, {"weight", v.weight}};
}
void from_json(const Json& j, CueHit& v) {
  j.at("cue_id").get_to(v.cue_id);
  j.at("turn_index").get_to(v.turn_index);
  j.at("weight").get_to(v.weight);
}

void to_json(Json& j, const IntentHypothesis& v) {
  j = Json{{"label", v.label},
           {"confidence", v.confidence},
           {"cue_hits", v.cue_hits},
           {"triggered", v.triggered}};
  put_optional(j, "triggered_at_turn", v.triggered_at_turn);
}
void from_json(const Json& j, IntentHypothesis& v) {
  j.at("label").get_to(v.label);
  j.at("confidence").get_to(v.confidence);
  j.at("cue_hits").get_to(v.cue_hits);
  j.at("triggered").get_to(v.triggered);
  get_optional(j, "triggered_at_turn", v.triggered_at_turn);
}

void to_json(Json& j, const SentimentSample& v) {
  j = Json{{"turn_index", v.turn_index},
           {"polarity", v.polarity},
           {"csat_likelihood", v.csat_likelihood},
           {"nps_band", v.nps_band}};
}
void from_json(const Json& j, SentimentSample& v) {
  j.at("turn_index").get_to(v.turn_index);
  j.at("polarity").get_to(v.polarity);
  j.at("csat_likelihood").get_to(v.csat_likelihood);
  j.at("nps_band").get_to(v.nps_band);
}

void to_json(Json& j, const ProfileCues& v) {
  j = Json{{"interest_hits", v.interest_hits},
           {"hesitation_hits", v.hesitation_hits},
           {"goal_phrases", v.goal_phrases}};
}
void from_json(const Json& j, ProfileCues& v) {
  j.at("interest_hits").get_to(v.interest_hits);
  j.at("hesitation_hits").get_to(v.hesitation_hits);
  j.at("goal_phrases").get_to(v.goal_phrases);
}

void to_json(Json& j, const CompletedStep& v) {
  j = Json{{"step_id", v.step_id}, {"turn_index", v.turn_index}};
}
void from_json(const Json& j, CompletedStep& v) {
  j.at("step_id").get_to(v.step_id);
  j.at("turn_index").get_to(v.turn_index);
}

void to_json(Json& j, const WorkflowInstance& v) {
  j = Json{{"workflow_id", v.workflow_id},
           {"session_id", v.session_id},
           {"triggered_at_turn", v.triggered_at_turn},
           {"cursor", v.cursor},
           {"completed_steps", v.completed_steps},
           {"status", v.status}};
  put_optional(j, "outcome", v.outcome);
}
void from_json(const Json& j, WorkflowInstance& v) {
  j.at("workflow_id").get_to(v.workflow_id);
  j.at("session_id").get_to(v.session_id);
  j.at("triggered_at_turn").get_to(v.triggered_at_turn);
  j.at("cursor").get_to(v.cursor);
  j.at("completed_steps").get_to(v.completed_steps);
  j.at("status").get_to(v.status);
  get_optional(j, "outcome", v.outcome);
}

void to_json(Json& j, const SuggestedQuery& v) {
  j = Json{{"query_id", v.query_id},         {"session_id", v.session_id},
           {"source_turn", v.source_turn},   {"text", v.text},
           {"intent_label", v.intent_label}, {"kb_domain_tag", v.kb_domain_tag},
           {"created_at_ms", v.created_at_ms}};
}
void from_json(const Json& j, SuggestedQuery& v) {
  j.at("query_id").get_to(v.query_id);
  j.at("session_id").get_to(v.session_id);
  j.at("source_turn").get_to(v.source_turn);
  j.at("text").get_to(v.text);
  j.at("intent_label").get_to(v.intent_label);
  j.at("kb_domain_tag").get_to(v.kb_domain_tag);
  j.at("created_at_ms").get_to(v.created_at_ms);
}

void to_json(Json& j, const Passage& v) { j = Json{{"doc_id", v.doc_id}, {"score", v.score}}; }
void from_json(const Json& j, Passage& v) {
  j.at("doc_id").get_to(v.doc_id);
  j.at("score").get_to(v.score);
}

void to_json(Json& j, const AnswerRecord& v) {
  j = Json{{"query_id", v.query_id},
           {"session_id", v.session_id},
           {"query_text", v.query_text},
           {"route", v.route},
           {"answer_text", v.answer_text},
           {"simulated_latency_ms", v.simulated_latency_ms},
           {"llm_calls_avoided", v.llm_calls_avoided},
           {"no_answer", v.no_answer},
           {"answered_at_ms", v.answered_at_ms}};
  put_optional(j, "matched_entry_id", v.matched_entry_id);
  put_optional(j, "similarity", v.similarity);
  put_optional(j, "passages", v.passages);
}
void from_json(const Json& j, AnswerRecord& v) {
  j.at("query_id").get_to(v.query_id);
  j.at("session_id").get_to(v.session_id);
  j.at("query_text").get_to(v.query_text);
  j.at("route").get_to(v.route);
  j.at("answer_text").get_to(v.answer_text);
  j.at("simulated_latency_ms").get_to(v.simulated_latency_ms);
  j.at("llm_calls_avoided").get_to(v.llm_calls_avoided);
  j.at("no_answer").get_to(v.no_answer);
  j.at("answered_at_ms").get_to(v.answered_at_ms);
  get_optional(j, "matched_entry_id", v.matched_entry_id);
  get_optional(j, "similarity", v.similarity);
  get_optional(j, "passages", v.passages);
}

void to_json(Json& j, const PartialSummary& v) {
  j = Json{{"as_of_turn", v.as_of_turn}, {"bullets", v.bullets}, {"budget", v.budget}};
}
void from_json(const Json& j, PartialSummary& v) {
  j.at("as_of_turn").get_to(v.as_of_turn);
  j.at("bullets").get_to(v.bullets);
  j.at("budget").get_to(v.budget);
}

void to_json(Json& j, const FaqEntry& v) {
  j = Json{{"entry_id", v.entry_id},
           {"question", v.question},
           {"normalized_question", v.normalized_question},
           {"answer", v.answer},
           {"kb_domain_tag", v.kb_domain_tag},
           {"status", v.status},
           {"provenance", v.provenance},
           {"version", v.version},
           {"hit_count", v.hit_count}};
  put_optional(j, "expires_at_ms", v.expires_at_ms);
}
void from_json(const Json& j, FaqEntry& v) {
  j.at("entry_id").get_to(v.entry_id);
  j.at("question").get_to(v.question);
  j.at("normalized_question").get_to(v.normalized_question);
  j.at("answer").get_to(v.answer);
  j.at("kb_domain_tag").get_to(v.kb_domain_tag);
  j.at("status").get_to(v.status);
  j.at("provenance").get_to(v.provenance);
  j.at("version").get_to(v.version);
  j.at("hit_count").get_to(v.hit_count);
  get_optional(j, "expires_at_ms", v.expires_at_ms);
}

void to_json(Json& j, const SessionMetrics& v) {
  j = Json{{"unmatched_tokens", v.unmatched_tokens},
           {"skipped_templates", v.skipped_templates},
           {"faq_hits", v.faq_hits},
           {"rag_calls", v.rag_calls}};
}
void from_json(const Json& j, SessionMetrics& v) {
  j.at("unmatched_tokens").get_to(v.unmatched_tokens);
  j.at("skipped_templates").get_to(v.skipped_templates);
  j.at("faq_hits").get_to(v.faq_hits);
  j.at("rag_calls").get_to(v.rag_calls);
}

void to_json(Json& j, const SessionState& v) {
  Json entities = Json::object();
  for (const auto& [kind, list] : v.entities) {
    entities[std::string(to_string(kind))] = list;
  }
  j = Json{{"session_id", v.session_id},
           {"started_at_ms", v.started_at_ms},
           {"entities", std::move(entities)},
           {"intents", v.intents},
           {"workflows", v.workflows},
           {"suggestions", v.suggestions},
           {"answers", v.answers},
           {"partial_summary", v.partial_summary},
           {"sentiment_trajectory", v.sentiment_trajectory},
           {"profile", v.profile},
           {"turn_count", v.turn_count},
           {"ended", v.ended},
           {"last_final_turn", v.last_final_turn},
           {"caption_buffer", v.caption_buffer},
           {"summarized_answers", v.summarized_answers},
           {"next_query_number", v.next_query_number},
           {"metrics", v.metrics}};
  put_optional(j, "top_intent", v.top_intent);
}
void from_json(const Json& j, SessionState& v) {
  j.at("session_id").get_to(v.session_id);
  j.at("started_at_ms").get_to(v.started_at_ms);
  v.entities.clear();
  for (auto it = j.at("entities").begin(); it != j.at("entities").end(); ++it) {
    const auto kind = parse_enum<EntityKind>(it.key());
    if (!kind) throw Error(ErrorCode::parse, "unknown entity kind '" + it.key() + "'", "entities");
    v.entities[*kind] = it.value().get<std::vector<Entity>>();
  }
  j.at("intents").get_to(v.intents);
  j.at("workflows").get_to(v.workflows);
  j.at("suggestions").get_to(v.suggestions);
  j.at("answers").get_to(v.answers);
  j.at("partial_summary").get_to(v.partial_summary);
  j.at("sentiment_trajectory").get_to(v.sentiment_trajectory);
  j.at("profile").get_to(v.profile);
  j.at("turn_count").get_to(v.turn_count);
  j.at("ended").get_to(v.ended);
  j.at("last_final_turn").get_to(v.last_final_turn);
  j.at("caption_buffer").get_to(v.caption_buffer);
  j.at("summarized_answers").get_to(v.summarized_answers);
  j.at("next_query_number").get_to(v.next_query_number);
  j.at("metrics").get_to(v.metrics);
  get_optional(j, "top_intent", v.top_intent);
}

void to_json(Json& j, const CallRecord& v) {
  j = Json{{"session_id", v.session_id},
           {"duration_s", v.duration_s},
           {"cohort", v.cohort},
           {"faq_hits", v.faq_hits},
           {"rag_calls", v.rag_calls},
           {"converted_enquiry", v.converted_enquiry},
           {"converted_booking", v.converted_booking},
           {"outcome", v.outcome},
           {"config_version", v.config_version}};
}
void from_json(const Json& j, CallRecord& v) {
  j.at("session_id").get_to(v.session_id);
  j.at("duration_s").get_to(v.duration_s);
  j.at("cohort").get_to(v.cohort);
  j.at("faq_hits").get_to(v.faq_hits);
  j.at("rag_calls").get_to(v.rag_calls);
  j.at("converted_enquiry").get_to(v.converted_enquiry);
  j.at("converted_booking").get_to(v.converted_booking);
  j.at("outcome").get_to(v.outcome);
  v.config_version = j.value("config_version", std::string{});
}

void to_json(Json& j, const JournalEntry& v) {
  j = Json{{"seq", v.seq}, {"kind", v.kind}, {"payload", v.payload}, {"t_ms", v.t_ms}};
}
void from_json(const Json& j, JournalEntry& v) {
  j.at("seq").get_to(v.seq);
  j.at("kind").get_to(v.kind);
  v.payload = j.at("payload");
  j.at("t_ms").get_to(v.t_ms);
}

}  // namespace callassist
