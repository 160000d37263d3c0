#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "callassist/errors.hpp"
#include "callassist/governance.hpp"
#include "callassist/ingest.hpp"
#include "callassist/retrieval.hpp"
#include "callassist/session.hpp"
#include "callassist/summarization.hpp"
#include "callassist/understanding.hpp"
#include "callassist/workflow.hpp"

namespace callassist {

// ---------------------------------------------------------------------------
// Configuration and shared resources

struct StorePaths {
  std::filesystem::path intents;
  std::filesystem::path workflows;
  std::filesystem::path lexicon;
  std::filesystem::path profile_cues;
  std::filesystem::path gazetteer;
  std::filesystem::path entity_patterns;
  std::filesystem::path transliteration;
  std::filesystem::path faq_store;
  std::filesystem::path kb_dir;
  std::filesystem::path sessions_dir;
};

struct EngineConfig {
  std::string version;
  double default_intent_threshold = 0.7;
  double suggestion_floor = 0.4;
  std::size_t nba_lookahead = 2;
  SentimentConfig sentiment;
  SummaryConfig summary;
  RouteConfig route;
  bool auto_route = false;
  double seconds_saved_per_hit = 6.0;
  GovernanceConfig governance;
  std::string listen = "127.0.0.1:7400";
  bool pace_delivery = false;
  StorePaths paths;

  /// Relative store paths resolve against `base_dir`. Throws Error(config).
  static EngineConfig from_json(const Json& doc, const std::filesystem::path& base_dir);
  static EngineConfig load(const std::filesystem::path& path);
};

/// Everything the stages read: immutable after loading, except the FAQ
/// store, which swaps atomically.
struct Resources {
  EngineConfig config;
  EntityMatcher matcher;
  Tokenizer tokenizer;
  TransliterationTable transliteration;
  IntentRegistry registry;
  PolarityLexicon lexicon;
  ProfileCueSets profile_cues;
  WorkflowCatalog catalog;
  std::shared_ptr<FaqStore> faq = std::make_shared<FaqStore>();
  KbIndex kb;

  static std::shared_ptr<Resources> load(const EngineConfig& config);
};

// ---------------------------------------------------------------------------
// Messages

namespace msg {
inline constexpr const char* transcript_event = "transcript.event";
inline constexpr const char* state_entities = "state.entities";
inline constexpr const char* state_intents = "state.intents";
inline constexpr const char* workflow_triggered = "workflow.triggered";
inline constexpr const char* workflow_actions = "workflow.actions";
inline constexpr const char* query_suggested = "query.suggested";
inline constexpr const char* answer_delivered = "answer.delivered";
inline constexpr const char* summary_partial = "summary.partial";
inline constexpr const char* sentiment_update = "sentiment.update";
inline constexpr const char* final_summary = "call.final_summary";
inline constexpr const char* error = "error";
}  // namespace msg

struct AssistMessage {
  std::string type;
  std::string session_id;
  std::int64_t seq = 0;
  std::int64_t t_ms = 0;
  Json payload;

  bool operator==(const AssistMessage&) const = default;
};

void to_json(Json& j, const AssistMessage& v);
void from_json(const Json& j, AssistMessage& v);

struct AgentAction {
  enum class Kind { click_query, complete_step, end_call };
  std::string session_id;
  Kind kind = Kind::end_call;
  std::string query_id;
  std::string workflow_id;
  std::string step_id;
  std::optional<std::string> outcome;
  std::int64_t t_ms = 0;

  bool operator==(const AgentAction&) const = default;
};

void to_json(Json& j, const AgentAction& v);
/// Throws Error(parse) naming the missing or malformed field.
void from_json(const Json& j, AgentAction& v);
AgentAction parse_agent_action(const Json& doc);

/// Journal payloads of the inputs, in the same envelope the wire uses.
Json session_open_input(const SessionId& id, std::int64_t started_at_ms);
Json event_input(const TranscriptEvent& event);
Json action_input(const AgentAction& action);

// ---------------------------------------------------------------------------
// The per-event loop

struct EngineOptions {
  /// Off for audit replays, so re-running a journal leaves hit counts alone.
  bool record_faq_hits = true;
};

class Engine {
 public:
  explicit Engine(std::shared_ptr<const Resources> resources, EngineOptions options = {});

  const Resources& resources() const noexcept { return *resources_; }

  /// Fresh session whose journal starts with the session.open input.
  Session open(const SessionId& id, std::int64_t started_at_ms) const;

  /// Runs the stages in fixed order and journals the input and every output.
  /// Ordering violations produce an error message and leave the state as it
  /// was. Throws Error(session_ended) after end_call and
  /// Error(unknown_session) for an event addressed to another call.
  std::vector<AssistMessage> process_event(Session& session, TranscriptEvent event) const;

  /// click_query routes, complete_step advances, end_call closes the call
  /// with the final summary. Bad references produce an error message.
  std::vector<AssistMessage> handle_agent_action(Session& session, const AgentAction& action) const;

 private:
  std::vector<AssistMessage> process_final(Session& session, const TranscriptEvent& event) const;
  AssistMessage emit(Session& session, const std::string& type, std::int64_t t_ms, Json payload) const;
  AssistMessage emit_error(Session& session, std::int64_t t_ms, const Error& error) const;
  Json workflow_panel(const SessionState& state) const;
  AnswerRecord route_query(SessionState& state, const SuggestedQuery& query, std::int64_t now_ms) const;

  std::shared_ptr<const Resources> resources_;
  EngineOptions options_;
};

/// Next-best-action panel for every instance of the session.
Json workflow_panel(const SessionState& state, const WorkflowCatalog& catalog, std::size_t lookahead);

/// Re-applies the inputs of a journal to a fresh session. `on_input` sees the
/// state after every input entry. Throws Error(invariant) when a re-derived
/// output differs from the recorded one.
Session replay_journal(const Journal& journal, const Engine& engine,
                       const std::function<void(std::int64_t seq, const SessionState&)>& on_input = {});

// ---------------------------------------------------------------------------
// Concurrent sessions

/// Thread-safe front of the engine: one lane per call, subscribers receive
/// every output frame of their call in journal order.
class SessionManager {
 public:
  using Sink = std::function<void(const std::string& frame)>;

  explicit SessionManager(std::shared_ptr<const Resources> resources, EngineOptions options = {});

  const Engine& engine() const noexcept { return engine_; }

  /// Throws Error(duplicate_session).
  void open(const SessionId& id, std::int64_t started_at_ms);
  bool exists(const std::string& session_id) const;

  std::vector<AssistMessage> submit_event(const TranscriptEvent& event);
  std::vector<AssistMessage> submit_action(const AgentAction& action);

  /// Sends every output with seq > last_seen_seq, then live frames. Returns a
  /// handle for unsubscribe.
  std::uint64_t subscribe(const std::string& session_id, std::int64_t last_seen_seq, Sink sink);
  void unsubscribe(const std::string& session_id, std::uint64_t handle);

  Journal journal(const std::string& session_id) const;
  SessionState state(const std::string& session_id) const;
  std::vector<std::string> sessions() const;

  /// Writes journal and snapshot of a session under `root`.
  void persist(const std::string& session_id, const std::filesystem::path& root) const;

 private:
  void fan_out(SessionLane& lane, const std::vector<AssistMessage>& messages);

  Engine engine_;
  SessionTable table_;
  std::atomic<std::uint64_t> next_handle_{1};
};

std::string frame(const AssistMessage& message);

}  // namespace callassist
