#include "callassist/orchestrator.hpp"

#include <algorithm>

#include "callassist/errors.hpp"

namespace callassist {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const Json& stores, const char* key,
                              const char* fallback) {
  std::filesystem::path p = stores.value(key, std::string(fallback));
  return p.is_absolute() ? p : base / p;
}

template <class T>
T number(const Json& section, const char* key, T fallback) {
  if (!section.contains(key)) return fallback;
  const auto& v = section.at(key);
  if (!v.is_number()) throw Error(ErrorCode::config, std::string("config value '") + key + "' must be a number", key);
  return v.get<T>();
}

bool flag(const Json& section, const char* key, bool fallback) {
  if (!section.contains(key)) return fallback;
  const auto& v = section.at(key);
  if (!v.is_boolean()) throw Error(ErrorCode::config, std::string("config value '") + key + "' must be a boolean", key);
  return v.get<bool>();
}

Json section(const Json& doc, const char* key) {
  if (!doc.contains(key)) return Json::object();
  if (!doc.at(key).is_object()) throw Error(ErrorCode::config, std::string("config section '") + key + "' must be an object", key);
  return doc.at(key);
}

std::string action_name(AgentAction::Kind kind) {
  switch (kind) {
    case AgentAction::Kind::click_query:
      return "click_query";
    case AgentAction::Kind::complete_step:
      return "complete_step";
    case AgentAction::Kind::end_call:
      return "end_call";
  }
  return "end_call";
}

std::string require_string(const Json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::parse, std::string("missing field '") + key + "'", key);
  if (!j.at(key).is_string() || j.at(key).get<std::string>().empty()) {
    throw Error(ErrorCode::parse, std::string("field '") + key + "' must be a non-empty string", key);
  }
  return j.at(key).get<std::string>();
}

}  // namespace

// ---------------------------------------------------------------------------

EngineConfig EngineConfig::from_json(const Json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw Error(ErrorCode::config, "config must be an object");
  EngineConfig c;
  if (!doc.contains("version") || !doc.at("version").is_string()) {
    throw Error(ErrorCode::config, "config needs a string 'version'", "version");
  }
  c.version = doc.at("version").get<std::string>();

  const Json intents = section(doc, "intents");
  c.default_intent_threshold = number(intents, "default_threshold", c.default_intent_threshold);
  c.suggestion_floor = number(intents, "suggestion_floor", c.suggestion_floor);
  if (!(c.default_intent_threshold > 0.0 && c.default_intent_threshold <= 1.0)) {
    throw Error(ErrorCode::config, "default_threshold must be in (0, 1]", "default_threshold");
  }

  const Json workflow = section(doc, "workflow");
  c.nba_lookahead = number(workflow, "lookahead", c.nba_lookahead);

  const Json sentiment = section(doc, "sentiment");
  c.sentiment.csat_k = number(sentiment, "csat_k", c.sentiment.csat_k);
  c.sentiment.detractor_below = number(sentiment, "detractor_below", c.sentiment.detractor_below);
  c.sentiment.promoter_from = number(sentiment, "promoter_from", c.sentiment.promoter_from);
  if (!(c.sentiment.csat_k > 0.0)) throw Error(ErrorCode::config, "csat_k must be positive", "csat_k");
  if (!(c.sentiment.detractor_below <= c.sentiment.promoter_from)) {
    throw Error(ErrorCode::config, "NPS cutpoints out of order", "promoter_from");
  }

  const Json summary = section(doc, "summary");
  c.summary.budget = number(summary, "budget", c.summary.budget);
  c.summary.sentiment_delta = number(summary, "sentiment_delta", c.summary.sentiment_delta);
  if (c.summary.budget == 0) throw Error(ErrorCode::config, "summary budget must be positive", "budget");

  const Json retrieval = section(doc, "retrieval");
  c.route.faq_threshold = number(retrieval, "faq_threshold", c.route.faq_threshold);
  c.route.faq_latency_ms = number(retrieval, "faq_latency_ms", c.route.faq_latency_ms);
  c.route.rag_base_ms = number(retrieval, "rag_base_ms", c.route.rag_base_ms);
  c.route.rag_per_passage_ms = number(retrieval, "rag_per_passage_ms", c.route.rag_per_passage_ms);
  c.route.rag_k = number(retrieval, "rag_k", c.route.rag_k);
  c.auto_route = flag(retrieval, "auto_route", c.auto_route);
  c.seconds_saved_per_hit = number(retrieval, "seconds_saved_per_hit", c.seconds_saved_per_hit);
  c.route.validate();

  const Json governance = section(doc, "governance");
  c.governance.min_support = number(governance, "min_support", c.governance.min_support);
  c.governance.question_min_tokens = number(governance, "question_min_tokens", c.governance.question_min_tokens);
  c.governance.answer_min_tokens = number(governance, "answer_min_tokens", c.governance.answer_min_tokens);
  c.governance.answer_max_tokens = number(governance, "answer_max_tokens", c.governance.answer_max_tokens);
  if (governance.contains("ttl_days")) {
    c.governance.ttl_ms = static_cast<std::int64_t>(number(governance, "ttl_days", 30.0) * 24 * 3600 * 1000);
  }
  if (c.governance.answer_min_tokens > c.governance.answer_max_tokens) {
    throw Error(ErrorCode::config, "answer token bounds out of order", "answer_min_tokens");
  }

  const Json service = section(doc, "service");
  if (service.contains("listen")) c.listen = service.at("listen").get<std::string>();
  c.pace_delivery = flag(service, "pace_delivery", c.pace_delivery);

  const Json stores = section(doc, "stores");
  c.paths.intents = resolve(base_dir, stores, "intents", "intents.json");
  c.paths.workflows = resolve(base_dir, stores, "workflows", "workflows.json");
  c.paths.lexicon = resolve(base_dir, stores, "lexicon", "lexicon.json");
  c.paths.profile_cues = resolve(base_dir, stores, "profile_cues", "profile_cues.json");
  c.paths.gazetteer = resolve(base_dir, stores, "gazetteer", "gazetteer.json");
  c.paths.entity_patterns = resolve(base_dir, stores, "entity_patterns", "entity_patterns.json");
  c.paths.transliteration = resolve(base_dir, stores, "transliteration", "transliteration.json");
  c.paths.faq_store = resolve(base_dir, stores, "faq_store", "faq/faq.ndjson");
  c.paths.kb_dir = resolve(base_dir, stores, "kb_dir", "kb");
  c.paths.sessions_dir = resolve(base_dir, stores, "sessions_dir", "sessions");
  return c;
}

EngineConfig EngineConfig::load(const std::filesystem::path& path) {
  return from_json(load_json_file(path), path.parent_path());
}

std::shared_ptr<Resources> Resources::load(const EngineConfig& config) {
  auto r = std::make_shared<Resources>();
  r->config = config;
  r->matcher = EntityMatcher(
      EntityPatternSet::from_json(load_json_file(config.paths.entity_patterns), load_json_file(config.paths.gazetteer)));
  r->tokenizer = Tokenizer(r->matcher.protected_token_patterns());
  r->transliteration = TransliterationTable::load(config.paths.transliteration);
  r->registry =
      IntentRegistry::from_json(load_json_file(config.paths.intents), r->tokenizer, config.default_intent_threshold);
  r->lexicon = PolarityLexicon::from_json(load_json_file(config.paths.lexicon), r->tokenizer);
  r->profile_cues = ProfileCueSets::from_json(load_json_file(config.paths.profile_cues));
  r->catalog = WorkflowCatalog::from_json(load_json_file(config.paths.workflows));
  validate_registry(r->registry, r->catalog);
  r->faq->replace(load_faq_entries(config.paths.faq_store));
  r->kb = KbIndex::load_directory(config.paths.kb_dir, r->tokenizer);
  return r;
}

// ---------------------------------------------------------------------------

void to_json(Json& j, const AssistMessage& v) {
  j = Json{{"type", v.type}, {"session_id", v.session_id}, {"seq", v.seq}, {"t_ms", v.t_ms}, {"payload", v.payload}};
}

void from_json(const Json& j, AssistMessage& v) {
  j.at("type").get_to(v.type);
  j.at("session_id").get_to(v.session_id);
  j.at("seq").get_to(v.seq);
  j.at("t_ms").get_to(v.t_ms);
  v.payload = j.at("payload");
}

void to_json(Json& j, const AgentAction& v) {
  j = Json{{"session_id", v.session_id}, {"action", action_name(v.kind)}, {"t_ms", v.t_ms}};
  switch (v.kind) {
    case AgentAction::Kind::click_query:
      j["query_id"] = v.query_id;
      break;
    case AgentAction::Kind::complete_step:
      j["workflow_id"] = v.workflow_id;
      j["step_id"] = v.step_id;
      j["outcome"] = v.outcome ? Json(*v.outcome) : Json(nullptr);
      break;
    case AgentAction::Kind::end_call:
      break;
  }
}

void from_json(const Json& j, AgentAction& v) {
  if (!j.is_object()) throw Error(ErrorCode::parse, "agent action must be an object");
  v = AgentAction{};
  v.session_id = require_string(j, "session_id");
  const std::string action = require_string(j, "action");
  if (!j.contains("t_ms")) throw Error(ErrorCode::parse, "missing field 't_ms'", "t_ms");
  if (!j.at("t_ms").is_number_integer() || j.at("t_ms").get<std::int64_t>() < 0) {
    throw Error(ErrorCode::parse, "field 't_ms' must be a non-negative integer", "t_ms");
  }
  v.t_ms = j.at("t_ms").get<std::int64_t>();
  if (action == "click_query") {
    v.kind = AgentAction::Kind::click_query;
    v.query_id = require_string(j, "query_id");
  } else if (action == "complete_step") {
    v.kind = AgentAction::Kind::complete_step;
    v.workflow_id = require_string(j, "workflow_id");
    v.step_id = require_string(j, "step_id");
    if (j.contains("outcome") && !j.at("outcome").is_null()) v.outcome = require_string(j, "outcome");
  } else if (action == "end_call") {
    v.kind = AgentAction::Kind::end_call;
  } else {
    throw Error(ErrorCode::parse, "unknown action '" + action + "'", "action");
  }
}

AgentAction parse_agent_action(const Json& doc) { return doc.get<AgentAction>(); }

Json session_open_input(const SessionId& id, std::int64_t started_at_ms) {
  return Json{{"type", "session.open"}, {"session_id", id.value()}, {"started_at_ms", started_at_ms}};
}

Json event_input(const TranscriptEvent& event) {
  return Json{{"type", "transcript.event"}, {"session_id", event.session_id}, {"payload", event_record(event)}};
}

Json action_input(const AgentAction& action) {
  return Json{{"type", "agent.action"}, {"session_id", action.session_id}, {"payload", action}};
}

std::string frame(const AssistMessage& message) { return canonical_dump(Json(message)); }

// ---------------------------------------------------------------------------

Engine::Engine(std::shared_ptr<const Resources> resources, EngineOptions options)
    : resources_(std::move(resources)), options_(options) {
  if (!resources_) throw Error(ErrorCode::config, "engine needs resources");
}

Session Engine::open(const SessionId& id, std::int64_t started_at_ms) const {
  if (id.empty()) throw Error(ErrorCode::parse, "session id must be non-empty", "session_id");
  Session session{create_session(id, started_at_ms), Journal{}};
  append_journal(session, JournalEntry{0, JournalKind::input_event, session_open_input(id, started_at_ms), started_at_ms});
  return session;
}

AssistMessage Engine::emit(Session& session, const std::string& type, std::int64_t t_ms, Json payload) const {
  AssistMessage m{type, session.state.session_id.value(), session.journal.next_seq(), t_ms, std::move(payload)};
  append_journal(session, JournalEntry{m.seq, JournalKind::assist_output, Json(m), t_ms});
  return m;
}

AssistMessage Engine::emit_error(Session& session, std::int64_t t_ms, const Error& error) const {
  return emit(session, msg::error, t_ms, Json{{"code", to_string(error.code())}, {"message", error.what()}});
}

Json workflow_panel(const SessionState& state, const WorkflowCatalog& catalog, std::size_t lookahead) {
  Json panel = Json::array();
  for (const auto& inst : state.workflows) {
    const auto* def = catalog.find(inst.workflow_id);
    Json actions = Json::array();
    for (const auto& a : next_best_actions(inst, catalog, state, lookahead)) actions.push_back(a);
    panel.push_back(Json{{"workflow_id", inst.workflow_id},
                         {"title", def ? def->title : std::string{}},
                         {"status", inst.status},
                         {"cursor", inst.cursor},
                         {"outcome", inst.outcome ? Json(*inst.outcome) : Json(nullptr)},
                         {"actions", actions}});
  }
  return Json{{"workflows", panel}};
}

Json Engine::workflow_panel(const SessionState& state) const {
  return callassist::workflow_panel(state, resources_->catalog, resources_->config.nba_lookahead);
}

AnswerRecord Engine::route_query(SessionState& state, const SuggestedQuery& query, std::int64_t now_ms) const {
  const auto cache = resources_->faq->snapshot();
  AnswerRecord rec = route(query, *cache, resources_->kb, resources_->config.route, resources_->tokenizer, now_ms,
                           options_.record_faq_hits ? resources_->faq.get() : nullptr);
  if (rec.route == Route::faq) {
    ++state.metrics.faq_hits;
  } else {
    ++state.metrics.rag_calls;
  }
  state.answers.push_back(rec);
  return rec;
}

std::vector<AssistMessage> Engine::process_event(Session& session, TranscriptEvent event) const {
  SessionState& state = session.state;
  if (event.session_id != state.session_id.value()) {
    throw Error(ErrorCode::unknown_session, "event for session '" + event.session_id + "' sent to '" +
                                                state.session_id.value() + "'");
  }
  if (state.ended) throw Error(ErrorCode::session_ended, "session " + state.session_id.value() + " has ended");

  append_journal(session, JournalEntry{session.journal.next_seq(), JournalKind::input_event, event_input(event),
                                       event.t_end_ms});

  std::vector<AssistMessage> out;
  if (event.turn_index <= state.last_final_turn) {
    out.push_back(emit_error(session, event.t_end_ms,
                             Error(ErrorCode::ordering, "turn " + std::to_string(event.turn_index) +
                                                            " does not follow final turn " +
                                                            std::to_string(state.last_final_turn),
                                   "turn_index")));
    return out;
  }

  NormalizedEvent normalized = normalize_display_text(std::move(event), resources_->transliteration);
  const TranscriptEvent& ev = normalized.event;
  state.metrics.unmatched_tokens += static_cast<std::int64_t>(normalized.unmatched_tokens);
  out.push_back(emit(session, msg::transcript_event, ev.t_end_ms, Json(ev)));

  if (!ev.is_final) {
    state.caption_buffer = ev.display_text;
    return out;
  }
  auto rest = process_final(session, ev);
  out.insert(out.end(), std::make_move_iterator(rest.begin()), std::make_move_iterator(rest.end()));
  return out;
}

std::vector<AssistMessage> Engine::process_final(Session& session, const TranscriptEvent& ev) const {
  SessionState& state = session.state;
  const Resources& r = *resources_;
  const std::int64_t t = ev.t_end_ms;
  const bool customer = ev.speaker == Speaker::customer;
  std::vector<AssistMessage> out;

  const Json panel_before = workflow_panel(state);
  state.turn_count += 1;
  state.last_final_turn = ev.turn_index;
  state.caption_buffer.clear();

  // understand
  const auto found = extract_entities(ev, r.matcher);
  const auto fresh = merge_entities(state, found);
  if (!fresh.empty()) {
    Json entities = Json(state).at("entities");
    out.push_back(emit(session, msg::state_entities, t, Json{{"entities", entities}, {"new", fresh}}));
  }

  IntentUpdate intents;
  std::optional<std::pair<double, double>> sentiment_step;
  if (customer) {
    intents = update_intents(state, ev, r.registry, r.tokenizer);
    if (intents.changed) {
      out.push_back(emit(session, msg::state_intents, t,
                         Json{{"intents", Json(state).at("intents")},
                              {"newly_triggered", intents.newly_triggered},
                              {"top_intent", state.top_intent ? Json(*state.top_intent) : Json(nullptr)},
                              {"intent_changed", intents.intent_changed}}));
    }
    const SentimentSample sample = update_sentiment(state, ev, r.lexicon, r.tokenizer, r.config.sentiment);
    double sum = 0.0;
    for (const auto& s : state.sentiment_trajectory) sum += s.polarity;
    const double mean = sum / static_cast<double>(state.sentiment_trajectory.size());
    out.push_back(emit(session, msg::sentiment_update, t, Json{{"sample", sample}, {"mean_polarity", mean}}));
    const auto& traj = state.sentiment_trajectory;
    if (traj.size() >= 2) sentiment_step = std::make_pair(traj[traj.size() - 2].polarity, traj.back().polarity);

    update_profile(state, ev, r.profile_cues, r.tokenizer);
  }

  // decide
  const auto instances = trigger_workflows(intents.newly_triggered, r.registry, r.catalog, state);
  if (!instances.empty()) out.push_back(emit(session, msg::workflow_triggered, t, Json{{"instances", instances}}));
  Json panel_after = workflow_panel(state);
  if (panel_after != panel_before) out.push_back(emit(session, msg::workflow_actions, t, std::move(panel_after)));

  // assist
  std::vector<SuggestedQuery> queries;
  if (customer) {
    queries = generate_queries(state, ev, r.registry, r.tokenizer, r.config.suggestion_floor);
    if (!queries.empty()) out.push_back(emit(session, msg::query_suggested, t, Json{{"queries", queries}}));
    if (r.config.auto_route) {
      for (const auto& q : queries) {
        const AnswerRecord rec = route_query(state, q, t);
        out.push_back(emit(session, msg::answer_delivered, t, Json{{"answer", rec}}));
      }
    }
  }

  // summarize: answers are reported on customer turns only
  TurnSalience salience;
  salience.new_entities = fresh;
  salience.newly_triggered = intents.newly_triggered;
  if (customer) {
    salience.delivered_answers.assign(state.answers.begin() + static_cast<std::ptrdiff_t>(state.summarized_answers),
                                      state.answers.end());
    state.summarized_answers = state.answers.size();
    salience.sentiment_step = sentiment_step;
  }
  const auto bullet = salient_bullet(salience, r.config.summary, r.matcher);
  state.partial_summary.budget = r.config.summary.budget;
  const auto previous_bullets = state.partial_summary.bullets;
  state.partial_summary = update_partial_summary(std::move(state.partial_summary), bullet, ev.turn_index);
  if (state.partial_summary.bullets != previous_bullets) {
    out.push_back(emit(session, msg::summary_partial, t, Json{{"summary", state.partial_summary}}));
  }
  return out;
}

std::vector<AssistMessage> Engine::handle_agent_action(Session& session, const AgentAction& action) const {
  SessionState& state = session.state;
  if (action.session_id != state.session_id.value()) {
    throw Error(ErrorCode::unknown_session, "action for session '" + action.session_id + "' sent to '" +
                                                state.session_id.value() + "'");
  }
  if (state.ended) throw Error(ErrorCode::session_ended, "session " + state.session_id.value() + " has ended");

  append_journal(session,
                 JournalEntry{session.journal.next_seq(), JournalKind::agent_action, action_input(action), action.t_ms});
  std::vector<AssistMessage> out;
  const std::int64_t t = action.t_ms;

  switch (action.kind) {
    case AgentAction::Kind::click_query: {
      const auto q = std::find_if(state.suggestions.begin(), state.suggestions.end(),
                                  [&](const SuggestedQuery& s) { return s.query_id == action.query_id; });
      if (q == state.suggestions.end()) {
        out.push_back(emit_error(
            session, t, Error(ErrorCode::invalid_reference, "unknown query_id '" + action.query_id + "'", "query_id")));
        break;
      }
      const auto answered = std::find_if(state.answers.begin(), state.answers.end(),
                                         [&](const AnswerRecord& a) { return a.query_id == action.query_id; });
      // A repeated click re-delivers the recorded answer instead of routing twice.
      const AnswerRecord rec = answered != state.answers.end() ? *answered : route_query(state, *q, t);
      out.push_back(emit(session, msg::answer_delivered, t, Json{{"answer", rec}}));
      break;
    }
    case AgentAction::Kind::complete_step: {
      const auto inst = std::find_if(state.workflows.begin(), state.workflows.end(),
                                     [&](const WorkflowInstance& w) { return w.workflow_id == action.workflow_id; });
      if (inst == state.workflows.end()) {
        out.push_back(emit_error(session, t,
                                 Error(ErrorCode::invalid_reference,
                                       "no workflow '" + action.workflow_id + "' in this session", "workflow_id")));
        break;
      }
      try {
        StepCompletion completion{action.workflow_id, action.step_id, action.outcome,
                                  std::max<std::int64_t>(state.last_final_turn, 0)};
        *inst = advance(*inst, completion, resources_->catalog);
      } catch (const Error& e) {
        out.push_back(emit_error(session, t, e));
        break;
      }
      out.push_back(emit(session, msg::workflow_actions, t, workflow_panel(state)));
      break;
    }
    case AgentAction::Kind::end_call: {
      abandon_active(state);
      state.ended = true;
      const FinalSummary summary = final_summary(state, resources_->matcher);
      out.push_back(emit(session, msg::final_summary, t, Json{{"summary", summary}, {"text", summary.redacted_text}}));
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Session replay_journal(const Journal& journal, const Engine& engine,
                       const std::function<void(std::int64_t, const SessionState&)>& on_input) {
  const auto& entries = journal.entries();
  if (entries.empty()) throw Error(ErrorCode::invariant, "empty journal");
  const Json& first = entries.front().payload;
  if (entries.front().kind != JournalKind::input_event || first.value("type", "") != "session.open") {
    throw Error(ErrorCode::invariant, "journal does not start with session.open");
  }
  Session session = engine.open(SessionId(first.at("session_id").get<std::string>()),
                                first.at("started_at_ms").get<std::int64_t>());
  if (on_input) on_input(0, session.state);

  for (const auto& entry : entries) {
    if (entry.seq < session.journal.next_seq()) continue;
    if (entry.kind == JournalKind::assist_output) {
      throw Error(ErrorCode::invariant, "recorded output at seq " + std::to_string(entry.seq) + " was not re-derived");
    }
    const std::int64_t seq = entry.seq;
    if (entry.kind == JournalKind::input_event) {
      engine.process_event(session, parse_event(entry.payload.at("payload")));
    } else {
      engine.handle_agent_action(session, parse_agent_action(entry.payload.at("payload")));
    }
    if (on_input) on_input(seq, session.state);
  }
  const auto& rebuilt = session.journal.entries();
  if (rebuilt.size() != entries.size()) throw Error(ErrorCode::invariant, "replayed journal length differs");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (canonical_dump(Json(rebuilt[i])) != canonical_dump(Json(entries[i]))) {
      throw Error(ErrorCode::invariant, "replayed journal differs at seq " + std::to_string(i));
    }
  }
  return session;
}

// ---------------------------------------------------------------------------

SessionManager::SessionManager(std::shared_ptr<const Resources> resources, EngineOptions options)
    : engine_(std::move(resources), options) {}

void SessionManager::open(const SessionId& id, std::int64_t started_at_ms) {
  auto lane = table_.create(id, started_at_ms);
  std::lock_guard lock(lane->mutex);
  lane->session = engine_.open(id, started_at_ms);
}

bool SessionManager::exists(const std::string& session_id) const { return table_.find(session_id) != nullptr; }

void SessionManager::fan_out(SessionLane& lane, const std::vector<AssistMessage>& messages) {
  for (const auto& m : messages) {
    const std::string f = frame(m);
    for (const auto& [handle, sink] : lane.subscribers) sink(f);
  }
}

std::vector<AssistMessage> SessionManager::submit_event(const TranscriptEvent& event) {
  auto lane = table_.get(event.session_id);
  std::lock_guard lock(lane->mutex);
  auto messages = engine_.process_event(lane->session, event);
  fan_out(*lane, messages);
  return messages;
}

std::vector<AssistMessage> SessionManager::submit_action(const AgentAction& action) {
  auto lane = table_.get(action.session_id);
  std::lock_guard lock(lane->mutex);
  auto messages = engine_.handle_agent_action(lane->session, action);
  fan_out(*lane, messages);
  return messages;
}

std::uint64_t SessionManager::subscribe(const std::string& session_id, std::int64_t last_seen_seq, Sink sink) {
  auto lane = table_.get(session_id);
  std::lock_guard lock(lane->mutex);
  for (const auto& entry : lane->session.journal.entries()) {
    if (entry.seq > last_seen_seq && entry.kind == JournalKind::assist_output) sink(canonical_dump(entry.payload));
  }
  const std::uint64_t handle = next_handle_++;
  lane->subscribers.emplace(handle, std::move(sink));
  return handle;
}

void SessionManager::unsubscribe(const std::string& session_id, std::uint64_t handle) {
  auto lane = table_.find(session_id);
  if (!lane) return;
  std::lock_guard lock(lane->mutex);
  lane->subscribers.erase(handle);
}

Journal SessionManager::journal(const std::string& session_id) const {
  auto lane = table_.get(session_id);
  std::lock_guard lock(lane->mutex);
  return lane->session.journal;
}

SessionState SessionManager::state(const std::string& session_id) const {
  auto lane = table_.get(session_id);
  std::lock_guard lock(lane->mutex);
  return lane->session.state;
}

std::vector<std::string> SessionManager::sessions() const { return table_.ids(); }

void SessionManager::persist(const std::string& session_id, const std::filesystem::path& root) const {
  auto lane = table_.get(session_id);
  std::lock_guard lock(lane->mutex);
  persist_session(lane->session, root);
}

}  // namespace callassist
