#include "callassist/summarization.hpp"

#include <algorithm>
#include <cmath>

#include "callassist/errors.hpp"
#include "callassist/text.hpp"

namespace callassist {

std::string_view placeholder(EntityKind kind) noexcept {
  switch (kind) {
    case EntityKind::email:
      return "[EMAIL]";
    case EntityKind::phone:
      return "[PHONE]";
    case EntityKind::account_number:
      return "[ACCOUNT]";
    case EntityKind::name:
      return "[NAME]";
  }
  return "[PII]";
}

Redaction redact_pii(std::string_view text, const EntityMatcher& matcher) {
  Redaction out{std::string(text), 0};
  // A replacement can only shrink or shift text, so a handful of passes
  // always reaches the fixed point; the bound guards against odd patterns.
  for (int pass = 0; pass < 8; ++pass) {
    const auto matches = matcher.find_all(out.text);
    if (matches.empty()) break;
    std::string next;
    std::size_t cursor = 0;
    for (const auto& m : matches) {
      next.append(out.text, cursor, m.begin - cursor);
      next += placeholder(m.kind);
      cursor = m.end;
    }
    next.append(out.text, cursor, std::string::npos);
    out.count += matches.size();
    out.text = std::move(next);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string entity_bullet(EntityKind kind) {
  std::string label(to_string(kind));
  std::replace(label.begin(), label.end(), '_', ' ');
  return "Customer " + label + ": " + std::string(placeholder(kind));
}

std::string intent_bullet(const std::string& label) { return "Intent detected: " + label; }

std::string answer_bullet(const AnswerRecord& answer) {
  if (answer.no_answer) return "No answer found: " + answer.query_text;
  return std::string(answer.route == Route::faq ? "Answered via FAQ: " : "Answered via RAG: ") + answer.query_text;
}

std::string sentiment_bullet(double polarity, double previous) {
  std::string value = format_fixed(polarity, 2);
  if (value[0] != '-') value = "+" + value;
  return std::string("Sentiment shift: ") + (polarity > previous ? "improved to " : "declined to ") + value;
}

std::optional<std::string> salient_bullet(const TurnSalience& turn, const SummaryConfig& config,
                                          const EntityMatcher& matcher) {
  std::optional<std::string> bullet;
  if (!turn.new_entities.empty()) {
    bullet = entity_bullet(turn.new_entities.front().kind);
  } else if (!turn.newly_triggered.empty()) {
    bullet = intent_bullet(turn.newly_triggered.front());
  } else if (!turn.delivered_answers.empty()) {
    bullet = answer_bullet(turn.delivered_answers.back());
  } else if (turn.sentiment_step) {
    const auto [previous, current] = *turn.sentiment_step;
    if (std::abs(current - previous) + 1e-12 >= config.sentiment_delta) bullet = sentiment_bullet(current, previous);
  }
  if (bullet) bullet = redact_pii(*bullet, matcher).text;
  return bullet;
}

PartialSummary update_partial_summary(PartialSummary prev, const std::optional<std::string>& bullet,
                                      std::int64_t turn_index) {
  prev.as_of_turn = turn_index;
  if (bullet) {
    std::erase(prev.bullets, *bullet);
    prev.bullets.push_back(*bullet);
  }
  while (prev.bullets.size() > prev.budget) prev.bullets.erase(prev.bullets.begin());
  return prev;
}

// ---------------------------------------------------------------------------

void to_json(Json& j, const FinalSummary& v) {
  Json trajectory = Json::array();
  for (const auto& [turn, polarity] : v.sentiment_trajectory) trajectory.push_back(Json::array({turn, polarity}));
  j = Json{{"session_id", v.session_id},
           {"primary_intent", v.primary_intent},
           {"resolution_path", v.resolution_path},
           {"agent_actions", v.agent_actions},
           {"sentiment_trajectory", trajectory},
           {"outcome", v.outcome},
           {"redacted_text", v.redacted_text},
           {"redaction_count", v.redaction_count}};
}

void from_json(const Json& j, FinalSummary& v) {
  j.at("session_id").get_to(v.session_id);
  j.at("primary_intent").get_to(v.primary_intent);
  j.at("resolution_path").get_to(v.resolution_path);
  j.at("agent_actions").get_to(v.agent_actions);
  v.sentiment_trajectory.clear();
  for (const auto& p : j.at("sentiment_trajectory")) {
    v.sentiment_trajectory.emplace_back(p.at(0).get<std::int64_t>(), p.at(1).get<double>());
  }
  j.at("outcome").get_to(v.outcome);
  j.at("redacted_text").get_to(v.redacted_text);
  j.at("redaction_count").get_to(v.redaction_count);
}

std::string primary_intent(const SessionState& state) {
  const IntentHypothesis* best = nullptr;
  for (const auto& [label, hyp] : state.intents) {
    if (!hyp.triggered) continue;
    if (!best || hyp.confidence > best->confidence ||
        (hyp.confidence == best->confidence && hyp.triggered_at_turn < best->triggered_at_turn)) {
      best = &hyp;
    }
  }
  return best ? best->label : "unknown";
}

std::string render_summary(const SessionState& state, const FinalSummary& summary) {
  std::vector<std::string> lines;
  lines.push_back("Call summary for session " + summary.session_id);
  lines.push_back("Primary intent: " + summary.primary_intent);
  lines.push_back("Resolution path: " +
                  (summary.resolution_path.empty() ? std::string("none") : join(summary.resolution_path, " -> ")));
  lines.push_back("Agent actions: " +
                  (summary.agent_actions.empty() ? std::string("none") : join(summary.agent_actions, ", ")));
  lines.push_back("Outcome: " + summary.outcome);

  std::vector<std::string> points;
  for (const auto& [turn, polarity] : summary.sentiment_trajectory) {
    points.push_back("t" + std::to_string(turn) + " " + format_fixed(polarity, 2));
  }
  lines.push_back("Sentiment trajectory: " + (points.empty() ? std::string("none") : join(points, ", ")));

  std::vector<std::string> ids;
  for (const auto& [kind, list] : state.entities) {
    for (const auto& e : list) ids.push_back(std::string(to_string(kind)) + " " + e.value);
  }
  if (!ids.empty()) lines.push_back("Identifiers: " + join(ids, ", "));
  if (!state.profile.goal_phrases.empty()) lines.push_back("Customer goals: " + join(state.profile.goal_phrases, "; "));
  for (const auto& a : state.answers) lines.push_back(answer_bullet(a));
  return join(lines, "\n");
}

FinalSummary final_summary(const SessionState& state, const EntityMatcher& matcher) {
  if (!state.ended) throw Error(ErrorCode::state, "final summary requested before the call ended");
  FinalSummary s;
  s.session_id = state.session_id.value();
  s.primary_intent = primary_intent(state);
  std::optional<std::string> outcome;
  for (const auto& inst : state.workflows) {
    for (const auto& step : inst.completed_steps) {
      s.resolution_path.push_back(inst.workflow_id + "/" + step.step_id);
      s.agent_actions.push_back(step.step_id);
    }
    if (!outcome && inst.status == WorkflowStatus::completed && inst.outcome) outcome = inst.outcome;
  }
  s.outcome = outcome.value_or("unresolved");
  for (const auto& sample : state.sentiment_trajectory) s.sentiment_trajectory.emplace_back(sample.turn_index, sample.polarity);
  const Redaction r = redact_pii(render_summary(state, s), matcher);
  s.redacted_text = r.text;
  s.redaction_count = r.count;
  return s;
}

}  // namespace callassist
