#include <gtest/gtest.h>

#include "callassist/errors.hpp"
#include "callassist/summarization.hpp"
#include "checks.hpp"

namespace callassist {
namespace {

using testing::fixture_resources;

TEST(Redact, EmailBecomesPlaceholder) {
  const auto r = redact_pii("reach me at jane@example.com", fixture_resources()->matcher);
  EXPECT_EQ(r.text, "reach me at [EMAIL]");
  EXPECT_EQ(r.count, 1u);
}

TEST(Redact, AlreadyRedactedTextIsUnchanged) {
  const auto r = redact_pii("reach me at [EMAIL] or [PHONE], account [ACCOUNT], [NAME]", fixture_resources()->matcher);
  EXPECT_EQ(r.text, "reach me at [EMAIL] or [PHONE], account [ACCOUNT], [NAME]");
  EXPECT_EQ(r.count, 0u);
}

TEST(Redact, EveryKindHasItsPlaceholder) {
  const auto r = redact_pii("Maria Garcia, AC-123456, 555-201-7788, m@x.org", fixture_resources()->matcher);
  EXPECT_EQ(r.text, "[NAME], [ACCOUNT], [PHONE], [EMAIL]");
  EXPECT_EQ(r.count, 4u);
}

TEST(Redact, PlantedCorpusLeavesNothingBehind) {
  const auto r = testing::check_redaction(200, 17);
  EXPECT_TRUE(r.ok) << r.detail;
}

TEST(Bullets, EntityBulletUsesThePlaceholder) {
  TurnSalience t;
  t.new_entities.push_back(Entity{EntityKind::email, "jane@example.com", 3, 0, 16});
  t.newly_triggered.push_back("travel_plan");
  EXPECT_EQ(salient_bullet(t, {}, fixture_resources()->matcher), "Customer email: [EMAIL]");
}

TEST(Bullets, PriorityOrder) {
  const auto& m = fixture_resources()->matcher;
  TurnSalience t;
  t.sentiment_step = std::make_pair(0.0, 0.8);
  EXPECT_EQ(salient_bullet(t, {}, m), "Sentiment shift: improved to +0.80");
  AnswerRecord a;
  a.query_text = "What is the balance on account AC-730019?";
  a.route = Route::rag;
  t.delivered_answers.push_back(a);
  EXPECT_EQ(salient_bullet(t, {}, m), "Answered via RAG: What is the balance on account [ACCOUNT]?");
  t.newly_triggered.push_back("billing_correction");
  EXPECT_EQ(salient_bullet(t, {}, m), "Intent detected: billing_correction");
}

TEST(Bullets, SmallSentimentMovesAreNotSalient) {
  TurnSalience t;
  t.sentiment_step = std::make_pair(0.2, 0.6);
  EXPECT_FALSE(salient_bullet(t, {}, fixture_resources()->matcher));
  t.sentiment_step = std::make_pair(0.3, -0.2);
  EXPECT_EQ(salient_bullet(t, {}, fixture_resources()->matcher), "Sentiment shift: declined to -0.20");
}

TEST(Partial, NoSalienceLeavesBulletsAndAdvancesTheTurn) {
  PartialSummary p;
  p.bullets = {"a", "b"};
  p.as_of_turn = 2;
  const auto next = update_partial_summary(p, std::nullopt, 5);
  EXPECT_EQ(next.bullets, p.bullets);
  EXPECT_EQ(next.as_of_turn, 5);
}

TEST(Partial, BudgetKeepsTheMostRecent) {
  PartialSummary p;
  p.budget = 3;
  for (int i = 0; i < 6; ++i) p = update_partial_summary(p, "fact " + std::to_string(i), i);
  EXPECT_EQ(p.bullets, (std::vector<std::string>{"fact 3", "fact 4", "fact 5"}));
  p = update_partial_summary(p, std::string("fact 3"), 6);
  EXPECT_EQ(p.bullets, (std::vector<std::string>{"fact 4", "fact 5", "fact 3"}));
}

TEST(Partial, IncrementalEqualsRecomputationOverRandomScripts) {
  const auto r = testing::check_incremental_summary(60, 4711);
  EXPECT_TRUE(r.ok) << r.detail;
}

TEST(Partial, LongScriptKeepsTheTenMostRecentFacts) {
  // One fresh fact per turn: the summary is the last ten.
  const auto resources = fixture_resources();
  const Engine engine(resources);
  Session s = engine.open(SessionId("long"), 0);
  std::vector<std::string> facts;
  const std::vector<std::string> lines = {"I am really frustrated", "perfect, excellent help"};
  for (int t = 0; t < 50; ++t) {
    engine.process_event(s, testing::make_event("long", t, Speaker::customer, lines[static_cast<std::size_t>(t % 2)]));
  }
  const auto& bullets = s.state.partial_summary.bullets;
  EXPECT_LE(bullets.size(), 10u);
  testing::SummaryOracle oracle{10, 0.5, &resources->matcher};
  EXPECT_EQ(oracle.summaries(s.journal).at(49), bullets);
}

TEST(Final, TravelFixtureSummary) {
  const auto script = load_script(testing::fixture("scripts/travel_plan.ndjson"));
  const auto result = replay(script, fixture_resources(), ReplayMode::in_process, EngineOptions{false});
  const Json& last = result.journal.entries().back().payload;
  ASSERT_EQ(last.at("type"), "call.final_summary");
  const auto summary = last.at("payload").at("summary").get<FinalSummary>();
  EXPECT_EQ(summary.primary_intent, "travel_plan");
  EXPECT_EQ(summary.outcome, "converted");
  std::size_t customer_turns = 0;
  for (const auto& step : script.steps) {
    customer_turns += step.event && step.event->is_final && step.event->speaker == Speaker::customer;
  }
  EXPECT_EQ(summary.sentiment_trajectory.size(), customer_turns);
  EXPECT_EQ(summary.resolution_path.size(), 4u);
  EXPECT_EQ(testing::independent_pii_scan(summary.redacted_text), 0u);
  EXPECT_NE(summary.redacted_text.find("[EMAIL]"), std::string::npos);
  EXPECT_EQ(last.at("payload").at("text"), summary.redacted_text);
}

TEST(Final, NoIntentMeansUnknown) {
  SessionState s = create_session(SessionId("s1"), 0);
  s.ended = true;
  const auto f = final_summary(s, fixture_resources()->matcher);
  EXPECT_EQ(f.primary_intent, "unknown");
  EXPECT_TRUE(f.resolution_path.empty());
}

TEST(Final, PlantedAccountNumberIsRedacted) {
  SessionState s = create_session(SessionId("s1"), 0);
  s.profile.goal_phrases.push_back("I want to move AC-448812 to a cheaper plan");
  s.ended = true;
  const auto f = final_summary(s, fixture_resources()->matcher);
  EXPECT_NE(f.redacted_text.find("[ACCOUNT]"), std::string::npos);
  EXPECT_EQ(f.redacted_text.find("AC-448812"), std::string::npos);
  EXPECT_GE(f.redaction_count, 1u);
}

TEST(Final, OnlyAfterTheCallEnds) {
  const SessionState s = create_session(SessionId("s1"), 0);
  try {
    final_summary(s, fixture_resources()->matcher);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::state);
  }
}

TEST(Final, JsonRoundTrip) {
  FinalSummary f;
  f.session_id = "s1";
  f.primary_intent = "travel_plan";
  f.sentiment_trajectory = {{1, 0.5}, {3, -0.25}};
  f.outcome = "resolved";
  EXPECT_EQ(Json(f).get<FinalSummary>(), f);
}

}  // namespace
}  // namespace callassist
