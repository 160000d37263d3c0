#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "callassist/errors.hpp"
#include "callassist/governance.hpp"
#include "checks.hpp"

namespace callassist {
namespace {

using testing::fixture_resources;

constexpr std::int64_t kNow = 1767225600000;

AnswerRecord answered(const std::string& session, const std::string& text, std::int64_t at, Route route = Route::rag) {
  AnswerRecord a;
  a.query_id = session + "-q" + std::to_string(at);
  a.session_id = session;
  a.query_text = text;
  a.route = route;
  a.answer_text = "Answer given at " + std::to_string(at) + " with enough words to pass.";
  a.answered_at_ms = at;
  return a;
}

FaqCandidate candidate(const std::string& q, const std::string& a) {
  FaqCandidate c;
  c.candidate_id = "cand-x";
  c.question_text = q;
  c.answer_text = a;
  c.support_count = 3;
  return c;
}

ValidationReport validate(const FaqCandidate& c) {
  const auto& r = *fixture_resources();
  return validate_candidate(c, r.registry, r.matcher, r.tokenizer, r.config.governance, kNow);
}

TEST(Mining, ThreeCallsMakeOneCandidate) {
  const auto& r = *fixture_resources();
  const std::vector<AnswerRecord> log = {answered("a", "Which travel offers are available?", 1),
                                         answered("b", "which travel offers are available", 2),
                                         answered("c", "Which travel offers are available?", 3)};
  const auto out = mine_candidates({}, log, 3, r.tokenizer);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].support_count, 3);
  EXPECT_EQ(out[0].first_seen_ms, 1);
  EXPECT_EQ(out[0].last_seen_ms, 3);
  EXPECT_EQ(out[0].answer_text, log[2].answer_text);
  EXPECT_EQ(out[0].provenance, Provenance::mined_live);
}

TEST(Mining, BelowSupportMakesNothing) {
  const auto& r = *fixture_resources();
  const std::vector<AnswerRecord> log = {answered("a", "Which travel offers are available?", 1),
                                         answered("b", "Which travel offers are available?", 2)};
  EXPECT_TRUE(mine_candidates({}, log, 3, r.tokenizer).empty());
}

TEST(Mining, EqualsBruteForceGroupBy) {
  const auto& r = *fixture_resources();
  const std::vector<std::string> questions = {"Which travel offers are available?", "How do I get a refund?",
                                              "How to change my mobile plan?", "Why was I charged twice on my bill?",
                                              "Is roaming free in Europe?"};
  std::mt19937 rng(31);
  for (int round = 0; round < 100; ++round) {
    std::vector<AnswerRecord> log;
    std::vector<CallRecord> calls;
    const int n = static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      std::string q = testing::pick(rng, questions);
      if (rng() % 3 == 0) q = to_lower(q);
      if (rng() % 3 == 0 && q.back() == '?') q.pop_back();
      const std::string session = "s" + std::to_string(rng() % 10);
      AnswerRecord a = answered(session, q, static_cast<std::int64_t>(rng() % 100000),
                                rng() % 4 == 0 ? Route::faq : Route::rag);
      a.no_answer = rng() % 6 == 0;
      log.push_back(a);
    }
    for (int s = 0; s < 10; s += 3) calls.push_back(testing::call_record("s" + std::to_string(s), Cohort::assisted, 1));
    const std::int64_t min_support = 1 + static_cast<std::int64_t>(rng() % 4);

    // Oracle: group by lowercase alphanumeric words.
    std::map<std::string, std::vector<const AnswerRecord*>> groups;
    for (const auto& a : log) {
      if (a.route == Route::faq || a.no_answer) continue;
      std::istringstream in(a.query_text);
      std::string key, w;
      while (in >> w) {
        std::string clean;
        for (char c : w) {
          if (std::isalnum(static_cast<unsigned char>(c))) clean += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
        if (!clean.empty()) key += (key.empty() ? "" : " ") + clean;
      }
      groups[key].push_back(&a);
    }
    std::map<std::string, std::pair<std::int64_t, Provenance>> want;
    for (const auto& [key, recs] : groups) {
      if (static_cast<std::int64_t>(recs.size()) < min_support) continue;
      bool transcript = false;
      for (const auto* a : recs) {
        for (const auto& c : calls) transcript = transcript || c.session_id == a->session_id;
      }
      want[key] = {static_cast<std::int64_t>(recs.size()),
                   transcript ? Provenance::mined_transcript : Provenance::mined_live};
    }
    std::map<std::string, std::pair<std::int64_t, Provenance>> got;
    for (const auto& c : mine_candidates(calls, log, min_support, r.tokenizer)) {
      got[r.tokenizer.normalized(c.question_text)] = {c.support_count, c.provenance};
    }
    ASSERT_EQ(got, want) << "round " << round;
  }
}

TEST(Validation, ShippedQuestionIsAccepted) {
  const auto rep = validate(candidate("Which travel offers are available?",
                                      "Travel packs bundle data, calls and texts for use abroad at a fixed daily price."));
  EXPECT_EQ(rep.verdict, Verdict::accepted);
  EXPECT_TRUE(rep.failed_checks.empty());
  EXPECT_EQ(rep.kb_domain_tag, "travel");
}

TEST(Validation, SingleWordFailsQuestionForm) {
  const auto rep = validate(candidate("travel", "Travel packs bundle data, calls and texts for use abroad."));
  EXPECT_EQ(rep.verdict, Verdict::rejected);
  EXPECT_EQ(rep.failed_checks, std::vector<std::string>{"H1"});
}

TEST(Validation, RawEmailFailsIdentifierCheck) {
  const auto rep = validate(candidate("Which travel offers are available?", "Write to jane@example.com for the list."));
  EXPECT_EQ(rep.verdict, Verdict::rejected);
  EXPECT_NE(std::find(rep.failed_checks.begin(), rep.failed_checks.end(), "H3"), rep.failed_checks.end());
}

TEST(Validation, ShortAnswerAndUnknownDomain) {
  EXPECT_EQ(validate(candidate("Which travel offers are available?", "Call us.")).failed_checks,
            std::vector<std::string>{"H2"});
  EXPECT_EQ(validate(candidate("What time does the shop open?", "The shop opens at nine every weekday morning."))
                .failed_checks,
            std::vector<std::string>{"O1"});
}

TEST(Validation, ReportRoundTrip) {
  const auto rep = validate(candidate("travel", "x"));
  const Json j = rep;
  EXPECT_EQ(j.get<ValidationReport>(), rep);
}

TEST(Lifecycle, AcceptedCandidateBecomesValidatedEntry) {
  const auto& r = *fixture_resources();
  FaqCandidate c = candidate("Is roaming free in Europe for travel packs?",
                             "Travel packs include roaming in Europe at no extra daily charge.");
  const auto rep = validate(c);
  ASSERT_EQ(rep.verdict, Verdict::accepted);
  const auto before = r.faq->entries();
  const auto res = apply_lifecycle(before, std::vector<FaqCandidate>{c}, std::vector<ValidationReport>{rep}, kNow,
                                   1000, r.tokenizer);
  ASSERT_EQ(res.cache.size(), before.size() + 1);
  const auto& added = res.cache.back();
  EXPECT_EQ(added.status, FaqStatus::validated);
  EXPECT_EQ(added.expires_at_ms, kNow + 1000);
  EXPECT_EQ(added.version, 1);
  EXPECT_EQ(added.normalized_question, r.tokenizer.tokens(c.question_text));
  EXPECT_EQ(added.kb_domain_tag, "travel");
}

TEST(Lifecycle, ExpiredEntryIsNoLongerMatched) {
  const auto& r = *fixture_resources();
  const auto res = apply_lifecycle(r.faq->entries(), {}, {}, kNow, 1000, r.tokenizer);
  SuggestedQuery q;
  q.text = "How do I activate international roaming?";
  q.kb_domain_tag = "travel";
  EXPECT_FALSE(match_faq(q, res.cache, 0.8, r.tokenizer));
  ASSERT_EQ(res.changes.size(), 1u);
  EXPECT_EQ(res.changes[0].at("op"), "expire");
}

TEST(Lifecycle, RevalidationAfterExpiryBumpsTheVersion) {
  const auto& r = *fixture_resources();
  FaqCandidate c = candidate("How to activate a travel plan?",
                             "Pick a travel pack in the app and confirm it on your account before you leave.");
  const auto rep = validate(c);
  const auto res = apply_lifecycle(r.faq->entries(), std::vector<FaqCandidate>{c}, std::vector<ValidationReport>{rep},
                                   kNow, 1000, r.tokenizer);
  EXPECT_EQ(res.cache.back().version, 2);
  EXPECT_EQ(res.cache.back().question, "How to activate a travel plan?");
}

TEST(Lifecycle, MatchesTheGoldenFile) {
  const auto r = testing::check_governance();
  EXPECT_TRUE(r.ok) << r.detail;
}

TEST(Lifecycle, ChangeLogAppends) {
  testing::TempDir dir;
  const std::vector<Json> changes = {Json{{"op", "expire"}, {"entry_id", "faq-0002"}}};
  append_change_log(dir.path() / "changes.ndjson", changes);
  append_change_log(dir.path() / "changes.ndjson", changes);
  EXPECT_EQ(load_ndjson_file(dir.path() / "changes.ndjson").size(), 2u);
}

}  // namespace
}  // namespace callassist
