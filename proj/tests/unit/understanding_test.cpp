#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "callassist/errors.hpp"
#include "callassist/summarization.hpp"
#include "callassist/understanding.hpp"
#include "support.hpp"

namespace callassist {
namespace {

using testing::fixture_resources;
using testing::make_event;

std::vector<Entity> entities_of(const std::string& text) {
  const auto& r = *fixture_resources();
  auto ev = make_event("s1", 0, Speaker::customer, text);
  ev.display_text = text;
  return extract_entities(ev, r.matcher);
}

TEST(Entities, Email) {
  const auto found = entities_of("my email is jane@example.com");
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].kind, EntityKind::email);
  EXPECT_EQ(found[0].value, "jane@example.com");
}

TEST(Entities, AccountNumber) {
  const auto found = entities_of("account number is AC-448812");
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].kind, EntityKind::account_number);
  EXPECT_EQ(found[0].value, "AC-448812");
}

TEST(Entities, NamesComeFromTheGazetteerOnly) {
  const auto found = entities_of("this is Rahul Sharma and my friend Bob Stone");
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].kind, EntityKind::name);
  EXPECT_EQ(found[0].value, "Rahul Sharma");
}

TEST(Entities, SpansPointIntoTheText) {
  const std::string text = "call 555-201-7788 or write to li@isp.net";
  for (const auto& e : entities_of(text)) EXPECT_EQ(text.substr(e.span_begin, e.span_end - e.span_begin), e.value);
}

TEST(Entities, TwoHundredPlantedIdentifiersAreAllFound) {
  const auto& r = *fixture_resources();
  const auto corpus = testing::plant_identifiers(200, r.matcher.patterns().gazetteer, 4242);
  std::size_t found_total = 0;
  for (std::size_t i = 0; i < corpus.lines.size(); ++i) {
    const auto found = entities_of(corpus.lines[i]);
    ASSERT_EQ(found.size(), 1u) << corpus.lines[i];
    EXPECT_EQ(found[0].kind, corpus.planted[i].first) << corpus.lines[i];
    EXPECT_EQ(found[0].value, corpus.planted[i].second) << corpus.lines[i];
    found_total += found.size();
  }
  EXPECT_EQ(found_total, 200u);
}

TEST(Entities, MergeKeepsFirstOccurrence) {
  SessionState s = create_session(SessionId("s1"), 0);
  const Entity a{EntityKind::email, "a@b.com", 1, 0, 7};
  const Entity again{EntityKind::email, "a@b.com", 3, 0, 7};
  EXPECT_EQ(merge_entities(s, std::vector<Entity>{a}).size(), 1u);
  EXPECT_TRUE(merge_entities(s, std::vector<Entity>{again}).empty());
  EXPECT_EQ(s.entities[EntityKind::email].front().turn_index, 1);
}

TEST(NoisyOr, TwoHalves) {
  const std::vector<CueHit> hits = {{"a", 0, 0.5}, {"b", 0, 0.5}};
  EXPECT_DOUBLE_EQ(noisy_or(hits), 0.75);
}

TEST(NoisyOr, WeightOneAbsorbs) {
  const std::vector<CueHit> hits = {{"a", 0, 0.2}, {"b", 0, 1.0}, {"c", 0, 0.4}};
  EXPECT_DOUBLE_EQ(noisy_or(hits), 1.0);
}

TEST(NoisyOr, OrderIndependent) {
  std::mt19937 rng(11);
  for (int round = 0; round < 200; ++round) {
    std::vector<CueHit> hits;
    const int n = 1 + static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) hits.push_back({"c" + std::to_string(i), 0, (rng() % 1000) / 1000.0});
    const double expected = noisy_or(hits);
    for (int p = 0; p < 10; ++p) {
      std::shuffle(hits.begin(), hits.end(), rng);
      ASSERT_EQ(noisy_or(hits), expected);
    }
  }
}

TEST(Intents, TravelUtteranceTriggers) {
  const auto& r = *fixture_resources();
  SessionState s = create_session(SessionId("s1"), 0);
  auto ev = make_event("s1", 0, Speaker::customer, "I want to get a travel plan for roaming");
  ev.display_text = ev.raw_text;
  const auto up = update_intents(s, ev, r.registry, r.tokenizer);
  ASSERT_EQ(up.newly_triggered, std::vector<std::string>{"travel_plan"});
  // 1 - (1-.6)(1-.3)(1-.5)
  EXPECT_NEAR(s.intents["travel_plan"].confidence, 0.86, 1e-12);
  EXPECT_EQ(top_intent(s), "travel_plan");
}

TEST(Sentiment, NoTermIsNeutral) {
  const auto& r = *fixture_resources();
  EXPECT_EQ(r.lexicon.polarity(r.tokenizer.tokens("what time is it")), 0.0);
}

TEST(Sentiment, NeutralMeanIsHalf) { EXPECT_DOUBLE_EQ(csat_likelihood(0.0, 2.0), 0.5); }

TEST(Sentiment, LongestTermWins) {
  const auto& r = *fixture_resources();
  EXPECT_DOUBLE_EQ(r.lexicon.polarity(r.tokenizer.tokens("I am not happy")), -0.7);
}

TEST(Sentiment, PositiveTurnRaisesCsat) {
  // Appending a +1 turn raises the mean unless it is already +1; in that
  // saturated case csat stays put, so those trajectories are excluded.
  const auto& r = *fixture_resources();
  PolarityLexicon lex;
  lex.add("superb", 1.0, r.tokenizer);
  lex.add("meh", -0.25, r.tokenizer);
  lex.add("ok", 0.25, r.tokenizer);
  lex.add("awful", -1.0, r.tokenizer);
  const std::vector<std::string> lines = {"superb", "meh", "ok", "awful", "nothing", "meh ok", "awful awful"};
  std::mt19937 rng(5);
  int checked = 0;
  for (int round = 0; round < 500; ++round) {
    SessionState s = create_session(SessionId("s1"), 0);
    const int n = static_cast<int>(rng() % 10);
    double csat_before = 0.5;
    for (int t = 0; t < n; ++t) {
      auto ev = make_event("s1", t, Speaker::customer, testing::pick(rng, lines));
      ev.display_text = ev.raw_text;
      csat_before = update_sentiment(s, ev, lex, r.tokenizer, r.config.sentiment).csat_likelihood;
    }
    bool saturated = n > 0;
    for (const auto& sample : s.sentiment_trajectory) saturated = saturated && sample.polarity >= 1.0;
    if (saturated) continue;
    auto ev = make_event("s1", n, Speaker::customer, "superb");
    ev.display_text = ev.raw_text;
    const double after = update_sentiment(s, ev, lex, r.tokenizer, r.config.sentiment).csat_likelihood;
    ASSERT_GT(after, csat_before) << "trajectory length " << n;
    ++checked;
  }
  EXPECT_GT(checked, 400);
}

TEST(Sentiment, NpsBands) {
  const SentimentConfig c;
  EXPECT_EQ(nps_band(0.39, c), NpsBand::detractor);
  EXPECT_EQ(nps_band(0.4, c), NpsBand::passive);
  EXPECT_EQ(nps_band(0.7, c), NpsBand::promoter);
}

TEST(Profile, InterestAndHesitation) {
  const auto& r = *fixture_resources();
  SessionState s = create_session(SessionId("s1"), 0);
  auto ev = make_event("s1", 0, Speaker::customer, "that sounds great");
  ev.display_text = ev.raw_text;
  update_profile(s, ev, r.profile_cues, r.tokenizer);
  EXPECT_EQ(s.profile.interest_hits, 1);
  ev.display_text = "I'm not sure";
  update_profile(s, ev, r.profile_cues, r.tokenizer);
  EXPECT_EQ(s.profile.hesitation_hits, 1);
}

// Hand count: for each customer line, scan left to right taking the longest
// cue phrase at each word position.
std::pair<int, int> count_cues(const std::vector<std::string>& lines, const Json& cues) {
  // Words are whitespace-separated with everything but letters and digits dropped.
  auto words_of = [](const std::string& text) {
    std::vector<std::string> w;
    std::istringstream in(text);
    std::string raw;
    while (in >> raw) {
      std::string cur;
      for (char ch : raw) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) cur += static_cast<char>(std::tolower(c));
      }
      if (!cur.empty()) w.push_back(cur);
    }
    return w;
  };
  std::vector<std::pair<std::vector<std::string>, bool>> phrases;  // words, is_interest
  for (const auto& p : cues.at("interest")) phrases.emplace_back(words_of(p.get<std::string>()), true);
  for (const auto& p : cues.at("hesitation")) phrases.emplace_back(words_of(p.get<std::string>()), false);
  int interest = 0, hesitation = 0;
  for (const auto& line : lines) {
    const auto w = words_of(line);
    std::size_t i = 0;
    while (i < w.size()) {
      std::size_t best = 0;
      bool best_interest = false;
      for (const auto& [p, is_interest] : phrases) {
        if (p.size() > best && i + p.size() <= w.size() && std::equal(p.begin(), p.end(), w.begin() + i)) {
          best = p.size();
          best_interest = is_interest;
        }
      }
      if (best == 0) {
        ++i;
        continue;
      }
      (best_interest ? interest : hesitation)++;
      i += best;
    }
  }
  return {interest, hesitation};
}

TEST(Profile, CountersMatchHandCountOverScripts) {
  const auto& r = *fixture_resources();
  const Json cues = load_json_file(testing::fixture("profile_cues.json"));
  for (const auto& script : load_script_directory(testing::fixture("scripts"))) {
    SessionState s = create_session(SessionId(script.session_id()), 0);
    std::vector<std::string> lines;
    for (const auto& step : script.steps) {
      if (!step.event || step.event->speaker != Speaker::customer || !step.event->is_final) continue;
      auto ev = normalize_display_text(*step.event, r.transliteration).event;
      lines.push_back(ev.display_text);
      update_profile(s, ev, r.profile_cues, r.tokenizer);
    }
    const auto [interest, hesitation] = count_cues(lines, cues);
    EXPECT_EQ(s.profile.interest_hits, interest) << script.name;
    EXPECT_EQ(s.profile.hesitation_hits, hesitation) << script.name;
  }
}

TEST(Profile, GoalPhrasesAreCaptured) {
  const auto& r = *fixture_resources();
  SessionState s = create_session(SessionId("s1"), 0);
  auto ev = make_event("s1", 0, Speaker::customer, "Hi. I want to get a travel plan. Thanks");
  ev.display_text = ev.raw_text;
  update_profile(s, ev, r.profile_cues, r.tokenizer);
  ASSERT_EQ(s.profile.goal_phrases.size(), 1u);
  EXPECT_EQ(s.profile.goal_phrases[0], "I want to get a travel plan");
}

TEST(Tokenizer, ProtectedPatternsKeepPunctuation) {
  const auto& r = *fixture_resources();
  EXPECT_EQ(r.tokenizer.tokens("Mail JANE@Example.com, ref AC-448812!"),
            (Tokens{"mail", "jane@example.com", "ref", "ac-448812"}));
  EXPECT_EQ(r.tokenizer.normalized("How do I activate, travel-plan?"), "how do i activate travelplan");
}

}  // namespace
}  // namespace callassist
