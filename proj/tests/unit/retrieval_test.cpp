#include <gtest/gtest.h>

#include <random>

#include "callassist/errors.hpp"
#include "callassist/retrieval.hpp"
#include "checks.hpp"

namespace callassist {
namespace {

using testing::fixture_resources;
using testing::make_event;

std::vector<std::string> suggest(SessionState& s, const std::string& text, std::int64_t turn = 0) {
  const auto& r = *fixture_resources();
  auto ev = make_event(s.session_id.value(), turn, Speaker::customer, text);
  ev.display_text = text;
  merge_entities(s, extract_entities(ev, r.matcher));
  update_intents(s, ev, r.registry, r.tokenizer);
  std::vector<std::string> out;
  for (const auto& q : generate_queries(s, ev, r.registry, r.tokenizer, r.config.suggestion_floor)) {
    out.push_back(q.text);
  }
  return out;
}

TEST(Queries, TravelUtteranceGivesTheTwoTravelQuestions) {
  SessionState s = create_session(SessionId("s1"), 0);
  const auto got = suggest(s, "I want to get a travel plan");
  EXPECT_EQ(std::set<std::string>(got.begin(), got.end()),
            (std::set<std::string>{"Which travel offers are available?", "How to activate a travel plan?"}));
  EXPECT_EQ(s.suggestions.front().query_id, "s1-q1");
  EXPECT_EQ(s.suggestions.front().kb_domain_tag, "travel");
}

TEST(Queries, RepeatedUtteranceAddsNothing) {
  SessionState s = create_session(SessionId("s1"), 0);
  suggest(s, "I want to get a travel plan", 0);
  EXPECT_TRUE(suggest(s, "I want to get a travel plan", 1).empty());
  EXPECT_EQ(s.suggestions.size(), 2u);
}

TEST(Queries, BelowTheFloorGivesNothing) {
  SessionState s = create_session(SessionId("s1"), 0);
  EXPECT_TRUE(suggest(s, "what a lovely morning").empty());
  EXPECT_TRUE(suggest(s, "something about a trip", 1).empty());  // 0.3 < 0.4
}

TEST(Queries, UnfillableSlotIsSkippedAndCounted) {
  SessionState s = create_session(SessionId("s1"), 0);
  const auto got = suggest(s, "I was charged twice on my bill");
  EXPECT_EQ(got.size(), 2u);
  EXPECT_EQ(s.metrics.skipped_templates, 1);
  // Once the account number is known the third template fills in.
  const auto later = suggest(s, "my account is AC-730019 and the bill is wrong", 1);
  EXPECT_EQ(later, std::vector<std::string>{"What is the balance on account AC-730019?"});
}

TEST(Jaccard, SpecExample) {
  const auto& r = *fixture_resources();
  const auto a = r.tokenizer.tokens("how to activate a travel plan");
  const auto b = r.tokenizer.tokens("how do i activate travel plan");
  EXPECT_DOUBLE_EQ(jaccard({a.begin(), a.end()}, {b.begin(), b.end()}), 0.5);
  EXPECT_DOUBLE_EQ(testing::oracle_jaccard(testing::oracle_token_set("how to activate a travel plan"),
                                           testing::oracle_token_set("how do i activate travel plan")),
                   4.0 / 8.0);
}

TEST(MatchFaq, PunctuationAndCaseDoNotMatter) {
  const auto& r = *fixture_resources();
  SuggestedQuery q;
  q.text = "WHICH travel offers, are available";
  q.kb_domain_tag = "travel";
  const auto m = match_faq(q, r.faq->entries(), 0.8, r.tokenizer);
  ASSERT_TRUE(m);
  EXPECT_EQ(m->entry.entry_id, "faq-0001");
  EXPECT_DOUBLE_EQ(m->similarity, 1.0);
}

TEST(MatchFaq, OtherTagsAndNonValidatedEntriesAreIgnored) {
  const auto& r = *fixture_resources();
  SuggestedQuery q;
  q.text = "Which travel offers are available?";
  q.kb_domain_tag = "billing";
  EXPECT_FALSE(match_faq(q, r.faq->entries(), 0.8, r.tokenizer));
  q.text = "roaming charges question";
  q.kb_domain_tag = "travel";
  EXPECT_FALSE(match_faq(q, r.faq->entries(), 0.8, r.tokenizer));  // candidate only
}

TEST(MatchFaq, ExpiryGateAppliesBeforeTheLifecycleRuns) {
  const auto& r = *fixture_resources();
  SuggestedQuery q;
  q.text = "How do I activate international roaming?";
  q.kb_domain_tag = "travel";
  EXPECT_TRUE(match_faq(q, r.faq->entries(), 0.8, r.tokenizer, 1750000000000));
  EXPECT_FALSE(match_faq(q, r.faq->entries(), 0.8, r.tokenizer, 1770000000000));
}

TEST(MatchFaq, EqualsBruteForceOnHundredEntryCaches) {
  for (std::uint32_t seed : {1u, 2u, 3u}) {
    const auto r = testing::check_faq_oracle(500, seed);
    EXPECT_TRUE(r.ok) << r.detail;
  }
}

TEST(FaqStore, ShippedNormalizedQuestionsMatchTheTokenizer) {
  const auto& r = *fixture_resources();
  for (const auto& e : r.faq->entries()) EXPECT_EQ(e.normalized_question, r.tokenizer.tokens(e.question)) << e.entry_id;
}

TEST(FaqStore, HitsAreCountedAndSnapshotsAreStable) {
  FaqStore store(load_faq_entries(testing::fixture("faq/faq.ndjson")));
  const auto before = store.snapshot();
  store.record_hit("faq-0001");
  store.record_hit("faq-0001");
  const auto entries = store.entries();
  EXPECT_EQ(std::find_if(entries.begin(), entries.end(), [](const FaqEntry& e) { return e.entry_id == "faq-0001"; })
                ->hit_count,
            before->front().hit_count + 2);
  store.replace({});
  EXPECT_FALSE(before->empty());  // old readers keep their snapshot
  EXPECT_TRUE(store.snapshot()->empty());
}

TEST(FaqStore, SaveLoadRoundTrip) {
  testing::TempDir dir;
  const auto entries = load_faq_entries(testing::fixture("faq/faq.ndjson"));
  save_faq_entries(dir.path() / "faq.ndjson", entries);
  EXPECT_EQ(load_faq_entries(dir.path() / "faq.ndjson"), entries);
}

KbIndex small_index(const std::vector<KbDocument>& docs) { return KbIndex::build(docs, fixture_resources()->tokenizer); }

TEST(Bm25, DocumentWithAllTermsRanksFirst) {
  const auto index = small_index({{"none", {}, "Nothing relevant lives here at all."},
                                  {"all", {}, "Travel roaming packs for Europe."},
                                  {"some", {}, "Roaming only."}});
  const auto terms = index.query_terms("travel roaming europe");
  const auto top = index.top_k(terms, "", 3);
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(top[0].doc_id, "all");
  EXPECT_EQ(top[1].doc_id, "some");
}

TEST(Bm25, EqualsExhaustiveScoring) {
  const std::vector<std::string> vocab = {"travel", "roaming", "pack", "europe", "bill", "refund", "charge", "plan",
                                          "data", "upgrade", "the", "a", "to", "is", "for", "settings"};
  const std::vector<std::string> tags = {"travel", "billing", "plans"};
  const auto& stop = KbIndex::stopwords();
  std::mt19937 rng(123);
  for (int round = 0; round < 40; ++round) {
    std::vector<KbDocument> docs;
    testing::Bm25Oracle oracle;
    const int n = 1 + static_cast<int>(rng() % 50);
    for (int d = 0; d < n; ++d) {
      KbDocument doc;
      char id[16];
      std::snprintf(id, sizeof id, "doc%02d", d);
      doc.doc_id = id;
      doc.tags = {testing::pick(rng, tags)};
      testing::Bm25Oracle::Doc od{doc.doc_id, doc.tags, {}};
      const int len = 1 + static_cast<int>(rng() % 30);
      for (int k = 0; k < len; ++k) {
        const std::string w = testing::pick(rng, vocab);
        doc.text += (k ? " " : "") + w;
        if (!stop.count(w)) od.terms.push_back(w);
      }
      doc.text += ".";
      docs.push_back(doc);
      oracle.docs.push_back(od);
    }
    const auto index = small_index(docs);
    for (int qn = 0; qn < 10; ++qn) {
      std::vector<std::string> query;
      for (int k = 0; k < 1 + static_cast<int>(rng() % 4); ++k) {
        const std::string w = testing::pick(rng, vocab);
        if (!stop.count(w) && std::find(query.begin(), query.end(), w) == query.end()) query.push_back(w);
      }
      const std::string tag = rng() % 2 ? testing::pick(rng, tags) : "";
      const auto want = oracle.rank(query, tag);
      const auto got = index.top_k(query, tag, docs.size());
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        ASSERT_EQ(got[i].doc_id, want[i].first) << "round " << round << " rank " << i;
        ASSERT_NEAR(got[i].score, want[i].second, 1e-9);
      }
    }
  }
}

TEST(Bm25, StatisticsAreConsistent) {
  // Document frequencies and the average length re-derived from the per-document term counts.
  const auto& r = *fixture_resources();
  const Json stats = r.kb.statistics();
  EXPECT_EQ(stats.at("n").get<std::size_t>(), r.kb.size());
  EXPECT_EQ(r.kb.size(), 7u);
  std::map<std::string, std::size_t> df;
  double total = 0;
  for (const auto& d : stats.at("documents")) {
    std::size_t length = 0;
    for (auto it = d.at("tf").begin(); it != d.at("tf").end(); ++it) {
      ++df[it.key()];
      length += it->get<std::size_t>();
      EXPECT_FALSE(KbIndex::stopwords().count(it.key()));
    }
    EXPECT_EQ(d.at("length").get<std::size_t>(), length);
    EXPECT_FALSE(d.at("tags").empty()) << d.at("doc_id");
    total += static_cast<double>(length);
  }
  const auto got_df = stats.at("df").get<std::map<std::string, std::size_t>>();
  EXPECT_EQ(got_df, df);
  EXPECT_NEAR(r.kb.average_length(), total / static_cast<double>(r.kb.size()), 1e-12);
}

TEST(Rag, NoMatchingTermGivesNoAnswer) {
  const auto& r = *fixture_resources();
  SuggestedQuery q;
  q.text = "xyzzy plugh?";
  q.kb_domain_tag = "travel";
  const auto res = retrieve_rag(q, r.kb, 3);
  EXPECT_TRUE(res.no_answer);
  EXPECT_TRUE(res.passages.empty());
  EXPECT_EQ(res.answer_text, kNoAnswerText);
}

TEST(Rag, AnswerIsStitchedFromKnowledgeBaseSentences) {
  const auto& r = *fixture_resources();
  SuggestedQuery q;
  q.text = "How do I get a refund for a wrong charge?";
  q.kb_domain_tag = "billing";
  const auto res = retrieve_rag(q, r.kb, 3);
  ASSERT_FALSE(res.no_answer);
  ASSERT_FALSE(res.passages.empty());
  EXPECT_LE(res.passages.size(), 3u);
  const auto terms = r.kb.query_terms(q.text);
  std::vector<std::string> sentences;
  for (const auto& p : res.passages) {
    const std::string sentence = r.kb.best_sentence(p.doc_id, terms);
    // Extracted verbatim, never generated.
    EXPECT_NE(read_text_file(testing::fixture("kb") / p.doc_id).find(sentence), std::string::npos) << sentence;
    if (std::find(sentences.begin(), sentences.end(), sentence) == sentences.end()) sentences.push_back(sentence);
  }
  EXPECT_EQ(res.answer_text, join(sentences, " "));
}

TEST(Route, WarmCacheTakesTheFaqPath) {
  const auto& r = *fixture_resources();
  SuggestedQuery q;
  q.query_id = "s1-q1";
  q.text = "Which travel offers are available?";
  q.kb_domain_tag = "travel";
  const auto a = route(q, r.faq->entries(), r.kb, r.config.route, r.tokenizer, 1000);
  EXPECT_EQ(a.route, Route::faq);
  EXPECT_EQ(a.simulated_latency_ms, r.config.route.faq_latency_ms);
  EXPECT_EQ(a.simulated_latency_ms, 300);
  EXPECT_EQ(a.llm_calls_avoided, 1);
  EXPECT_EQ(a.matched_entry_id, "faq-0001");
}

TEST(Route, EmptyCacheFallsBackToRagWithinBudget) {
  const auto& r = *fixture_resources();
  SuggestedQuery q;
  q.text = "Which travel offers are available?";
  q.kb_domain_tag = "travel";
  const auto a = route(q, {}, r.kb, r.config.route, r.tokenizer, 1000);
  EXPECT_EQ(a.route, Route::rag);
  EXPECT_GE(a.simulated_latency_ms, 5000);
  EXPECT_LE(a.simulated_latency_ms, 9000);
  EXPECT_EQ(a.llm_calls_avoided, 0);
}

TEST(Route, BudgetsHoldOverRandomizedQueries) {
  const auto r = testing::check_route_budgets();
  EXPECT_TRUE(r.ok) << r.detail;
}

TEST(Route, SlowFaqBudgetIsAConfigError) {
  RouteConfig c;
  c.faq_latency_ms = 500;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Accounting, SevenThousandHitsOfTenThousand) {
  const auto log = testing::synthetic_answer_log(10000, 7000);
  const auto s = account_latency(log, 6.0);
  EXPECT_EQ(s.routed, 10000);
  EXPECT_EQ(s.hits, 7000);
  EXPECT_EQ(s.avoided_calls, 7000);
  EXPECT_DOUBLE_EQ(s.latency_saved_hours, 11.7);
  EXPECT_DOUBLE_EQ(s.hit_rate, 0.7);
}

TEST(Accounting, ZeroAndExactCases) {
  EXPECT_DOUBLE_EQ(account_latency(testing::synthetic_answer_log(50, 0), 6.0).latency_saved_hours, 0.0);
  EXPECT_DOUBLE_EQ(account_latency(testing::synthetic_answer_log(1800, 1800), 2.0).latency_saved_hours, 1.0);
  EXPECT_DOUBLE_EQ(account_latency({}, 6.0).hit_rate, 0.0);
}

}  // namespace
}  // namespace callassist
