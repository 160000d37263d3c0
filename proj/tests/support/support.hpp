#pragma once

// Helpers shared by the unit tests and the acceptance binary: fixture
// locations, random generators and the brute-force oracles the engine is
// checked against. Oracles deliberately avoid the engine's own helpers.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "callassist/orchestrator.hpp"
#include "callassist/simulator.hpp"

#ifndef CALLASSIST_FIXTURES_DIR
#error "CALLASSIST_FIXTURES_DIR must point at the shipped fixtures"
#endif

namespace callassist::testing {

inline std::filesystem::path fixtures_dir() { return CALLASSIST_FIXTURES_DIR; }
inline std::filesystem::path fixture(const std::string& rel) { return fixtures_dir() / rel; }

inline std::shared_ptr<const Resources> fixture_resources() {
  static const std::shared_ptr<const Resources> resources =
      Resources::load(EngineConfig::load(fixture("config.json")));
  return resources;
}

/// Fresh resources, for tests that mutate the FAQ store or the config.
inline std::shared_ptr<Resources> load_resources(const std::function<void(EngineConfig&)>& tweak = {}) {
  EngineConfig config = EngineConfig::load(fixture("config.json"));
  if (tweak) tweak(config);
  return Resources::load(config);
}

/// A directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "callassist") {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

inline TranscriptEvent make_event(const std::string& session_id, std::int64_t turn, Speaker speaker,
                                  const std::string& text, Lang lang = Lang::en, bool is_final = true) {
  TranscriptEvent e;
  e.session_id = session_id;
  e.turn_index = turn;
  e.speaker = speaker;
  e.raw_text = text;
  e.lang = lang;
  e.t_start_ms = turn * 4000;
  e.t_end_ms = turn * 4000 + 3000;
  e.is_final = is_final;
  return e;
}

inline AgentAction click(const std::string& session_id, const std::string& query_id, std::int64_t t_ms) {
  AgentAction a;
  a.session_id = session_id;
  a.kind = AgentAction::Kind::click_query;
  a.query_id = query_id;
  a.t_ms = t_ms;
  return a;
}

inline AgentAction complete(const std::string& session_id, const std::string& workflow_id, const std::string& step_id,
                            std::int64_t t_ms, std::optional<std::string> outcome = std::nullopt) {
  AgentAction a;
  a.session_id = session_id;
  a.kind = AgentAction::Kind::complete_step;
  a.workflow_id = workflow_id;
  a.step_id = step_id;
  a.outcome = std::move(outcome);
  a.t_ms = t_ms;
  return a;
}

inline AgentAction end_call(const std::string& session_id, std::int64_t t_ms) {
  AgentAction a;
  a.session_id = session_id;
  a.kind = AgentAction::Kind::end_call;
  a.t_ms = t_ms;
  return a;
}

template <class T>
const T& pick(std::mt19937& rng, const std::vector<T>& items) {
  return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)];
}

inline std::vector<std::string> output_types(const Journal& journal) {
  std::vector<std::string> out;
  for (const auto& e : journal.entries()) {
    if (e.kind == JournalKind::assist_output) out.push_back(e.payload.at("type").get<std::string>());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Token-set similarity oracle: plain lowercase alphanumeric words.

inline std::set<std::string> oracle_token_set(const std::string& text) {
  std::set<std::string> out;
  std::string cur;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.insert(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.insert(cur);
  return out;
}

inline double oracle_jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& t : a) inter += b.count(t);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

// ---------------------------------------------------------------------------
// PII planting: a corpus whose identifiers are known by construction.

struct PlantedCorpus {
  std::vector<std::string> lines;
  std::vector<std::pair<EntityKind, std::string>> planted;  // in line order
};

inline std::string random_email(std::mt19937& rng) {
  static const std::vector<std::string> users = {"jane", "r.sharma", "maria_g", "ops+billing", "li.wei"};
  static const std::vector<std::string> hosts = {"example.com", "mail.example.org", "corp.co.uk", "isp.net"};
  return pick(rng, users) + std::to_string(rng() % 1000) + "@" + pick(rng, hosts);
}

inline std::string random_phone(std::mt19937& rng) {
  auto digits = [&](int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += static_cast<char>('0' + rng() % 10);
    return s;
  };
  switch (rng() % 3) {
    case 0:
      return digits(3) + "-" + digits(3) + "-" + digits(4);
    case 1:
      return "(" + digits(3) + ") " + digits(3) + "-" + digits(4);
    default:
      return "+1 " + digits(3) + " " + digits(3) + " " + digits(4);
  }
}

inline std::string random_account(std::mt19937& rng) {
  std::string s = "AC-";
  for (int i = 0; i < 6; ++i) s += static_cast<char>('0' + rng() % 10);
  return s;
}

/// Builds `count` lines, each planting one identifier inside filler text.
inline PlantedCorpus plant_identifiers(std::size_t count, const std::vector<std::string>& names, std::uint32_t seed) {
  static const std::vector<std::string> prefixes = {"please note", "my details:", "you can use", "it is",
                                                    "for the record", "write down"};
  static const std::vector<std::string> suffixes = {"thanks.", "if needed.", "for the booking", "", "ok?"};
  std::mt19937 rng(seed);
  PlantedCorpus corpus;
  for (std::size_t i = 0; i < count; ++i) {
    EntityKind kind = static_cast<EntityKind>(i % 4);
    std::string value;
    switch (kind) {
      case EntityKind::email:
        value = random_email(rng);
        break;
      case EntityKind::phone:
        value = random_phone(rng);
        break;
      case EntityKind::account_number:
        value = random_account(rng);
        break;
      case EntityKind::name:
        value = pick(rng, names);
        break;
    }
    corpus.lines.push_back(pick(rng, prefixes) + " " + value + " " + pick(rng, suffixes));
    corpus.planted.emplace_back(kind, value);
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Random conversation scripts over the shipped fixture vocabulary.

inline std::vector<ScriptStep> random_call(const std::string& session_id, std::size_t turns, std::mt19937& rng) {
  static const std::vector<std::string> customer_lines = {
      "I want to get a travel plan",
      "I am travelling abroad next week, do you have roaming packs?",
      "I was charged twice on my bill",
      "there is a wrong charge and I want a refund",
      "I would like to change my plan to a cheaper plan",
      "can I upgrade for more data?",
      "that sounds great, thank you",
      "I am really frustrated and angry about this",
      "this is terrible, I am not happy",
      "perfect, excellent help",
      "my email is jane@example.com",
      "my account number is AC-448812",
      "call me on 555-201-7788",
      "this is Maria Garcia speaking",
      "hmm okay",
      "I'm not sure, maybe later",
      "I need to sort out my international trip",
  };
  static const std::vector<std::string> agent_lines = {
      "Hello, how can I help you today?", "Let me check that for you.", "Could you confirm your account number?",
      "Thanks for waiting.", "Is there anything else?", "I can send it to jane@example.com if you like."};
  std::vector<ScriptStep> steps;
  std::int64_t t = 0;
  for (std::size_t turn = 0; turn < turns; ++turn) {
    const bool customer = rng() % 3 != 0;
    ScriptStep step;
    TranscriptEvent ev = make_event(session_id, static_cast<std::int64_t>(turn),
                                    customer ? Speaker::customer : Speaker::agent,
                                    customer ? pick(rng, customer_lines) : pick(rng, agent_lines));
    ev.t_start_ms = t;
    ev.t_end_ms = t + 2000;
    t += 2500;
    step.event = ev;
    steps.push_back(step);
    // Occasionally click one of the first few suggestions (ids may not exist
    // yet, which exercises the error path too).
    if (rng() % 3 == 0) {
      ScriptStep a;
      a.action = click(session_id, session_id + "-q" + std::to_string(1 + rng() % 4), t);
      t += 100;
      steps.push_back(a);
    }
  }
  return steps;
}

// ---------------------------------------------------------------------------
// Summary oracle: recompute the partial summary from the journal alone.

struct SummaryOracle {
  std::size_t budget = 10;
  double sentiment_delta = 0.5;
  const EntityMatcher* matcher = nullptr;

  static std::string redact(const std::string& text, const EntityMatcher& matcher) {
    // Independent single-pass replacement, right to left over the matches.
    std::string out = text;
    for (int pass = 0; pass < 8; ++pass) {
      const auto matches = matcher.find_all(out);
      if (matches.empty()) break;
      for (auto it = matches.rbegin(); it != matches.rend(); ++it) {
        out.replace(it->begin, it->end - it->begin, std::string(placeholder(it->kind)));
      }
    }
    return out;
  }

  static std::string kind_label(const std::string& kind) {
    std::string s = kind;
    std::replace(s.begin(), s.end(), '_', ' ');
    return s;
  }

  static std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s = buf;
    if (s == "-0.00") s = "0.00";
    return s;
  }

  /// Bullets of the summary after every final turn of the journal, from
  /// scratch: the salient fact of each turn, then the most recent `budget`
  /// distinct facts in order of last mention.
  std::map<std::int64_t, std::vector<std::string>> summaries(const Journal& journal) const {
    std::vector<std::string> history;
    std::map<std::int64_t, std::vector<std::string>> out;
    std::vector<Json> pending_answers;  // first deliveries since the last customer turn
    std::set<std::string> delivered;     // a repeated click re-sends, it does not answer anew
    std::optional<double> last_polarity;
    auto deliver = [&](const Json& answer) {
      if (delivered.insert(answer.at("query_id").get<std::string>()).second) pending_answers.push_back(answer);
    };

    const auto& entries = journal.entries();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& e = entries[i];
      if (e.kind == JournalKind::agent_action) {
        for (std::size_t j = i + 1; j < entries.size() && entries[j].kind == JournalKind::assist_output; ++j) {
          const Json& m = entries[j].payload;
          if (m.at("type") == "answer.delivered") deliver(m.at("payload").at("answer"));
        }
        continue;
      }
      if (e.kind != JournalKind::input_event || e.payload.at("type") != "transcript.event") continue;
      const Json& rec = e.payload.at("payload");
      if (!rec.at("is_final").get<bool>()) continue;
      std::vector<Json> outputs;
      for (std::size_t j = i + 1; j < entries.size() && entries[j].kind == JournalKind::assist_output; ++j) {
        outputs.push_back(entries[j].payload);
      }
      if (!outputs.empty() && outputs.front().at("type") == "error") continue;  // rejected turn
      const bool customer = rec.at("speaker") == "customer";
      const std::int64_t turn = rec.at("turn_index").get<std::int64_t>();

      std::optional<std::string> entity, intent, answer, shift;
      std::optional<double> polarity;
      for (const auto& m : outputs) {
        const std::string type = m.at("type");
        const Json& p = m.at("payload");
        if (type == "state.entities" && !p.at("new").empty() && !entity) {
          const std::string kind = p.at("new").front().at("kind");
          entity = "Customer " + kind_label(kind) + ": " +
                   std::string(placeholder(*parse_enum<EntityKind>(kind)));
        } else if (type == "state.intents" && !p.at("newly_triggered").empty()) {
          intent = "Intent detected: " + p.at("newly_triggered").front().get<std::string>();
        } else if (type == "sentiment.update") {
          polarity = p.at("sample").at("polarity").get<double>();
        } else if (type == "answer.delivered") {
          deliver(p.at("answer"));
        }
      }
      if (customer && !pending_answers.empty()) {
        const Json& a = pending_answers.back();
        const std::string q = a.at("query_text");
        if (a.at("no_answer").get<bool>()) {
          answer = "No answer found: " + q;
        } else {
          answer = (a.at("route") == "faq" ? "Answered via FAQ: " : "Answered via RAG: ") + q;
        }
      }
      if (customer) pending_answers.clear();
      if (polarity) {
        if (last_polarity && std::fabs(*polarity - *last_polarity) + 1e-12 >= sentiment_delta) {
          std::string v = fixed2(*polarity);
          if (v[0] != '-') v = "+" + v;
          shift = std::string("Sentiment shift: ") + (*polarity > *last_polarity ? "improved to " : "declined to ") + v;
        }
        last_polarity = polarity;
      }
      std::optional<std::string> bullet = entity ? entity : intent ? intent : answer ? answer : shift;
      if (bullet) history.push_back(redact(*bullet, *matcher));

      // Distinct facts ordered by their latest mention, newest `budget`.
      std::vector<std::string> ordered;
      std::set<std::string> seen;
      for (auto it = history.rbegin(); it != history.rend(); ++it) {
        if (seen.insert(*it).second) ordered.push_back(*it);
      }
      std::reverse(ordered.begin(), ordered.end());
      if (ordered.size() > budget) ordered.erase(ordered.begin(), ordered.end() - static_cast<std::ptrdiff_t>(budget));
      out[turn] = ordered;
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// BM25 oracle, straight from the textbook formula.

struct Bm25Oracle {
  struct Doc {
    std::string id;
    std::vector<std::string> tags;
    std::vector<std::string> terms;
  };
  std::vector<Doc> docs;
  double k1 = 1.2;
  double b = 0.75;

  std::vector<std::pair<std::string, double>> rank(const std::vector<std::string>& query,
                                                   const std::string& tag) const {
    double total = 0;
    for (const auto& d : docs) total += static_cast<double>(d.terms.size());
    const double avgdl = docs.empty() ? 0.0 : total / static_cast<double>(docs.size());
    std::vector<std::pair<std::string, double>> out;
    for (const auto& d : docs) {
      if (!tag.empty() && std::find(d.tags.begin(), d.tags.end(), tag) == d.tags.end()) continue;
      double score = 0;
      for (const auto& q : query) {
        double df = 0;
        for (const auto& other : docs) {
          if (std::find(other.terms.begin(), other.terms.end(), q) != other.terms.end()) df += 1;
        }
        const double tf = static_cast<double>(std::count(d.terms.begin(), d.terms.end(), q));
        if (tf == 0) continue;
        const double n = static_cast<double>(docs.size());
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        score += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * static_cast<double>(d.terms.size()) / avgdl));
      }
      if (score > 0) out.emplace_back(d.id, score);
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
      if (std::fabs(x.second - y.second) > 1e-12) return x.second > y.second;
      return x.first < y.first;
    });
    return out;
  }
};

}  // namespace callassist::testing
