#include "callassist/governance.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "callassist/errors.hpp"

namespace callassist {

void to_json(Json& j, const FaqCandidate& v) {
  j = Json{{"candidate_id", v.candidate_id},   {"question_text", v.question_text},
           {"answer_text", v.answer_text},     {"provenance", v.provenance},
           {"support_count", v.support_count}, {"first_seen_ms", v.first_seen_ms},
           {"last_seen_ms", v.last_seen_ms}};
}

void from_json(const Json& j, FaqCandidate& v) {
  j.at("candidate_id").get_to(v.candidate_id);
  j.at("question_text").get_to(v.question_text);
  j.at("answer_text").get_to(v.answer_text);
  j.at("provenance").get_to(v.provenance);
  j.at("support_count").get_to(v.support_count);
  j.at("first_seen_ms").get_to(v.first_seen_ms);
  j.at("last_seen_ms").get_to(v.last_seen_ms);
  if (v.support_count < 1) throw Error(ErrorCode::parse, "support_count must be at least 1", "support_count");
  if (v.last_seen_ms < v.first_seen_ms) {
    throw Error(ErrorCode::parse, "last_seen_ms precedes first_seen_ms", "last_seen_ms");
  }
}

void to_json(Json& j, const ValidationReport& v) {
  j = Json{{"candidate_id", v.candidate_id},
           {"question_text", v.question_text},
           {"verdict", v.verdict == Verdict::accepted ? "accepted" : "rejected"},
           {"failed_checks", v.failed_checks},
           {"checked_at_ms", v.checked_at_ms},
           {"kb_domain_tag", v.kb_domain_tag ? Json(*v.kb_domain_tag) : Json(nullptr)}};
}

void from_json(const Json& j, ValidationReport& v) {
  j.at("candidate_id").get_to(v.candidate_id);
  v.question_text = j.value("question_text", std::string{});
  const auto verdict = j.at("verdict").get<std::string>();
  if (verdict == "accepted") {
    v.verdict = Verdict::accepted;
  } else if (verdict == "rejected") {
    v.verdict = Verdict::rejected;
  } else {
    throw Error(ErrorCode::parse, "unknown verdict '" + verdict + "'", "verdict");
  }
  j.at("failed_checks").get_to(v.failed_checks);
  j.at("checked_at_ms").get_to(v.checked_at_ms);
  const auto& tag = j.at("kb_domain_tag");
  v.kb_domain_tag = tag.is_null() ? std::nullopt : std::optional<std::string>(tag.get<std::string>());
  if ((v.verdict == Verdict::accepted) != v.failed_checks.empty()) {
    throw Error(ErrorCode::parse, "verdict disagrees with failed_checks", "verdict");
  }
}

// ---------------------------------------------------------------------------

std::vector<FaqCandidate> mine_candidates(std::span<const CallRecord> call_records,
                                          std::span<const AnswerRecord> answer_log, std::int64_t min_support,
                                          const Tokenizer& tokenizer) {
  std::set<std::string> transcript_sessions;
  for (const auto& r : call_records) transcript_sessions.insert(r.session_id);

  struct Group {
    std::vector<const AnswerRecord*> records;
  };
  std::map<std::string, Group> groups;
  for (const auto& rec : answer_log) {
    if (rec.route == Route::faq || rec.no_answer) continue;
    const std::string key = tokenizer.normalized(rec.query_text);
    if (key.empty()) continue;
    groups[key].records.push_back(&rec);
  }

  std::vector<FaqCandidate> out;
  for (const auto& [key, group] : groups) {
    if (static_cast<std::int64_t>(group.records.size()) < min_support) continue;
    const AnswerRecord* latest = group.records.front();
    FaqCandidate c;
    c.first_seen_ms = latest->answered_at_ms;
    c.last_seen_ms = latest->answered_at_ms;
    bool from_transcript = false;
    for (const auto* rec : group.records) {
      if (rec->answered_at_ms >= latest->answered_at_ms) latest = rec;
      c.first_seen_ms = std::min(c.first_seen_ms, rec->answered_at_ms);
      c.last_seen_ms = std::max(c.last_seen_ms, rec->answered_at_ms);
      from_transcript = from_transcript || transcript_sessions.contains(rec->session_id);
    }
    char id[32];
    std::snprintf(id, sizeof id, "cand-%04zu", out.size() + 1);
    c.candidate_id = id;
    c.question_text = latest->query_text;
    c.answer_text = latest->answer_text;
    c.provenance = from_transcript ? Provenance::mined_transcript : Provenance::mined_live;
    c.support_count = static_cast<std::int64_t>(group.records.size());
    out.push_back(std::move(c));
  }
  return out;
}

ValidationReport validate_candidate(const FaqCandidate& candidate, const IntentRegistry& registry,
                                    const EntityMatcher& matcher, const Tokenizer& tokenizer,
                                    const GovernanceConfig& config, std::int64_t now_ms) {
  ValidationReport report;
  report.candidate_id = candidate.candidate_id;
  report.question_text = candidate.question_text;
  report.checked_at_ms = now_ms;

  const std::string question = trim(candidate.question_text);
  const Tokens q_tokens = tokenizer.tokens(question);
  const Tokens a_tokens = tokenizer.tokens(candidate.answer_text);

  if (question.empty() || question.back() != '?' || q_tokens.size() < config.question_min_tokens) {
    report.failed_checks.push_back("H1");
  }
  if (a_tokens.size() < config.answer_min_tokens || a_tokens.size() > config.answer_max_tokens) {
    report.failed_checks.push_back("H2");
  }
  if (!matcher.find_all(candidate.question_text).empty() || !matcher.find_all(candidate.answer_text).empty()) {
    report.failed_checks.push_back("H3");
  }
  report.kb_domain_tag = registry.resolve_domain(q_tokens);
  if (!report.kb_domain_tag) report.failed_checks.push_back("O1");

  report.verdict = report.failed_checks.empty() ? Verdict::accepted : Verdict::rejected;
  return report;
}

LifecycleResult apply_lifecycle(std::vector<FaqEntry> cache, std::span<const FaqCandidate> candidates,
                                std::span<const ValidationReport> reports, std::int64_t now_ms, std::int64_t ttl_ms,
                                const Tokenizer& tokenizer) {
  LifecycleResult result;

  for (auto& e : cache) {
    if (e.status == FaqStatus::validated && e.expires_at_ms && *e.expires_at_ms < now_ms) {
      e.status = FaqStatus::expired;
      result.changes.push_back(Json{{"op", "expire"}, {"entry_id", e.entry_id}, {"at_ms", now_ms}});
    }
  }

  std::size_t next_number = cache.size() + 1;
  for (const auto& e : cache) {
    unsigned n = 0;
    if (std::sscanf(e.entry_id.c_str(), "faq-%u", &n) == 1) next_number = std::max<std::size_t>(next_number, n + 1);
  }

  for (ValidationReport report : reports) {
    if (report.verdict != Verdict::accepted) {
      result.reports.push_back(std::move(report));
      continue;
    }
    const auto cand = std::find_if(candidates.begin(), candidates.end(),
                                   [&](const FaqCandidate& c) { return c.candidate_id == report.candidate_id; });
    if (cand == candidates.end()) {
      throw Error(ErrorCode::invalid_reference, "report references unknown candidate '" + report.candidate_id + "'");
    }
    if (!report.kb_domain_tag) {
      throw Error(ErrorCode::invariant, "accepted report without a domain tag: " + report.candidate_id);
    }
    const Tokens normalized = tokenizer.tokens(cand->question_text);

    std::int64_t version = 0;
    bool duplicate = false;
    for (const auto& e : cache) {
      if (e.normalized_question != normalized) continue;
      if (e.status == FaqStatus::validated) duplicate = true;
      version = std::max(version, e.version);
    }
    if (duplicate) {
      report.verdict = Verdict::rejected;
      report.failed_checks.push_back("D1");
      result.changes.push_back(
          Json{{"op", "reject"}, {"candidate_id", report.candidate_id}, {"check", "D1"}, {"at_ms", now_ms}});
      result.reports.push_back(std::move(report));
      continue;
    }

    FaqEntry entry;
    char id[32];
    std::snprintf(id, sizeof id, "faq-%04zu", next_number++);
    entry.entry_id = id;
    entry.question = trim(cand->question_text);
    entry.normalized_question = normalized;
    entry.answer = cand->answer_text;
    entry.kb_domain_tag = *report.kb_domain_tag;
    entry.status = FaqStatus::validated;
    entry.provenance = cand->provenance;
    entry.version = version + 1;
    entry.hit_count = 0;
    entry.expires_at_ms = now_ms + ttl_ms;
    result.changes.push_back(Json{{"op", "add"},
                                  {"entry_id", entry.entry_id},
                                  {"candidate_id", report.candidate_id},
                                  {"version", entry.version},
                                  {"expires_at_ms", *entry.expires_at_ms},
                                  {"at_ms", now_ms}});
    cache.push_back(std::move(entry));
    result.reports.push_back(std::move(report));
  }
  result.cache = std::move(cache);
  return result;
}

void append_change_log(const std::filesystem::path& path, std::span<const Json> changes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot open change log " + path.string());
  for (const auto& c : changes) out << canonical_dump(c) << '\n';
}

std::vector<FaqCandidate> load_candidates(const std::filesystem::path& path) {
  std::vector<FaqCandidate> out;
  for (const auto& doc : load_ndjson_file(path)) out.push_back(doc.get<FaqCandidate>());
  return out;
}

std::vector<ValidationReport> load_reports(const std::filesystem::path& path) {
  std::vector<ValidationReport> out;
  for (const auto& doc : load_ndjson_file(path)) out.push_back(doc.get<ValidationReport>());
  return out;
}

}  // namespace callassist
