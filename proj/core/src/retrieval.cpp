#include "callassist/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "callassist/errors.hpp"

namespace callassist {

namespace {

std::optional<std::string> fill_template(const std::string& tmpl, const IntentSpec& spec, const SessionState& state) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] != '{') {
      out += tmpl[i++];
      continue;
    }
    const std::size_t close = tmpl.find('}', i);
    if (close == std::string::npos) return std::nullopt;
    const std::string slot = tmpl.substr(i + 1, close - i - 1);
    if (slot == "topic") {
      if (spec.topic.empty()) return std::nullopt;
      out += spec.topic;
    } else {
      const auto kind = parse_enum<EntityKind>(slot);
      if (!kind) return std::nullopt;
      const auto it = state.entities.find(*kind);
      if (it == state.entities.end() || it->second.empty()) return std::nullopt;
      out += it->second.front().value;
    }
    i = close + 1;
  }
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      if (!trim(current).empty()) out.push_back(trim(current));
      current.clear();
      continue;
    }
    current += c;
    const bool terminal = c == '.' || c == '!' || c == '?';
    const bool boundary = i + 1 == text.size() || text[i + 1] == ' ' || text[i + 1] == '\n';
    if (terminal && boundary) {
      if (!trim(current).empty()) out.push_back(trim(current));
      current.clear();
    }
  }
  if (!trim(current).empty()) out.push_back(trim(current));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<SuggestedQuery> generate_queries(SessionState& state, const TranscriptEvent& event,
                                             const IntentRegistry& registry, const Tokenizer& tokenizer,
                                             double suggestion_floor) {
  std::vector<SuggestedQuery> created;
  if (!event.is_final || event.speaker != Speaker::customer) return created;

  std::set<std::string> seen;
  for (const auto& q : state.suggestions) seen.insert(tokenizer.normalized(q.text));

  for (const auto& [label, spec] : registry.intents()) {
    const auto hyp = state.intents.find(label);
    if (hyp == state.intents.end() || hyp->second.confidence < suggestion_floor) continue;
    for (const auto& tmpl : spec.templates) {
      const auto text = fill_template(tmpl, spec, state);
      if (!text) {
        ++state.metrics.skipped_templates;
        continue;
      }
      if (!seen.insert(tokenizer.normalized(*text)).second) continue;

      SuggestedQuery q;
      q.query_id = state.session_id.value() + "-q" + std::to_string(state.next_query_number++);
      q.session_id = state.session_id.value();
      q.source_turn = event.turn_index;
      q.text = *text;
      q.intent_label = label;
      q.kb_domain_tag = spec.kb_domain_tag;
      q.created_at_ms = event.t_end_ms;
      state.suggestions.push_back(q);
      created.push_back(std::move(q));
    }
  }
  return created;
}

// ---------------------------------------------------------------------------

std::vector<FaqEntry> load_faq_entries(const std::filesystem::path& path) {
  std::vector<FaqEntry> out;
  for (const auto& doc : load_ndjson_file(path)) out.push_back(doc.get<FaqEntry>());
  return out;
}

void save_faq_entries(const std::filesystem::path& path, std::span<const FaqEntry> entries) {
  std::string text;
  for (const auto& e : entries) {
    text += canonical_dump(Json(e));
    text += '\n';
  }
  write_text_file(path, text);
}

FaqStore::FaqStore(std::vector<FaqEntry> entries)
    : entries_(std::make_shared<const std::vector<FaqEntry>>(std::move(entries))) {}

std::shared_ptr<const std::vector<FaqEntry>> FaqStore::snapshot() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

void FaqStore::replace(std::vector<FaqEntry> entries) {
  auto next = std::make_shared<const std::vector<FaqEntry>>(std::move(entries));
  std::lock_guard lock(mutex_);
  entries_ = std::move(next);
  new_hits_.clear();
}

void FaqStore::record_hit(const std::string& entry_id) {
  std::lock_guard lock(mutex_);
  ++new_hits_[entry_id];
}

std::vector<FaqEntry> FaqStore::entries() const {
  std::lock_guard lock(mutex_);
  std::vector<FaqEntry> out = *entries_;
  for (auto& e : out) {
    const auto it = new_hits_.find(e.entry_id);
    if (it != new_hits_.end()) e.hit_count += it->second;
  }
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t inter = 0;
  for (const auto& t : a) inter += b.count(t);
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::optional<FaqMatch> match_faq(const SuggestedQuery& query, std::span<const FaqEntry> cache, double threshold,
                                  const Tokenizer& tokenizer, std::optional<std::int64_t> now_ms) {
  const Tokens qt = tokenizer.tokens(query.text);
  const std::set<std::string> qset(qt.begin(), qt.end());

  const FaqEntry* best = nullptr;
  double best_sim = -1.0;
  for (const auto& entry : cache) {
    if (entry.status != FaqStatus::validated) continue;
    if (entry.kb_domain_tag != query.kb_domain_tag) continue;
    if (now_ms && entry.expires_at_ms && *entry.expires_at_ms < *now_ms) continue;
    const std::set<std::string> eset(entry.normalized_question.begin(), entry.normalized_question.end());
    const double sim = jaccard(qset, eset);
    if (sim < threshold) continue;
    if (!best || sim > best_sim || (sim == best_sim && entry.entry_id < best->entry_id)) {
      best = &entry;
      best_sim = sim;
    }
  }
  if (!best) return std::nullopt;
  return FaqMatch{*best, best_sim};
}

// ---------------------------------------------------------------------------

const std::set<std::string>& KbIndex::stopwords() {
  static const std::set<std::string> kStopwords = {
      "a",    "an",   "and",  "are",  "as",   "at",   "be",   "by",    "can",  "do",    "does", "for",
      "from", "how",  "i",    "in",   "is",   "it",   "me",   "my",    "of",   "on",    "or",   "the",
      "to",   "what", "when", "where", "which", "who", "why", "will", "with", "you",  "your", "this",
      "that", "there", "we",  "our",  "was",  "were", "has",  "have",  "if",   "its",  "so",   "am"};
  return kStopwords;
}

KbIndex KbIndex::build(std::vector<KbDocument> documents, const Tokenizer& tokenizer) {
  KbIndex index;
  index.tokenizer_ = tokenizer;
  std::sort(documents.begin(), documents.end(),
            [](const KbDocument& a, const KbDocument& b) { return a.doc_id < b.doc_id; });
  std::size_t total = 0;
  for (auto& d : documents) {
    Doc doc;
    for (const auto& t : tokenizer.tokens(d.text)) {
      if (stopwords().contains(t)) continue;
      ++doc.tf[t];
      ++doc.length;
    }
    for (const auto& [term, count] : doc.tf) ++index.df_[term];
    doc.sentences = split_sentences(d.text);
    for (const auto& s : doc.sentences) {
      const Tokens st = tokenizer.tokens(s);
      doc.sentence_terms.emplace_back(st.begin(), st.end());
    }
    total += doc.length;
    doc.source = std::move(d);
    index.docs_.push_back(std::move(doc));
  }
  index.avgdl_ = index.docs_.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(index.docs_.size());
  return index;
}

KbIndex KbIndex::load_directory(const std::filesystem::path& dir, const Tokenizer& tokenizer) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::io, "kb directory not found: " + dir.string());
  std::vector<KbDocument> docs;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    KbDocument doc;
    doc.doc_id = entry.path().filename().string();
    std::string text = read_text_file(entry.path());
    const std::size_t nl = text.find('\n');
    const std::string first = to_lower(trim(text.substr(0, nl)));
    if (first.rfind("tags:", 0) == 0) {
      std::string list = first.substr(5);
      std::size_t start = 0;
      while (start <= list.size()) {
        const std::size_t comma = list.find(',', start);
        const std::string tag = trim(list.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (!tag.empty()) doc.tags.push_back(tag);
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      text = nl == std::string::npos ? std::string{} : text.substr(nl + 1);
    }
    doc.text = std::move(text);
    docs.push_back(std::move(doc));
  }
  return build(std::move(docs), tokenizer);
}

Tokens KbIndex::query_terms(std::string_view text) const {
  Tokens out;
  std::set<std::string> seen;
  for (auto& t : tokenizer_.tokens(text)) {
    if (stopwords().contains(t) || !seen.insert(t).second) continue;
    out.push_back(std::move(t));
  }
  return out;
}

std::size_t KbIndex::document_frequency(const std::string& term) const {
  const auto it = df_.find(term);
  return it == df_.end() ? 0 : it->second;
}

std::vector<KbIndex::Scored> KbIndex::score_all(std::span<const std::string> terms, const std::string& tag) const {
  std::vector<Scored> out;
  const double n = static_cast<double>(docs_.size());
  for (const auto& doc : docs_) {
    if (!tag.empty() && std::find(doc.source.tags.begin(), doc.source.tags.end(), tag) == doc.source.tags.end()) {
      continue;
    }
    double score = 0.0;
    for (const auto& term : terms) {
      const auto tf_it = doc.tf.find(term);
      if (tf_it == doc.tf.end()) continue;
      const double df = static_cast<double>(document_frequency(term));
      const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
      const double tf = static_cast<double>(tf_it->second);
      const double norm = k1 * (1.0 - b + b * static_cast<double>(doc.length) / avgdl_);
      score += idf * tf * (k1 + 1.0) / (tf + norm);
    }
    out.push_back({doc.source.doc_id, score});
  }
  return out;
}

std::vector<KbIndex::Scored> KbIndex::top_k(std::span<const std::string> terms, const std::string& tag,
                                            std::size_t k) const {
  auto all = score_all(terms, tag);
  std::erase_if(all, [](const Scored& s) { return !(s.score > 0.0); });
  std::sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) {
    return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

std::string KbIndex::best_sentence(const std::string& doc_id, std::span<const std::string> terms) const {
  const auto it = std::find_if(docs_.begin(), docs_.end(), [&](const Doc& d) { return d.source.doc_id == doc_id; });
  if (it == docs_.end() || it->sentences.empty()) return {};
  std::size_t best = 0;
  std::size_t best_hits = 0;
  for (std::size_t i = 0; i < it->sentences.size(); ++i) {
    std::size_t hits = 0;
    for (const auto& t : terms) hits += it->sentence_terms[i].count(t);
    if (hits > best_hits) {
      best_hits = hits;
      best = i;
    }
  }
  return it->sentences[best];
}

Json KbIndex::statistics() const {
  Json docs = Json::array();
  for (const auto& d : docs_) {
    docs.push_back(Json{{"doc_id", d.source.doc_id}, {"length", d.length}, {"tags", d.source.tags}, {"tf", d.tf}});
  }
  return Json{{"documents", docs}, {"df", df_}, {"avgdl", avgdl_}, {"n", docs_.size()}};
}

RagResult retrieve_rag(const SuggestedQuery& query, const KbIndex& index, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::config, "retrieval depth k must be at least 1");
  RagResult result;
  const Tokens terms = index.query_terms(query.text);
  const auto top = index.top_k(terms, query.kb_domain_tag, k);
  if (top.empty()) {
    result.no_answer = true;
    result.answer_text = std::string(kNoAnswerText);
    return result;
  }
  std::vector<std::string> parts;
  for (const auto& s : top) {
    result.passages.push_back({s.doc_id, s.score});
    std::string sentence = index.best_sentence(s.doc_id, terms);
    if (!sentence.empty() && std::find(parts.begin(), parts.end(), sentence) == parts.end()) {
      parts.push_back(std::move(sentence));
    }
  }
  result.answer_text = join(parts, " ");
  return result;
}

// ---------------------------------------------------------------------------

void RouteConfig::validate() const {
  if (faq_latency_ms < 0 || faq_latency_ms >= kFaqLatencyCeilingMs) {
    throw Error(ErrorCode::config, "faq_latency_ms must be in [0, 500)");
  }
  if (rag_base_ms < 0 || rag_per_passage_ms < 0) throw Error(ErrorCode::config, "RAG latencies must be non-negative");
  if (rag_k == 0) throw Error(ErrorCode::config, "rag_k must be at least 1");
  if (!(faq_threshold > 0.0 && faq_threshold <= 1.0)) throw Error(ErrorCode::config, "faq_threshold must be in (0, 1]");
}

AnswerRecord route(const SuggestedQuery& query, std::span<const FaqEntry> cache, const KbIndex& index,
                   const RouteConfig& config, const Tokenizer& tokenizer, std::int64_t now_ms, FaqStore* store) {
  AnswerRecord rec;
  rec.query_id = query.query_id;
  rec.session_id = query.session_id;
  rec.query_text = query.text;
  rec.answered_at_ms = now_ms;

  if (auto hit = match_faq(query, cache, config.faq_threshold, tokenizer, now_ms)) {
    rec.route = Route::faq;
    rec.answer_text = hit->entry.answer;
    rec.matched_entry_id = hit->entry.entry_id;
    rec.similarity = hit->similarity;
    rec.simulated_latency_ms = config.faq_latency_ms;
    rec.llm_calls_avoided = 1;
    if (store) store->record_hit(hit->entry.entry_id);
    return rec;
  }

  RagResult rag = retrieve_rag(query, index, config.rag_k);
  rec.route = Route::rag;
  rec.answer_text = std::move(rag.answer_text);
  rec.no_answer = rag.no_answer;
  const auto passages = static_cast<std::int64_t>(rag.passages.size());
  rec.passages = std::move(rag.passages);
  rec.simulated_latency_ms =
      std::clamp(config.rag_base_ms + config.rag_per_passage_ms * passages, kRagLatencyMinMs, kRagLatencyMaxMs);
  rec.llm_calls_avoided = 0;
  return rec;
}

void to_json(Json& j, const SavingsReport& v) {
  j = Json{{"routed", v.routed},
           {"hits", v.hits},
           {"avoided_calls", v.avoided_calls},
           {"hit_rate", v.hit_rate},
           {"latency_saved_hours", v.latency_saved_hours}};
}

SavingsReport account_latency(std::span<const AnswerRecord> records, double seconds_saved_per_hit) {
  SavingsReport r;
  r.routed = static_cast<std::int64_t>(records.size());
  for (const auto& rec : records) {
    if (rec.route == Route::faq) ++r.hits;
    r.avoided_calls += rec.llm_calls_avoided;
  }
  r.hit_rate = r.routed == 0 ? 0.0 : static_cast<double>(r.hits) / static_cast<double>(r.routed);
  const double hours = static_cast<double>(r.hits) * seconds_saved_per_hit / 3600.0;
  r.latency_saved_hours = std::round(hours * 10.0) / 10.0;
  return r;
}

}  // namespace callassist
