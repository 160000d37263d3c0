#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "callassist/text.hpp"
#include "callassist/types.hpp"
#include "callassist/understanding.hpp"

namespace callassist {

// ---------------------------------------------------------------------------
// Query reformulation

/// Instantiates the question templates of every intent whose confidence is at
/// least `suggestion_floor`. Slots: {topic} and any entity kind, e.g.
/// {account_number}. Templates with an unfillable slot are skipped and
/// counted in state.metrics.skipped_templates. Texts already suggested in
/// this session (after normalization) are not repeated.
std::vector<SuggestedQuery> generate_queries(SessionState& state, const TranscriptEvent& event,
                                             const IntentRegistry& registry, const Tokenizer& tokenizer,
                                             double suggestion_floor = 0.4);

// ---------------------------------------------------------------------------
// FAQ cache

std::vector<FaqEntry> load_faq_entries(const std::filesystem::path& path);
void save_faq_entries(const std::filesystem::path& path, std::span<const FaqEntry> entries);

/// Shared, read-mostly FAQ cache. Readers take an immutable snapshot; a
/// replace() swaps the whole cache at once.
class FaqStore {
 public:
  FaqStore() = default;
  explicit FaqStore(std::vector<FaqEntry> entries);

  std::shared_ptr<const std::vector<FaqEntry>> snapshot() const;
  void replace(std::vector<FaqEntry> entries);
  void record_hit(const std::string& entry_id);
  /// Snapshot with hit counts folded in.
  std::vector<FaqEntry> entries() const;

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const std::vector<FaqEntry>> entries_ = std::make_shared<const std::vector<FaqEntry>>();
  std::map<std::string, std::int64_t> new_hits_;
};

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

struct FaqMatch {
  FaqEntry entry;
  double similarity = 0.0;
};

/// Best validated entry with the query's domain tag by token-set Jaccard
/// similarity; ties go to the lower entry_id. Entries whose expiry is before
/// `now_ms` are skipped even if the lifecycle job has not flagged them yet.
std::optional<FaqMatch> match_faq(const SuggestedQuery& query, std::span<const FaqEntry> cache, double threshold,
                                  const Tokenizer& tokenizer, std::optional<std::int64_t> now_ms = std::nullopt);

// ---------------------------------------------------------------------------
// Knowledge base (BM25)

struct KbDocument {
  std::string doc_id;
  std::vector<std::string> tags;
  std::string text;
};

class KbIndex {
 public:
  struct Scored {
    std::string doc_id;
    double score = 0.0;
  };

  KbIndex() = default;
  static KbIndex build(std::vector<KbDocument> documents, const Tokenizer& tokenizer);
  /// One document per regular file; the file name is the doc id and an
  /// optional first line "tags: a, b" sets its domain tags.
  static KbIndex load_directory(const std::filesystem::path& dir, const Tokenizer& tokenizer);

  static const std::set<std::string>& stopwords();

  /// Distinct non-stopword query terms in first-occurrence order.
  Tokens query_terms(std::string_view text) const;

  /// Score of every document carrying `tag` (all documents when empty).
  std::vector<Scored> score_all(std::span<const std::string> terms, const std::string& tag) const;
  /// Documents with a positive score, best first, ties by doc id.
  std::vector<Scored> top_k(std::span<const std::string> terms, const std::string& tag, std::size_t k) const;

  /// Sentence of `doc_id` sharing the most distinct terms with the query.
  std::string best_sentence(const std::string& doc_id, std::span<const std::string> terms) const;

  std::size_t size() const noexcept { return docs_.size(); }
  double average_length() const noexcept { return avgdl_; }
  std::size_t document_frequency(const std::string& term) const;
  /// Corpus statistics as a canonical document, for consistency checks.
  Json statistics() const;

  double k1 = 1.2;
  double b = 0.75;

 private:
  struct Doc {
    KbDocument source;
    std::map<std::string, std::size_t> tf;
    std::size_t length = 0;
    std::vector<std::string> sentences;
    std::vector<std::set<std::string>> sentence_terms;
  };
  Tokenizer tokenizer_;
  std::vector<Doc> docs_;
  std::map<std::string, std::size_t> df_;
  double avgdl_ = 0.0;
};

inline constexpr std::string_view kNoAnswerText = "No answer found in the knowledge base.";

struct RagResult {
  std::vector<Passage> passages;
  std::string answer_text;
  bool no_answer = false;
};

/// Top-k documents by BM25 within the query's domain tag; the answer is the
/// best-matching sentences stitched together, never generated text.
RagResult retrieve_rag(const SuggestedQuery& query, const KbIndex& index, std::size_t k);

// ---------------------------------------------------------------------------
// Routing and accounting

struct RouteConfig {
  double faq_threshold = 0.8;
  std::int64_t faq_latency_ms = 300;
  std::int64_t rag_base_ms = 5000;
  std::int64_t rag_per_passage_ms = 1000;
  std::size_t rag_k = 3;

  /// Throws Error(config) when the FAQ budget is not under 500 ms.
  void validate() const;
};

inline constexpr std::int64_t kRagLatencyMinMs = 5000;
inline constexpr std::int64_t kRagLatencyMaxMs = 9000;
inline constexpr std::int64_t kFaqLatencyCeilingMs = 500;

/// FAQ first, RAG fallback. `store`, when given, records the FAQ hit.
AnswerRecord route(const SuggestedQuery& query, std::span<const FaqEntry> cache, const KbIndex& index,
                   const RouteConfig& config, const Tokenizer& tokenizer, std::int64_t now_ms,
                   FaqStore* store = nullptr);

struct SavingsReport {
  std::int64_t routed = 0;
  std::int64_t hits = 0;
  std::int64_t avoided_calls = 0;
  double hit_rate = 0.0;
  double latency_saved_hours = 0.0;  // one decimal
};

void to_json(Json& j, const SavingsReport& v);

SavingsReport account_latency(std::span<const AnswerRecord> records, double seconds_saved_per_hit);

}  // namespace callassist
