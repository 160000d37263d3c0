#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <vector>

#include "callassist/text.hpp"
#include "callassist/types.hpp"

namespace callassist {

// ---------------------------------------------------------------------------
// Entities

struct EntityPatternSet {
  std::string email = R"([A-Za-z0-9._%+\-]+@[A-Za-z0-9\-]+(?:\.[A-Za-z0-9\-]+)*\.[A-Za-z]{2,})";
  std::string phone = R"((?:\+\d{1,3}[ \-]?)?(?:\(\d{3}\)|\d{3})[ \-]?\d{3}[ \-]?\d{4})";
  std::string account_number = R"(AC-\d{6})";
  std::vector<std::string> gazetteer;

  static EntityPatternSet from_json(const Json& patterns, const Json& gazetteer);
};

struct PatternMatch {
  EntityKind kind;
  std::size_t begin;
  std::size_t end;
  std::string value;
};

/// Finds identifiers in free text. The same matcher drives extraction and
/// PII redaction, so whatever counts as a name is exactly the gazetteer.
class EntityMatcher {
 public:
  explicit EntityMatcher(EntityPatternSet patterns = {});

  /// Non-overlapping matches ordered by position. On overlap the earlier kind
  /// in email, account_number, phone, name order wins.
  std::vector<PatternMatch> find_all(std::string_view text) const;

  const EntityPatternSet& patterns() const noexcept { return patterns_; }

  /// Patterns whose matches must survive tokenization intact.
  std::vector<std::string> protected_token_patterns() const;

 private:
  struct Compiled {
    EntityKind kind;
    std::regex re;
    bool check_boundaries;
  };
  EntityPatternSet patterns_;
  std::vector<Compiled> compiled_;
};

std::vector<Entity> extract_entities(const TranscriptEvent& event, const EntityMatcher& matcher);

/// Adds entities not yet known (same kind and value); returns the new ones in
/// input order. The first occurrence is kept.
std::vector<Entity> merge_entities(SessionState& state, std::span<const Entity> found);

bool has_entity(const SessionState& state, EntityKind kind);

// ---------------------------------------------------------------------------
// Intents

struct IntentCue {
  std::string id;
  std::string phrase;
  Tokens tokens;
  double weight = 0.0;
};

struct IntentSpec {
  std::string label;
  std::vector<IntentCue> cues;
  double threshold = 0.7;
  std::string workflow_id;
  std::string kb_domain_tag;
  std::string topic;
  std::vector<std::string> templates;
};

class IntentRegistry {
 public:
  IntentRegistry() = default;
  static IntentRegistry from_json(const Json& doc, const Tokenizer& tokenizer, double default_threshold = 0.7);

  const std::map<std::string, IntentSpec>& intents() const noexcept { return intents_; }
  const IntentSpec* find(const std::string& label) const;
  void add(IntentSpec spec);

  /// Kb domain tag of the first intent (label order) with a cue inside `tokens`.
  std::optional<std::string> resolve_domain(std::span<const std::string> tokens) const;

 private:
  std::map<std::string, IntentSpec> intents_;
};

/// 1 - prod(1 - w) over the hits, computed over sorted weights so the result
/// does not depend on hit order.
double noisy_or(std::span<const CueHit> hits);

struct IntentUpdate {
  std::vector<std::string> newly_triggered;
  bool changed = false;
  bool intent_changed = false;
};

/// Applies one final customer turn: appends cue hits, recomputes confidence
/// and marks labels that reach their threshold (once per session).
IntentUpdate update_intents(SessionState& state, const TranscriptEvent& event, const IntentRegistry& registry,
                            const Tokenizer& tokenizer);

/// Highest confidence label; ties go to the lexicographically smaller label.
std::optional<std::string> top_intent(const SessionState& state);

// ---------------------------------------------------------------------------
// Sentiment

struct SentimentConfig {
  double csat_k = 2.0;
  double detractor_below = 0.4;
  double promoter_from = 0.7;
};

class PolarityLexicon {
 public:
  PolarityLexicon() = default;
  static PolarityLexicon from_json(const Json& doc, const Tokenizer& tokenizer);

  void add(const std::string& phrase, double weight, const Tokenizer& tokenizer);
  /// Sum of matched term weights (longest match first), clamped to [-1, 1].
  double polarity(std::span<const std::string> tokens) const;

 private:
  std::vector<Tokens> phrases_;
  std::vector<double> weights_;
};

double csat_likelihood(double mean_polarity, double k);
NpsBand nps_band(double csat, const SentimentConfig& config);

SentimentSample update_sentiment(SessionState& state, const TranscriptEvent& event, const PolarityLexicon& lexicon,
                                 const Tokenizer& tokenizer, const SentimentConfig& config);

// ---------------------------------------------------------------------------
// Behavioral profile

struct ProfileCueSets {
  std::vector<std::string> interest;
  std::vector<std::string> hesitation;
  std::vector<std::string> goal;

  static ProfileCueSets from_json(const Json& doc);
};

ProfileCues update_profile(SessionState& state, const TranscriptEvent& event, const ProfileCueSets& sets,
                           const Tokenizer& tokenizer);

}  // namespace callassist
