#include "callassist/understanding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "callassist/errors.hpp"

namespace callassist {

namespace {

bool is_alnum_at(std::string_view text, std::size_t pos) {
  return pos < text.size() && std::isalnum(static_cast<unsigned char>(text[pos])) != 0;
}

std::string escape_regex(std::string_view text) {
  static const std::string kSpecial = R"(\^$.|?*+()[]{})";
  std::string out;
  for (char c : text) {
    if (kSpecial.find(c) != std::string::npos) out += '\\';
    out += c;
  }
  return out;
}

std::regex compile(const std::string& pattern, std::regex::flag_type extra = {}) {
  try {
    return std::regex(pattern, std::regex::ECMAScript | extra);
  } catch (const std::regex_error& e) {
    throw Error(ErrorCode::config, "invalid pattern '" + pattern + "': " + e.what());
  }
}

double require_weight(const Json& v, const std::string& where) {
  if (!v.is_number()) throw Error(ErrorCode::config, where + ": weight must be a number");
  const double w = v.get<double>();
  if (!(w > 0.0 && w <= 1.0)) throw Error(ErrorCode::config, where + ": weight must be in (0, 1]");
  return w;
}

}  // namespace

// ---------------------------------------------------------------------------
// Entities

EntityPatternSet EntityPatternSet::from_json(const Json& patterns, const Json& gazetteer) {
  EntityPatternSet set;
  if (!patterns.is_null()) {
    set.email = patterns.value("email", set.email);
    set.phone = patterns.value("phone", set.phone);
    set.account_number = patterns.value("account_number", set.account_number);
  }
  if (gazetteer.is_object()) {
    set.gazetteer = gazetteer.at("names").get<std::vector<std::string>>();
  } else if (gazetteer.is_array()) {
    set.gazetteer = gazetteer.get<std::vector<std::string>>();
  }
  return set;
}

EntityMatcher::EntityMatcher(EntityPatternSet patterns) : patterns_(std::move(patterns)) {
  compiled_.push_back({EntityKind::email, compile(patterns_.email), false});
  compiled_.push_back({EntityKind::account_number, compile(patterns_.account_number), true});
  compiled_.push_back({EntityKind::phone, compile(patterns_.phone), true});

  std::vector<std::string> names;
  for (const auto& n : patterns_.gazetteer) {
    const auto parts = split_whitespace(n);
    if (parts.empty()) continue;
    std::string alt;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i > 0) alt += R"(\s+)";
      alt += escape_regex(parts[i]);
    }
    names.push_back(std::move(alt));
  }
  if (!names.empty()) {
    // Longest alternatives first so "Jane Doe" wins over "Jane".
    std::stable_sort(names.begin(), names.end(),
                     [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
    std::string pattern = "(?:";
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (i > 0) pattern += '|';
      pattern += names[i];
    }
    pattern += ')';
    compiled_.push_back({EntityKind::name, compile(pattern, std::regex::icase), true});
  }
}

std::vector<PatternMatch> EntityMatcher::find_all(std::string_view text) const {
  std::vector<PatternMatch> accepted;
  const std::string owned(text);
  for (const auto& c : compiled_) {
    std::size_t from = 0;
    while (from <= owned.size()) {
      std::smatch m;
      const auto begin_it = owned.cbegin() + static_cast<std::ptrdiff_t>(from);
      if (!std::regex_search(begin_it, owned.cend(), m, c.re)) break;
      const std::size_t b = from + static_cast<std::size_t>(m.position(0));
      const std::size_t e = b + static_cast<std::size_t>(m.length(0));
      if (e == b) {
        from = b + 1;
        continue;
      }
      const bool bounded = !c.check_boundaries || ((b == 0 || !is_alnum_at(owned, b - 1)) && !is_alnum_at(owned, e));
      const bool overlaps = std::any_of(accepted.begin(), accepted.end(), [&](const PatternMatch& p) {
        return b < p.end && p.begin < e;
      });
      if (bounded && !overlaps) {
        accepted.push_back({c.kind, b, e, owned.substr(b, e - b)});
        from = e;
      } else {
        from = b + 1;
      }
    }
  }
  std::sort(accepted.begin(), accepted.end(),
            [](const PatternMatch& a, const PatternMatch& b) { return a.begin < b.begin; });
  return accepted;
}

std::vector<std::string> EntityMatcher::protected_token_patterns() const {
  return {patterns_.email, patterns_.account_number};
}

std::vector<Entity> extract_entities(const TranscriptEvent& event, const EntityMatcher& matcher) {
  std::vector<Entity> out;
  for (auto& m : matcher.find_all(event.display_text)) {
    out.push_back({m.kind, std::move(m.value), event.turn_index, m.begin, m.end});
  }
  return out;
}

std::vector<Entity> merge_entities(SessionState& state, std::span<const Entity> found) {
  std::vector<Entity> added;
  for (const auto& e : found) {
    auto& list = state.entities[e.kind];
    const bool known = std::any_of(list.begin(), list.end(), [&](const Entity& x) { return x.value == e.value; });
    if (!known) {
      list.push_back(e);
      added.push_back(e);
    }
  }
  return added;
}

bool has_entity(const SessionState& state, EntityKind kind) {
  const auto it = state.entities.find(kind);
  return it != state.entities.end() && !it->second.empty();
}

// ---------------------------------------------------------------------------
// Intents

IntentRegistry IntentRegistry::from_json(const Json& doc, const Tokenizer& tokenizer, double default_threshold) {
  IntentRegistry registry;
  default_threshold = doc.value("default_threshold", default_threshold);
  const Json& intents = doc.at("intents");
  for (auto it = intents.begin(); it != intents.end(); ++it) {
    const std::string& label = it.key();
    const Json& body = it.value();
    IntentSpec spec;
    spec.label = label;
    spec.threshold = body.value("threshold", default_threshold);
    if (!(spec.threshold > 0.0 && spec.threshold <= 1.0)) {
      throw Error(ErrorCode::config, "intent " + label + ": threshold must be in (0, 1]");
    }
    spec.workflow_id = body.value("workflow_id", std::string{});
    if (spec.workflow_id.empty()) throw Error(ErrorCode::config, "intent " + label + ": missing workflow_id");
    spec.kb_domain_tag = body.value("kb_domain_tag", std::string{});
    spec.topic = body.value("topic", std::string{});
    spec.templates = body.value("templates", std::vector<std::string>{});
    for (const auto& t : spec.templates) {
      const std::string tt = trim(t);
      if (tt.empty() || tt.back() != '?') {
        throw Error(ErrorCode::config, "intent " + label + ": template must be a question: " + t);
      }
    }
    const Json& cues = body.at("cues");
    for (std::size_t i = 0; i < cues.size(); ++i) {
      IntentCue cue;
      cue.id = label + "/" + std::to_string(i);
      cue.phrase = cues[i].at("pattern").get<std::string>();
      cue.tokens = tokenizer.tokens(cue.phrase);
      if (cue.tokens.empty()) throw Error(ErrorCode::config, "intent " + label + ": empty cue pattern");
      cue.weight = require_weight(cues[i].at("weight"), "intent " + label);
      spec.cues.push_back(std::move(cue));
    }
    if (spec.cues.empty()) throw Error(ErrorCode::config, "intent " + label + ": needs at least one cue");
    registry.add(std::move(spec));
  }
  return registry;
}

const IntentSpec* IntentRegistry::find(const std::string& label) const {
  const auto it = intents_.find(label);
  return it == intents_.end() ? nullptr : &it->second;
}

void IntentRegistry::add(IntentSpec spec) {
  const std::string label = spec.label;
  intents_.insert_or_assign(label, std::move(spec));
}

std::optional<std::string> IntentRegistry::resolve_domain(std::span<const std::string> tokens) const {
  for (const auto& [label, spec] : intents_) {
    for (const auto& cue : spec.cues) {
      if (contains_phrase(tokens, cue.tokens) && !spec.kb_domain_tag.empty()) return spec.kb_domain_tag;
    }
  }
  return std::nullopt;
}

double noisy_or(std::span<const CueHit> hits) {
  std::vector<double> w;
  w.reserve(hits.size());
  for (const auto& h : hits) w.push_back(h.weight);
  std::sort(w.begin(), w.end());
  double miss = 1.0;
  for (double x : w) miss *= (1.0 - x);
  return std::clamp(1.0 - miss, 0.0, 1.0);
}

std::optional<std::string> top_intent(const SessionState& state) {
  std::optional<std::string> best;
  double best_conf = -1.0;
  for (const auto& [label, hyp] : state.intents) {
    if (hyp.confidence > best_conf) {
      best_conf = hyp.confidence;
      best = label;
    }
  }
  return best;
}

IntentUpdate update_intents(SessionState& state, const TranscriptEvent& event, const IntentRegistry& registry,
                            const Tokenizer& tokenizer) {
  IntentUpdate update;
  const Tokens tokens = tokenizer.tokens(event.display_text);
  for (const auto& [label, spec] : registry.intents()) {
    std::vector<CueHit> hits;
    for (const auto& cue : spec.cues) {
      if (contains_phrase(tokens, cue.tokens)) hits.push_back({cue.id, event.turn_index, cue.weight});
    }
    if (hits.empty()) continue;
    update.changed = true;
    auto& hyp = state.intents[label];
    hyp.label = label;
    hyp.cue_hits.insert(hyp.cue_hits.end(), hits.begin(), hits.end());
    hyp.confidence = noisy_or(hyp.cue_hits);
    if (!hyp.triggered && hyp.confidence + 1e-12 >= spec.threshold) {
      hyp.triggered = true;
      hyp.triggered_at_turn = event.turn_index;
      update.newly_triggered.push_back(label);
    }
  }
  if (update.changed) {
    auto top = top_intent(state);
    update.intent_changed = state.top_intent.has_value() && top != state.top_intent;
    state.top_intent = std::move(top);
  }
  return update;
}

// ---------------------------------------------------------------------------
// Sentiment

PolarityLexicon PolarityLexicon::from_json(const Json& doc, const Tokenizer& tokenizer) {
  PolarityLexicon lexicon;
  const Json& terms = doc.contains("terms") ? doc.at("terms") : doc;
  for (auto it = terms.begin(); it != terms.end(); ++it) {
    if (it.key() == "version") continue;
    if (!it.value().is_number()) throw Error(ErrorCode::config, "lexicon weight for '" + it.key() + "' must be a number");
    const double w = it.value().get<double>();
    if (w < -1.0 || w > 1.0) throw Error(ErrorCode::config, "lexicon weight for '" + it.key() + "' outside [-1, 1]");
    lexicon.add(it.key(), w, tokenizer);
  }
  return lexicon;
}

void PolarityLexicon::add(const std::string& phrase, double weight, const Tokenizer& tokenizer) {
  Tokens t = tokenizer.tokens(phrase);
  if (t.empty()) return;
  phrases_.push_back(std::move(t));
  weights_.push_back(weight);
}

double PolarityLexicon::polarity(std::span<const std::string> tokens) const {
  double sum = 0.0;
  for (const auto& hit : longest_match_scan(tokens, phrases_)) sum += weights_[hit.phrase_index];
  return std::clamp(sum, -1.0, 1.0);
}

double csat_likelihood(double mean_polarity, double k) { return 1.0 / (1.0 + std::exp(-k * mean_polarity)); }

NpsBand nps_band(double csat, const SentimentConfig& config) {
  if (csat < config.detractor_below) return NpsBand::detractor;
  if (csat < config.promoter_from) return NpsBand::passive;
  return NpsBand::promoter;
}

SentimentSample update_sentiment(SessionState& state, const TranscriptEvent& event, const PolarityLexicon& lexicon,
                                 const Tokenizer& tokenizer, const SentimentConfig& config) {
  SentimentSample sample;
  sample.turn_index = event.turn_index;
  sample.polarity = lexicon.polarity(tokenizer.tokens(event.display_text));

  double sum = sample.polarity;
  for (const auto& s : state.sentiment_trajectory) sum += s.polarity;
  const double mean = sum / static_cast<double>(state.sentiment_trajectory.size() + 1);
  sample.csat_likelihood = csat_likelihood(mean, config.csat_k);
  sample.nps_band = nps_band(sample.csat_likelihood, config);
  state.sentiment_trajectory.push_back(sample);
  return sample;
}

// ---------------------------------------------------------------------------
// Profile

ProfileCueSets ProfileCueSets::from_json(const Json& doc) {
  ProfileCueSets sets;
  sets.interest = doc.value("interest", std::vector<std::string>{});
  sets.hesitation = doc.value("hesitation", std::vector<std::string>{});
  sets.goal = doc.value("goal", std::vector<std::string>{});
  return sets;
}

ProfileCues update_profile(SessionState& state, const TranscriptEvent& event, const ProfileCueSets& sets,
                           const Tokenizer& tokenizer) {
  std::vector<Tokens> phrases;
  for (const auto& p : sets.interest) phrases.push_back(tokenizer.tokens(p));
  for (const auto& p : sets.hesitation) phrases.push_back(tokenizer.tokens(p));

  const Tokens tokens = tokenizer.tokens(event.display_text);
  for (const auto& hit : longest_match_scan(tokens, phrases)) {
    if (hit.phrase_index < sets.interest.size()) {
      ++state.profile.interest_hits;
    } else {
      ++state.profile.hesitation_hits;
    }
  }

  // Goal language is kept verbatim: from the cue to the end of its sentence.
  const std::string lower = to_lower(event.display_text);
  struct Found {
    std::size_t pos;
    std::string clause;
  };
  std::vector<Found> found;
  for (const auto& goal : sets.goal) {
    const std::string needle = to_lower(goal);
    if (needle.empty()) continue;
    std::size_t pos = lower.find(needle);
    while (pos != std::string::npos) {
      const std::size_t end = pos + needle.size();
      const bool bounded = (pos == 0 || !is_alnum_at(lower, pos - 1)) && !is_alnum_at(lower, end);
      if (bounded) {
        std::size_t stop = event.display_text.find_first_of(".!?", end);
        if (stop == std::string::npos) stop = event.display_text.size();
        found.push_back({pos, trim(std::string_view(event.display_text).substr(pos, stop - pos))});
      }
      pos = lower.find(needle, pos + 1);
    }
  }
  std::stable_sort(found.begin(), found.end(), [](const Found& a, const Found& b) { return a.pos < b.pos; });
  for (auto& f : found) state.profile.goal_phrases.push_back(std::move(f.clause));
  return state.profile;
}

}  // namespace callassist
