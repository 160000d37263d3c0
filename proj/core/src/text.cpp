#include "callassist/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace callassist {

namespace {

constexpr std::string_view kEmailPattern = R"([A-Za-z0-9._%+\-]+@[A-Za-z0-9.\-]+\.[A-Za-z]{2,})";
constexpr std::string_view kEdgePunctuation = ".,;:!?\"'()[]{}<>";

bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

}  // namespace

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::vector<std::string_view> split_whitespace(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) parts.push_back(text.substr(start, i - start));
  }
  return parts;
}

std::string join(std::span<const std::string> parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::string trim(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && is_space(text[b])) ++b;
  while (e > b && is_space(text[e - 1])) --e;
  return std::string(text.substr(b, e - b));
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  std::string text(buf);
  if (text.front() == '-' && text.find_first_not_of("-0.") == std::string::npos) {
    text.erase(0, 1);
  }
  return text;
}

Tokenizer::Tokenizer() : Tokenizer(std::vector<std::string>{}) {}

Tokenizer::Tokenizer(const std::vector<std::string>& protected_patterns) {
  protected_.emplace_back(std::string(kEmailPattern));
  for (const auto& p : protected_patterns) {
    protected_.emplace_back(p);
  }
}

Tokens Tokenizer::tokens(std::string_view text) const {
  Tokens out;
  for (std::string_view raw : split_whitespace(text)) {
    std::size_t b = 0;
    std::size_t e = raw.size();
    while (b < e && kEdgePunctuation.find(raw[b]) != std::string_view::npos) ++b;
    while (e > b && kEdgePunctuation.find(raw[e - 1]) != std::string_view::npos) --e;
    const std::string core(raw.substr(b, e - b));
    if (core.empty()) continue;

    const bool is_protected = std::any_of(protected_.begin(), protected_.end(), [&](const std::regex& re) {
      return std::regex_match(core, re);
    });
    if (is_protected) {
      out.push_back(to_lower(core));
      continue;
    }
    std::string word;
    for (char c : core) {
      const auto u = static_cast<unsigned char>(c);
      if (is_word_byte(u)) word.push_back(static_cast<char>(std::tolower(u)));
    }
    if (!word.empty()) out.push_back(std::move(word));
  }
  return out;
}

std::string Tokenizer::normalized(std::string_view text) const {
  const Tokens t = tokens(text);
  return join(t, " ");
}

std::vector<std::size_t> phrase_positions(std::span<const std::string> tokens,
                                          std::span<const std::string> phrase) {
  std::vector<std::size_t> hits;
  if (phrase.empty() || phrase.size() > tokens.size()) return hits;
  for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
    if (std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
      hits.push_back(i);
    }
  }
  return hits;
}

bool contains_phrase(std::span<const std::string> tokens, std::span<const std::string> phrase) {
  return !phrase_positions(tokens, phrase).empty();
}

std::vector<PhraseHit> longest_match_scan(std::span<const std::string> tokens,
                                          std::span<const Tokens> phrases) {
  std::vector<std::size_t> order(phrases.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return phrases[a].size() > phrases[b].size();
  });

  std::vector<PhraseHit> hits;
  std::size_t pos = 0;
  while (pos < tokens.size()) {
    bool matched = false;
    for (std::size_t idx : order) {
      const Tokens& p = phrases[idx];
      if (p.empty() || pos + p.size() > tokens.size()) continue;
      if (std::equal(p.begin(), p.end(), tokens.begin() + static_cast<std::ptrdiff_t>(pos))) {
        hits.push_back({idx, pos});
        pos += p.size();
        matched = true;
        break;
      }
    }
    if (!matched) ++pos;
  }
  return hits;
}

}  // namespace callassist
