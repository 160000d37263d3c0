#pragma once

#include <cstddef>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace callassist {

using Tokens = std::vector<std::string>;

std::string to_lower(std::string_view text);
std::vector<std::string_view> split_whitespace(std::string_view text);
std::string join(std::span<const std::string> parts, std::string_view sep);
std::string trim(std::string_view text);

/// printf-style fixed formatting; "-0.00" is normalized to "0.00".
std::string format_fixed(double value, int decimals);

/// Shared normalizer for entity, intent, sentiment and FAQ matching:
/// lowercase, punctuation stripped, except for tokens that fully match one
/// of the protected patterns (emails, account numbers), which keep their
/// inner punctuation.
class Tokenizer {
 public:
  Tokenizer();
  explicit Tokenizer(const std::vector<std::string>& protected_patterns);

  Tokens tokens(std::string_view text) const;
  std::string normalized(std::string_view text) const;

 private:
  std::vector<std::regex> protected_;
};

/// Start positions of every occurrence of `phrase` as a contiguous run.
std::vector<std::size_t> phrase_positions(std::span<const std::string> tokens,
                                          std::span<const std::string> phrase);

bool contains_phrase(std::span<const std::string> tokens, std::span<const std::string> phrase);

struct PhraseHit {
  std::size_t phrase_index;
  std::size_t position;
};

/// Left-to-right scan taking the longest phrase that matches at each
/// position; matched tokens are consumed so overlapping phrases never both
/// count.
std::vector<PhraseHit> longest_match_scan(std::span<const std::string> tokens,
                                          std::span<const Tokens> phrases);

}  // namespace callassist
