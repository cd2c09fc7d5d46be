#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nlchart {

/// Half-open token index range [begin, end).
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return end <= begin; }
  bool overlaps(const TokenSpan& other) const {
    return begin < other.end && other.begin < end;
  }
  bool contains(std::size_t i) const { return i >= begin && i < end; }
  bool operator==(const TokenSpan&) const = default;
};

struct Token {
  std::string text;
  std::size_t offset = 0;  // byte offset into the source string
  std::size_t length = 0;
};

/// Splits on whitespace; punctuation characters become their own tokens;
/// numbers glued to words ("10px") split into number + unit; ISO and
/// MM/DD/YYYY dates and double-quoted strings stay whole.
std::vector<Token> tokenize(std::string_view text);
std::vector<std::string> token_texts(std::string_view text);

std::string to_lower(std::string_view s);

/// Lower-cased, tokenized, single-space-joined form used for all lexicon and
/// entity-index keys.
std::string normalize_phrase(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string trim(std::string_view s);

std::size_t levenshtein(std::string_view a, std::string_view b);
/// 1 - d / max(len); 1.0 for two empty strings.
double similarity(std::string_view a, std::string_view b);

bool is_quoted(std::string_view token);
std::string unquote(std::string_view token);

std::optional<double> parse_number(std::string_view s);
bool is_integer_literal(std::string_view s);
/// YYYY-MM-DD or MM/DD/YYYY with plausible month/day ranges.
bool is_date_literal(std::string_view s);

/// Shortest round-trip decimal representation ("1.5", "10", "0.1").
std::string format_number(double value);

}  // namespace nlchart
