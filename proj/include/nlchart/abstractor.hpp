#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nlchart/dataset.hpp"
#include "nlchart/text.hpp"

namespace nlchart {

struct Binding {
  TokenSpan span;              // original token indices
  std::size_t position = 0;    // index of the placeholder in abstracted_tokens
  std::string placeholder;     // <column> <value> <table> <integer> <float> <date> <year>
  std::string canonical;       // column name, cell value, or the literal as written
  std::string column;          // owning column for <value>
  double match_score = 1.0;

  bool operator==(const Binding&) const = default;
};

struct AbstractedUtterance {
  std::string original;
  std::vector<Token> tokens;
  std::vector<std::string> abstracted_tokens;
  std::vector<Binding> bindings;  // ordered by span

  /// Binding whose placeholder sits at abstracted index `position`.
  const Binding* binding_at(std::size_t position) const;
  /// Original token span covered by abstracted tokens [begin, end).
  TokenSpan original_span(TokenSpan abstracted) const;
  /// Original tokens rebuilt by substituting each placeholder with the
  /// tokens of its binding span.
  std::vector<std::string> reconstruct() const;
  nlohmann::json to_json() const;
};

bool is_placeholder(std::string_view token);

struct AbstractorOptions {
  double similarity_threshold = 0.85;
  std::size_t min_fuzzy_chars = 5;
  std::size_t min_ngram = 5;  // n starts at max(min_ngram, longest index phrase)
};

/// Stage 1: replaces dataset entities and literals with typed placeholders.
/// Longer n-grams are matched first; a match removes every overlapping
/// candidate. Within one length, higher similarity then leftmost wins, and
/// the index's column > table > value order breaks the remaining ties.
AbstractedUtterance abstract(std::string_view utterance, const EntityIndex& index,
                             const AbstractorOptions& options = {});

}  // namespace nlchart
