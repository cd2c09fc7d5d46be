#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nlchart/corpus.hpp"

namespace nlchart {

struct Suggestion {
  std::string phrase;
  std::size_t frequency = 0;

  bool operator==(const Suggestion&) const = default;
};

/// Autocompletion over a ranked phrase list. Phrases are normalized
/// (lower-cased, single-spaced) on insertion; duplicates add frequencies.
class SuggestionIndex {
 public:
  SuggestionIndex();
  ~SuggestionIndex();
  SuggestionIndex(SuggestionIndex&&) noexcept;
  SuggestionIndex& operator=(SuggestionIndex&&) noexcept;

  void add(std::string_view phrase, std::size_t frequency = 1);

  /// Case-insensitive prefix matches, by frequency descending then
  /// lexicographically; at most k.
  std::vector<Suggestion> suggest(std::string_view prefix, std::size_t k = 10) const;
  std::vector<std::string> complete(std::string_view prefix, std::size_t k = 10) const;

  std::size_t size() const { return phrases_.size(); }
  /// Every phrase, ranked.
  std::vector<Suggestion> ranked() const;

  /// {"phrases": [{"phrase", "frequency"}...]}; throws Error(kSyntax) on
  /// empty phrases or a missing list.
  static SuggestionIndex from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
  /// Frequencies count how many template paths start with each phrase.
  static SuggestionIndex from_templates(const std::vector<Template>& templates, const RuleTable& rules,
                                        const Catalog& catalog = Catalog::builtin());
  /// The shipped phrase list.
  static const SuggestionIndex& builtin();

 private:
  struct Node;

  std::map<std::string, std::size_t> phrases_;  // normalized phrase -> frequency
  std::unique_ptr<Node> root_;
};

}  // namespace nlchart
