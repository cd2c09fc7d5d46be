#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "nlchart/error.hpp"
#include "nlchart/suggest.hpp"

namespace nlchart {

void PrintTo(const Suggestion& s, std::ostream* os) { *os << '"' << s.phrase << "\":" << s.frequency; }

namespace {

TEST(Suggest, ShippedListCompletesCommonPrefixes) {
  const auto& index = SuggestionIndex::builtin();
  auto sort = index.complete("sort", 50);
  ASSERT_FALSE(sort.empty());
  EXPECT_EQ(sort.front(), "sort");
  EXPECT_NE(std::find(sort.begin(), sort.end(), "sort descending"), sort.end());
  auto trend = index.complete("add tr");
  EXPECT_NE(std::find(trend.begin(), trend.end(), "add trend line"), trend.end());
  EXPECT_TRUE(index.complete("zzz").empty());
  EXPECT_EQ(index.complete("sort", 1), (std::vector<std::string>{"sort"}));
  EXPECT_TRUE(index.complete("sort", 0).empty());
}

TEST(Suggest, ShippedListMatchesTheTemplates) {
  auto rebuilt = SuggestionIndex::from_templates(builtin_templates(), RuleTable::builtin());
  EXPECT_EQ(rebuilt.ranked(), SuggestionIndex::builtin().ranked());
}

TEST(Suggest, CaseAndWhitespaceInsensitive) {
  SuggestionIndex index;
  index.add("Add Trend Line", 3);
  index.add("add  trend   line", 2);
  index.add("add title", 1);
  ASSERT_EQ(index.size(), 2u);
  EXPECT_EQ(index.suggest("  ADD   T", 5),
            (std::vector<Suggestion>{{"add trend line", 5}, {"add title", 1}}));
  // a trailing space ends the word
  index.add("sorting", 9);
  index.add("sort by", 1);
  EXPECT_EQ(index.complete("sort "), (std::vector<std::string>{"sort by"}));
}

TEST(Suggest, RejectsEmptyPhrases) {
  SuggestionIndex index;
  EXPECT_THROW(index.add("   "), Error);
  EXPECT_THROW(SuggestionIndex::from_json({{"phrases", {{{"frequency", 2}}}}}), Error);
  EXPECT_THROW(SuggestionIndex::from_json(nlohmann::json::array()), Error);
}

TEST(Suggest, JsonRoundTrip) {
  SuggestionIndex index;
  index.add("b", 2);
  index.add("a", 2);
  index.add("c", 5);
  auto back = SuggestionIndex::from_json(index.to_json());
  EXPECT_EQ(back.ranked(), (std::vector<Suggestion>{{"c", 5}, {"a", 2}, {"b", 2}}));
}

// Property: the trie agrees with a linear scan sorted by (frequency desc,
// phrase asc) for random phrase sets, prefixes and k.
TEST(SuggestProperty, TrieMatchesLinearScan) {
  std::mt19937 rng(7);
  const std::string alphabet = "ab c";
  auto word = [&](std::size_t max_len) {
    std::uniform_int_distribution<std::size_t> len(1, max_len), ch(0, alphabet.size() - 1);
    std::string s;
    for (auto n = len(rng); s.size() < n;) s += alphabet[ch(rng)];
    return s;
  };
  for (int round = 0; round < 200; ++round) {
    SuggestionIndex index;
    std::map<std::string, std::size_t> oracle;
    std::uniform_int_distribution<std::size_t> freq(1, 4), count(1, 30), kdist(0, 12);
    for (auto n = count(rng); n > 0; --n) {
      auto raw = word(6);
      auto f = freq(rng);
      // fold the way the index does: collapse whitespace, trim
      std::string key;
      for (char c : raw) {
        if (c == ' ' && (key.empty() || key.back() == ' ')) continue;
        key += c;
      }
      while (!key.empty() && key.back() == ' ') key.pop_back();
      if (key.empty()) continue;
      index.add(raw, f);
      oracle[key] += f;
    }
    auto prefix = word(3);
    std::string folded;
    for (char c : prefix) {
      if (c == ' ' && (folded.empty() || folded.back() == ' ')) continue;
      folded += c;
    }
    auto k = kdist(rng);
    std::vector<Suggestion> expected;
    for (const auto& [p, f] : oracle) {
      if (p.starts_with(folded)) expected.push_back({p, f});
    }
    std::sort(expected.begin(), expected.end(), [](const Suggestion& a, const Suggestion& b) {
      return a.frequency != b.frequency ? a.frequency > b.frequency : a.phrase < b.phrase;
    });
    if (expected.size() > k) expected.resize(k);
    EXPECT_EQ(index.suggest(prefix, k), expected) << "prefix '" << prefix << "' k=" << k;
  }
}

}  // namespace
}  // namespace nlchart
