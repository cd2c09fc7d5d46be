#pragma once

// Brute-force reference for entity abstraction and a random utterance
// generator over a small car table, shared by the unit and acceptance tests.

#include <algorithm>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nlchart/abstractor.hpp"

namespace nlchart::testing {

// Exhaustive reference: scores every span against every entry with no
// hashing or length pruning, then applies the longest-first greedy rule.
inline std::vector<Binding> oracle_bindings(const std::vector<std::string>& words, const EntityIndex& index) {
  struct Hit {
    std::size_t b, e;
    double score;
    const IndexEntry* entry;
  };
  auto rank = [](IndexKind k) { return k == IndexKind::kColumn ? 0 : k == IndexKind::kTable ? 1 : 2; };
  std::vector<bool> taken(words.size(), false);
  std::vector<Hit> kept;
  std::size_t max_n = std::max<std::size_t>(5, index.longest_tokens());
  for (std::size_t n = std::min(max_n, words.size()); n >= 1; --n) {
    std::vector<Hit> hits;
    for (std::size_t b = 0; b + n <= words.size(); ++b) {
      bool blocked = false;
      std::string phrase;
      for (std::size_t i = b; i < b + n; ++i) {
        blocked = blocked || taken[i] || words[i].front() == '"';
        phrase += (i > b ? " " : "") + to_lower(words[i]);
      }
      if (blocked) continue;
      std::optional<Hit> best;
      for (const auto& e : index.entries()) {
        double s = e.key == phrase ? 1.0 : phrase.size() >= 5 ? similarity(phrase, e.key) : 0.0;
        if (e.key != phrase && s < 0.85) continue;
        bool better = !best || s > best->score || (s == best->score && rank(e.kind) < rank(best->entry->kind));
        if (better) best = Hit{b, b + n, s, &e};
      }
      if (best) hits.push_back(*best);
    }
    std::stable_sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) {
      return x.score != y.score ? x.score > y.score : x.b < y.b;
    });
    for (const auto& h : hits) {
      if (std::any_of(taken.begin() + h.b, taken.begin() + h.e, [](bool t) { return t; })) continue;
      std::fill(taken.begin() + h.b, taken.begin() + h.e, true);
      kept.push_back(h);
    }
  }
  std::sort(kept.begin(), kept.end(), [](const Hit& x, const Hit& y) { return x.b < y.b; });
  std::vector<Binding> out;
  for (const auto& h : kept) {
    Binding b;
    b.span = {h.b, h.e};
    b.canonical = h.entry->canonical;
    b.column = h.entry->column;
    b.match_score = h.score;
    out.push_back(b);
  }
  return out;
}

class UtteranceGenerator {
 public:
  explicit UtteranceGenerator(std::uint64_t seed, std::vector<std::string> entities = kCarEntities)
      : entities_(std::move(entities)), rng_(seed) {}

  std::string next() {
    std::string out;
    int n = pick(1, 9);
    for (int i = 0; i < n; ++i) {
      if (!out.empty()) out += ' ';
      switch (pick(0, 5)) {
        case 0: out += pick_of(entities_); break;
        case 1: out += typo(pick_of(entities_)); break;
        case 2: out += std::to_string(pick(0, 2500)); break;
        case 3: out += "\"" + pick_of(entities_) + "\""; break;
        default: out += pick_of(kFiller); break;
      }
    }
    return out;
  }

 private:
  inline static const std::vector<std::string> kCarEntities = {
      "Sales", "Year", "Brand", "Country", "Price", "Ford", "Toyota", "Car Sales", "Japan", "China", "US", "cars"};
  inline static const std::vector<std::string> kFiller = {"make", "the", "bar", "red", "by", "and", "car", "of", "it"};

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  const std::string& pick_of(const std::vector<std::string>& v) {
    return v[static_cast<std::size_t>(pick(0, static_cast<int>(v.size()) - 1))];
  }
  std::string typo(std::string s) {
    auto i = static_cast<std::size_t>(pick(0, static_cast<int>(s.size()) - 1));
    if (s[i] != ' ') s[i] = static_cast<char>('a' + pick(0, 25));
    return s;
  }

  std::vector<std::string> entities_;
  std::mt19937_64 rng_;
};

/// Random small tables: column names and categorical values drawn from
/// overlapping pools so names collide, share words and nearly match.
class SchemaGenerator {
 public:
  explicit SchemaGenerator(std::uint64_t seed) : rng_(seed) {}

  struct Schema {
    std::string csv;
    std::vector<std::string> entities;  // every header and categorical value
  };

  Schema next() {
    std::vector<std::string> names = kNames;
    std::shuffle(names.begin(), names.end(), rng_);
    names.resize(pick(1, 4));
    Schema s;
    std::vector<bool> numeric;
    for (std::size_t c = 0; c < names.size(); ++c) {
      s.csv += (c ? "," : "") + names[c];
      s.entities.push_back(names[c]);
      numeric.push_back(pick(0, 2) == 0);
    }
    s.csv += '\n';
    for (std::size_t r = 0, rows = pick(1, 5); r < rows; ++r) {
      for (std::size_t c = 0; c < names.size(); ++c) {
        std::string cell = numeric[c] ? std::to_string(pick(0, 999)) : kValues[pick(0, kValues.size() - 1)];
        if (!numeric[c]) s.entities.push_back(cell);
        s.csv += (c ? "," : "") + cell;
      }
      s.csv += '\n';
    }
    return s;
  }

 private:
  inline static const std::vector<std::string> kNames = {
      "Sales", "Year", "Brand", "Unit Sales", "Sales Region", "Region", "Price", "Total Price", "Model", "Country"};
  inline static const std::vector<std::string> kValues = {
      "Ford", "Toyota", "North", "North East", "East", "Red Bull", "Model T", "Sales", "Japan", "New Japan"};

  std::size_t pick(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_); }

  std::mt19937_64 rng_;
};

/// Entity bindings the abstractor produced, minus literals.
inline std::vector<Binding> entity_bindings(const AbstractedUtterance& a) {
  std::vector<Binding> out;
  for (const auto& b : a.bindings) {
    if (b.placeholder == "<column>" || b.placeholder == "<value>" || b.placeholder == "<table>") out.push_back(b);
  }
  return out;
}

}  // namespace nlchart::testing
