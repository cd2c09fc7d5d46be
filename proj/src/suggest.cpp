#include "nlchart/suggest.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "embedded.hpp"
#include "nlchart/error.hpp"

namespace nlchart {

namespace {

// Lower-cased, runs of whitespace folded to one space, leading space dropped.
// A trailing space survives so "sort " does not complete to "sorting".
std::string fold(std::string_view s) {
  std::string out;
  bool space = false;
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += static_cast<char>(std::tolower(c));
  }
  if (space) out += ' ';
  return out;
}

bool ranks_before(const Suggestion& a, const Suggestion& b) {
  if (a.frequency != b.frequency) return a.frequency > b.frequency;
  return a.phrase < b.phrase;
}

}  // namespace

struct SuggestionIndex::Node {
  std::map<char, std::unique_ptr<Node>> children;
  const std::string* phrase = nullptr;  // points into phrases_ keys, which never move
};

SuggestionIndex::SuggestionIndex() : root_(std::make_unique<Node>()) {}
SuggestionIndex::~SuggestionIndex() = default;
SuggestionIndex::SuggestionIndex(SuggestionIndex&&) noexcept = default;
SuggestionIndex& SuggestionIndex::operator=(SuggestionIndex&&) noexcept = default;

void SuggestionIndex::add(std::string_view phrase, std::size_t frequency) {
  auto key = fold(phrase);
  if (!key.empty() && key.back() == ' ') key.pop_back();
  if (key.empty()) throw Error(Errc::kSyntax, "empty suggestion phrase");
  auto [it, fresh] = phrases_.try_emplace(key, 0);
  it->second += frequency;
  if (!fresh) return;
  Node* n = root_.get();
  for (char c : it->first) {
    auto& child = n->children[c];
    if (!child) child = std::make_unique<Node>();
    n = child.get();
  }
  n->phrase = &it->first;
}

std::vector<Suggestion> SuggestionIndex::suggest(std::string_view prefix, std::size_t k) const {
  std::vector<Suggestion> out;
  if (k == 0) return out;
  const Node* n = root_.get();
  for (char c : fold(prefix)) {
    auto it = n->children.find(c);
    if (it == n->children.end()) return out;
    n = it->second.get();
  }
  std::vector<const Node*> stack{n};
  while (!stack.empty()) {
    const Node* cur = stack.back();
    stack.pop_back();
    if (cur->phrase) out.push_back({*cur->phrase, phrases_.at(*cur->phrase)});
    for (const auto& [c, child] : cur->children) stack.push_back(child.get());
  }
  auto keep = std::min(k, out.size());
  std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(keep), out.end(), ranks_before);
  out.resize(keep);
  return out;
}

std::vector<std::string> SuggestionIndex::complete(std::string_view prefix, std::size_t k) const {
  std::vector<std::string> out;
  for (auto& s : suggest(prefix, k)) out.push_back(std::move(s.phrase));
  return out;
}

std::vector<Suggestion> SuggestionIndex::ranked() const {
  std::vector<Suggestion> out;
  for (const auto& [phrase, freq] : phrases_) out.push_back({phrase, freq});
  std::stable_sort(out.begin(), out.end(), ranks_before);
  return out;
}

SuggestionIndex SuggestionIndex::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("phrases") || !doc["phrases"].is_array()) {
    throw Error(Errc::kSyntax, "phrase list needs a 'phrases' array");
  }
  SuggestionIndex index;
  for (const auto& p : doc["phrases"]) {
    if (!p.is_object() || !p.contains("phrase") || !p["phrase"].is_string()) {
      throw Error(Errc::kSyntax, "phrase entry needs a 'phrase' string");
    }
    index.add(p["phrase"].get<std::string>(), p.value("frequency", std::size_t{1}));
  }
  return index;
}

nlohmann::json SuggestionIndex::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& s : ranked()) list.push_back({{"phrase", s.phrase}, {"frequency", s.frequency}});
  return {{"schema", "nlchart-phrases"}, {"version", "1.0"}, {"phrases", list}};
}

SuggestionIndex SuggestionIndex::from_templates(const std::vector<Template>& templates, const RuleTable& rules,
                                                const Catalog& catalog) {
  std::vector<std::set<std::string>> per_template;
  std::set<std::string> all;
  for (const auto& t : templates) {
    std::set<std::string> phrases;
    for (const auto& p : leading_phrases(t, rules, catalog)) {
      auto key = fold(p);
      phrases.insert(key);
      all.insert(key);
    }
    per_template.push_back(std::move(phrases));
  }
  // A phrase is as popular as the number of templates that start with it
  // word for word, so "sort" outranks "sort by".
  SuggestionIndex index;
  for (const auto& p : all) {
    std::size_t freq = 0;
    for (const auto& phrases : per_template) {
      auto it = phrases.lower_bound(p);
      bool hit = it != phrases.end() && (*it == p || it->starts_with(p + " "));
      for (; !hit && it != phrases.end() && it->starts_with(p); ++it) hit = it->starts_with(p + " ");
      freq += hit ? 1 : 0;
    }
    index.add(p, freq);
  }
  return index;
}

const SuggestionIndex& SuggestionIndex::builtin() {
  static const SuggestionIndex index = from_json(nlohmann::json::parse(embedded::kPhrases));
  return index;
}

}  // namespace nlchart
