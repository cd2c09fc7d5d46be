#include "nlchart/abstractor.hpp"

#include <algorithm>
#include <optional>

namespace nlchart {

namespace {

struct Candidate {
  TokenSpan span;
  const IndexEntry* entry = nullptr;
  double score = 0;
};

std::string placeholder_for(IndexKind kind) {
  switch (kind) {
    case IndexKind::kColumn: return "<column>";
    case IndexKind::kTable: return "<table>";
    case IndexKind::kValue: return "<value>";
  }
  return "<value>";
}

int kind_rank(IndexKind k) { return k == IndexKind::kColumn ? 0 : k == IndexKind::kTable ? 1 : 2; }

// Best index entry for a phrase: exact key first, then the most similar key
// at or above the threshold.
std::optional<Candidate> best_match(const std::string& phrase, const EntityIndex& index,
                                    const AbstractorOptions& opt) {
  if (auto hits = index.lookup(phrase); !hits.empty()) return Candidate{{}, hits.front(), 1.0};
  if (phrase.size() < opt.min_fuzzy_chars) return std::nullopt;
  std::optional<Candidate> best;
  for (const auto& e : index.entries()) {
    // similarity >= t needs |len difference| <= (1 - t) * maxlen
    double longest = static_cast<double>(std::max(e.key.size(), phrase.size()));
    double diff = static_cast<double>(e.key.size() > phrase.size() ? e.key.size() - phrase.size()
                                                                    : phrase.size() - e.key.size());
    if (diff > (1 - opt.similarity_threshold) * longest + 1e-9) continue;
    double s = similarity(phrase, e.key);
    if (s + 1e-12 < opt.similarity_threshold) continue;
    if (!best || s > best->score || (s == best->score && kind_rank(e.kind) < kind_rank(best->entry->kind))) {
      best = Candidate{{}, &e, s};
    }
  }
  return best;
}

}  // namespace

bool is_placeholder(std::string_view token) {
  return token.size() > 2 && token.front() == '<' && token.back() == '>';
}

const Binding* AbstractedUtterance::binding_at(std::size_t position) const {
  for (const auto& b : bindings) {
    if (b.position == position) return &b;
  }
  return nullptr;
}

TokenSpan AbstractedUtterance::original_span(TokenSpan abstracted) const {
  // Walk abstracted positions, mapping each to its original token range.
  std::size_t orig = 0;
  std::size_t b = 0;
  TokenSpan out{0, 0};
  bool started = false;
  for (std::size_t pos = 0; pos < abstracted_tokens.size(); ++pos) {
    std::size_t width = 1;
    if (b < bindings.size() && bindings[b].position == pos) {
      width = bindings[b].span.size();
      ++b;
    }
    if (pos == abstracted.begin) {
      out.begin = orig;
      started = true;
    }
    orig += width;
    if (pos + 1 == abstracted.end) out.end = orig;
  }
  if (!started) return {orig, orig};
  if (abstracted.empty()) out.end = out.begin;
  return out;
}

std::vector<std::string> AbstractedUtterance::reconstruct() const {
  std::vector<std::string> out;
  std::size_t b = 0;
  for (std::size_t pos = 0; pos < abstracted_tokens.size(); ++pos) {
    if (b < bindings.size() && bindings[b].position == pos) {
      for (auto i = bindings[b].span.begin; i < bindings[b].span.end; ++i) out.push_back(tokens[i].text);
      ++b;
    } else {
      out.push_back(abstracted_tokens[pos]);
    }
  }
  return out;
}

nlohmann::json AbstractedUtterance::to_json() const {
  nlohmann::json bs = nlohmann::json::array();
  for (const auto& b : bindings) {
    nlohmann::json j = {{"span", {b.span.begin, b.span.end}},
                        {"position", b.position},
                        {"placeholder", b.placeholder},
                        {"canonical", b.canonical},
                        {"score", b.match_score}};
    if (!b.column.empty()) j["column"] = b.column;
    bs.push_back(j);
  }
  return {{"original", original}, {"abstracted", abstracted_tokens}, {"bindings", bs}};
}

AbstractedUtterance abstract(std::string_view utterance, const EntityIndex& index,
                             const AbstractorOptions& options) {
  AbstractedUtterance out;
  out.original = std::string(utterance);
  out.tokens = tokenize(utterance);
  const std::size_t n_tokens = out.tokens.size();

  std::vector<std::string> lower;
  for (const auto& t : out.tokens) lower.push_back(to_lower(t.text));

  std::vector<bool> taken(n_tokens, false);
  std::vector<Candidate> accepted;
  if (!index.empty()) {
    std::size_t max_n = std::min(std::max(options.min_ngram, index.longest_tokens()), n_tokens);
    for (std::size_t n = max_n; n >= 1; --n) {
      std::vector<Candidate> found;
      for (std::size_t start = 0; start + n <= n_tokens; ++start) {
        bool blocked = false;
        for (std::size_t i = start; i < start + n && !blocked; ++i) {
          blocked = taken[i] || is_quoted(out.tokens[i].text);
        }
        if (blocked) continue;
        std::vector<std::string> words(lower.begin() + start, lower.begin() + start + n);
        if (auto c = best_match(join(words, " "), index, options)) {
          c->span = {start, start + n};
          found.push_back(*c);
        }
      }
      std::stable_sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.span.begin < b.span.begin;
      });
      for (const auto& c : found) {
        bool overlap = false;
        for (auto i = c.span.begin; i < c.span.end && !overlap; ++i) overlap = taken[i];
        if (overlap) continue;
        for (auto i = c.span.begin; i < c.span.end; ++i) taken[i] = true;
        accepted.push_back(c);
      }
    }
  }
  std::sort(accepted.begin(), accepted.end(),
            [](const Candidate& a, const Candidate& b) { return a.span.begin < b.span.begin; });

  std::size_t next = 0;
  for (std::size_t i = 0; i < n_tokens;) {
    if (next < accepted.size() && accepted[next].span.begin == i) {
      const auto& c = accepted[next++];
      Binding b;
      b.span = c.span;
      b.position = out.abstracted_tokens.size();
      b.placeholder = placeholder_for(c.entry->kind);
      b.canonical = c.entry->canonical;
      b.column = c.entry->column;
      b.match_score = c.score;
      out.abstracted_tokens.push_back(b.placeholder);
      out.bindings.push_back(std::move(b));
      i = c.span.end;
      continue;
    }
    const auto& text = out.tokens[i].text;
    std::string placeholder;
    if (is_date_literal(text)) {
      placeholder = "<date>";
    } else if (is_integer_literal(text)) {
      placeholder = is_year_literal(text) ? "<year>" : "<integer>";
    } else if (parse_number(text) && text.find_first_not_of("0123456789.") == std::string::npos) {
      placeholder = "<float>";
    }
    if (!placeholder.empty()) {
      Binding b;
      b.span = {i, i + 1};
      b.position = out.abstracted_tokens.size();
      b.placeholder = placeholder;
      b.canonical = text;
      out.abstracted_tokens.push_back(placeholder);
      out.bindings.push_back(std::move(b));
    } else {
      out.abstracted_tokens.push_back(text);
    }
    ++i;
  }
  return out;
}

}  // namespace nlchart
