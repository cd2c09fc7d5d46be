#include "nlchart/tagger.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

#include "nlchart/error.hpp"

namespace nlchart {

namespace {

// Vocabulary classes in priority order for phrases listed in several.
constexpr const char* kClassPriority[] = {
    "chartType", "countPhrase", "component", "relational", "color",      "fontStyle",
    "aggregate", "timeUnit",    "order",     "range",      "visibility", "markShape",
    "icon",      "shape",       "position",  "direction",  "countNoun",  "iconNoun",
    "unit",
};

// Classes that label a chunk on their own; the rest only inform context.
std::string initial_role(const std::string& cls, const std::string& canonical) {
  if (cls == "component" || cls == "shape" || cls == "chartType" || cls == "markShape" || cls == "icon" ||
      cls == "fontStyle" || cls == "aggregate" || cls == "timeUnit" || cls == "order" || cls == "range" ||
      cls == "visibility" || cls == "color" || cls == "position" || cls == "direction" || cls == "extent") {
    return cls;
  }
  if (cls == "countPhrase") return "count";
  if (cls == "relational") return canonical.substr(0, canonical.find(':'));
  return {};
}

bool is_numeric(std::string_view w) { return w == "<integer>" || w == "<float>"; }

bool is_punct(std::string_view w) {
  return w.size() == 1 && !std::isalnum(static_cast<unsigned char>(w[0])) &&
         static_cast<unsigned char>(w[0]) < 0x80;
}

bool mixes_letters_and_digits(std::string_view w) {
  bool alpha = false, digit = false;
  for (char c : w) {
    auto u = static_cast<unsigned char>(c);
    if (std::isalpha(u)) alpha = true;
    else if (std::isdigit(u)) digit = true;
    else if (c != '_') return false;
  }
  return alpha && digit;
}

struct Piece {
  TokenSpan span;
  std::string role;  // empty = context only
  std::string cls;
};

class Work {
 public:
  Work(const AbstractedUtterance& a, const Catalog& catalog, const RuleTable& rules)
      : catalog_(catalog), rules_(rules), lx_(rules.tagger) {
    for (const auto& t : a.abstracted_tokens) {
      w_.push_back(is_placeholder(t) ? t : to_lower(t));
      quoted_.push_back(is_quoted(t));
    }
    consumed_.assign(w_.size(), false);
    owner_.assign(w_.size(), -1);
  }

  void run_triggers(const std::vector<const TriggerRule*>& triggers) {
    for (const auto* rule : triggers) {
      const auto n = rule->pattern.size();
      for (std::size_t i = 0; i + n <= w_.size(); ++i) {
        if (!trigger_matches(*rule, i)) continue;
        for (std::size_t k = 0; k < n; ++k) {
          consumed_[i + k] = true;
          if (!rule->roles.empty() && rule->roles[k]) add_piece({i + k, i + k + 1}, *rule->roles[k], "trigger");
        }
        for (const auto& intent : rule->intents) intents_.add(intent, 1.0, {i, i + n});
        if (std::find(rule->intents.begin(), rule->intents.end(), "setStroke") != rule->intents.end()) {
          stroke_triggers_.push_back(i);
        }
        if (std::find(rule->intents.begin(), rule->intents.end(), "setColor") != rule->intents.end()) {
          color_triggers_.push_back(i);
        }
        i += n - 1;
      }
    }
  }

  void run_vocabulary() {
    std::size_t longest = 2;
    for (const auto* cls : kClassPriority) longest = std::max(longest, catalog_.words(cls).longest_tokens());
    longest = std::max(longest, catalog_.words("extentAdverb").longest_tokens() + 1);
    for (std::size_t i = 0; i < w_.size();) {
      if (!free(i)) {
        ++i;
        continue;
      }
      if (auto n = match_extent(i)) {
        add_piece({i, i + n}, "extent", "extent");
        i += n;
        continue;
      }
      std::size_t matched = 0;
      for (std::size_t n = std::min(longest, w_.size() - i); n >= 1 && !matched; --n) {
        if (!all_free(i, i + n)) continue;
        auto phrase = phrase_at(i, n);
        if (auto cls = classify(phrase, i, n)) {
          auto canonical = cls->second;
          add_piece({i, i + n}, initial_role(cls->first, canonical), cls->first);
          matched = n;
        }
      }
      i += matched ? matched : 1;
    }
  }

  void run_context() {
    label_ranges();
    label_numbers();
    label_placeholders_and_literals();
    label_colors();
    label_value_shapes();
    label_wildcards();
    label_positions();
    label_anchors();
  }

  void infer_intents() {
    bool has_verb = std::any_of(w_.begin(), w_.end(), [&](const std::string& t) {
      return std::find(lx_.verbs.begin(), lx_.verbs.end(), t) != lx_.verbs.end();
    });
    for (const auto& p : ordered_pieces()) {
      if (p->role.empty() || accepted_by_detected(p->role)) continue;
      if (auto it = lx_.verb_roles.find(p->role); it != lx_.verb_roles.end()) {
        if (has_verb) intents_.add(it->second, 1.0, p->span);
        continue;
      }
      if (auto it = lx_.implied_roles.find(p->role); it != lx_.implied_roles.end()) {
        intents_.add(it->second, 1.0, p->span);
      }
    }
    intents_.finalize(rules_.intent_threshold);
  }

  std::vector<BioLabel> labels() const {
    std::vector<BioLabel> out(w_.size());
    for (const auto* p : ordered_pieces()) {
      if (p->role.empty()) continue;
      for (auto i = p->span.begin; i < p->span.end; ++i) {
        out[i] = i == p->span.begin ? BioLabel::begin(p->role) : BioLabel::inside(p->role);
      }
    }
    return out;
  }

  IntentSet intents() const { return intents_; }

 private:
  bool free(std::size_t i) const { return !consumed_[i] && owner_[i] < 0; }

  bool all_free(std::size_t b, std::size_t e) const {
    for (auto i = b; i < e; ++i) {
      if (!free(i)) return false;
    }
    return true;
  }

  Piece* piece_at(std::size_t i) {
    return i < owner_.size() && owner_[i] >= 0 ? &pieces_[static_cast<std::size_t>(owner_[i])] : nullptr;
  }

  const Piece* piece_at(std::size_t i) const {
    return i < owner_.size() && owner_[i] >= 0 ? &pieces_[static_cast<std::size_t>(owner_[i])] : nullptr;
  }

  std::string role_at(std::size_t i) const {
    const auto* p = piece_at(i);
    return p ? p->role : std::string();
  }

  std::string class_at(std::size_t i) const {
    const auto* p = piece_at(i);
    return p ? p->cls : std::string();
  }

  std::string word(std::size_t i) const { return i < w_.size() ? w_[i] : std::string(); }

  void add_piece(TokenSpan span, std::string role, std::string cls) {
    int id = static_cast<int>(pieces_.size());
    pieces_.push_back({span, std::move(role), std::move(cls)});
    for (auto i = span.begin; i < span.end; ++i) owner_[i] = id;
  }

  // Replaces every piece inside [b, e) with one piece.
  void merge(TokenSpan span, std::string role, std::string cls) {
    for (auto i = span.begin; i < span.end; ++i) {
      if (auto* p = piece_at(i)) p->span = {0, 0};
      owner_[i] = -1;
    }
    add_piece(span, std::move(role), std::move(cls));
  }

  std::vector<const Piece*> ordered_pieces() const {
    std::vector<const Piece*> out;
    for (const auto& p : pieces_) {
      if (!p.span.empty()) out.push_back(&p);
    }
    std::sort(out.begin(), out.end(), [](const Piece* a, const Piece* b) { return a->span.begin < b->span.begin; });
    return out;
  }

  std::string phrase_at(std::size_t i, std::size_t n) const {
    std::vector<std::string> words(w_.begin() + static_cast<std::ptrdiff_t>(i),
                                   w_.begin() + static_cast<std::ptrdiff_t>(i + n));
    return join(words, " ");
  }

  bool trigger_matches(const TriggerRule& rule, std::size_t i) const {
    for (std::size_t k = 0; k < rule.pattern.size(); ++k) {
      const auto& p = rule.pattern[k];
      const auto& t = w_[i + k];
      if (consumed_[i + k]) return false;
      if (p == "<word>") {
        if (is_punct(t) || is_placeholder(t) || lx_.is_stopword(t)) return false;
      } else if (p != t || quoted_[i + k]) {
        return false;
      }
    }
    return true;
  }

  // Length of "<adverb>* <base>" at i, or 0.
  std::size_t match_extent(std::size_t i) const {
    const auto& adverbs = catalog_.words("extentAdverb");
    const auto& bases = catalog_.words("extentBase");
    for (std::size_t a = std::min(adverbs.longest_tokens(), w_.size() - i); a >= 1; --a) {
      if (i + a >= w_.size() || !all_free(i, i + a + 1)) continue;
      if (adverbs.lookup(phrase_at(i, a)) && bases.lookup(w_[i + a])) return a + 1;
    }
    if (bases.lookup(w_[i])) return 1;
    return 0;
  }

  std::optional<std::pair<std::string, std::string>> classify(const std::string& phrase, std::size_t i,
                                                               std::size_t n) const {
    const bool after_number = i > 0 && (is_numeric(w_[i - 1]) || class_at(i - 1) == "unit");
    std::optional<std::pair<std::string, std::string>> found;
    for (const auto* cls : kClassPriority) {
      if (std::string_view(cls) == "color") {
        if (rules_.color(phrase)) {
          found = {{"color", phrase}};
          break;
        }
        continue;
      }
      auto canonical = catalog_.words(cls).lookup(phrase);
      if (!canonical) continue;
      if (std::string_view(cls) == "icon" && !catalog_.words("iconNoun").lookup(word(i + n))) continue;
      found = {{cls, *canonical}};
      break;
    }
    if (after_number) {
      if (auto noun = catalog_.words("countNoun").lookup(phrase)) return {{"countNoun", *noun}};
      if (auto unit = catalog_.words("unit").lookup(phrase)) return {{"unit", *unit}};
    }
    return found;
  }

  bool is_unknown_word(std::size_t i) const {
    const auto& t = w_[i];
    if (!free(i) || quoted_[i] || is_punct(t) || is_placeholder(t)) return false;
    if (lx_.is_stopword(t) || lx_.is_determiner(t) || lx_.is_coordinator(t) || lx_.is_stroke_noun(t)) return false;
    if (std::find(lx_.verbs.begin(), lx_.verbs.end(), t) != lx_.verbs.end()) return false;
    if (catalog_.words("extentAdverb").lookup(t)) return false;
    return true;
  }

  void label_ranges() {
    auto bound = [&](std::size_t i) { return is_numeric(w_[i]) || w_[i] == "<year>"; };
    for (std::size_t i = 0; i + 2 < w_.size(); ++i) {
      if (!all_free(i, i + 3) || !bound(i) || !bound(i + 2)) continue;
      const auto& c = w_[i + 1];
      if (std::find(lx_.range_connectors.begin(), lx_.range_connectors.end(), c) == lx_.range_connectors.end()) {
        continue;
      }
      add_piece({i, i + 3}, "range", "range");
      i += 2;
    }
  }

  std::optional<std::string> property_before(std::size_t i) const {
    for (std::size_t j = i; j-- > 0;) {
      if (j >= 1) {
        if (auto it = lx_.property_nouns.find(w_[j - 1] + " " + w_[j]); it != lx_.property_nouns.end()) {
          return it->second;
        }
      }
      if (auto it = lx_.property_nouns.find(w_[j]); it != lx_.property_nouns.end()) return it->second;
    }
    return std::nullopt;
  }

  void label_numbers() {
    for (std::size_t i = 0; i < w_.size(); ++i) {
      if (!free(i)) continue;
      bool unit_next = i + 1 < w_.size() && class_at(i + 1) == "unit";
      if (!is_numeric(w_[i]) && !(w_[i] == "<year>" && unit_next)) continue;
      std::size_t end = unit_next ? i + 2 : i + 1;
      std::string role;
      if (class_at(end) == "countNoun") {
        role = "count";
      } else if (i > 0) {
        if (auto it = lx_.number_prepositions.find(w_[i - 1]); it != lx_.number_prepositions.end()) {
          role = it->second;
        }
      }
      if (role.empty()) {
        if (auto prop = property_before(i)) role = *prop;
      }
      if (role.empty()) continue;
      if (unit_next) owner_[i + 1] = -1;
      add_piece({i, end}, role, "number");
      i = end - 1;
    }
  }

  void label_placeholders_and_literals() {
    for (std::size_t i = 0; i < w_.size(); ++i) {
      if (!free(i)) continue;
      const auto& t = w_[i];
      if (t == "<column>") {
        add_piece({i, i + 1}, "field", "placeholder");
      } else if (t == "<value>" || t == "<year>" || t == "<date>") {
        add_piece({i, i + 1}, "valueLiteral", "placeholder");
      } else if (quoted_[i]) {
        add_piece({i, i + 1}, "text", "quoted");
      } else if (mixes_letters_and_digits(t)) {
        add_piece({i, i + 1}, "objectName", "name");
      }
    }
  }

  bool is_head(std::size_t i) const {
    auto r = role_at(i);
    return r == "component" || r == "shape";
  }

  bool in_stroke_context(std::size_t i) const {
    std::optional<std::size_t> stroke;
    for (std::size_t j = 0; j < i; ++j) {
      if (lx_.is_stroke_noun(w_[j])) stroke = j;
    }
    for (auto s : stroke_triggers_) {
      if (s < i && (!stroke || s > *stroke)) stroke = s;
    }
    if (!stroke) return false;
    for (auto c : color_triggers_) {
      if (c > *stroke && c < i) return false;
    }
    return true;
  }

  void label_colors() {
    for (auto& p : pieces_) {
      if (p.role != "color" || p.span.empty()) continue;
      auto next = p.span.end;
      if (next < w_.size() && lx_.is_stroke_noun(w_[next])) {
        p.role = "strokeColor";
      } else if (is_head(next)) {
        p.role = "objectColor";
      } else if (in_stroke_context(p.span.begin)) {
        p.role = "strokeColor";
      }
    }
  }

  void label_value_shapes() {
    for (auto& p : pieces_) {
      if (p.role != "shape" || p.span.empty() || p.span.begin == 0) continue;
      if (role_at(p.span.begin - 1) == "valueLiteral") p.role = "objectShape";
    }
  }

  void label_wildcards() {
    for (std::size_t s = 0; s < w_.size(); ++s) {
      if (role_at(s) != "shape" || piece_at(s)->span.begin != s) continue;
      std::size_t j = s;
      std::vector<std::size_t> unknown;
      while (j > 0 && (is_unknown_word(j - 1) || role_at(j - 1) == "color" || role_at(j - 1) == "objectColor")) {
        --j;
        if (free(j)) unknown.push_back(j);
      }
      if (unknown.empty() || j == 0 || !lx_.is_determiner(w_[j - 1])) continue;
      std::sort(unknown.begin(), unknown.end());
      // Contiguous unknown runs become one wildcard chunk each.
      std::size_t b = unknown.front();
      for (std::size_t k = 1; k <= unknown.size(); ++k) {
        if (k == unknown.size() || unknown[k] != unknown[k - 1] + 1) {
          add_piece({b, unknown[k - 1] + 1}, "wildcard", "wildcard");
          if (k < unknown.size()) b = unknown[k];
        }
      }
      for (auto k = j; k < s; ++k) {
        if (auto* p = piece_at(k); p && p->role == "color") p->role = "objectColor";
      }
    }
  }

  void label_positions() {
    for (auto& p : pieces_) {
      if (p.span.empty() || p.cls != "position") continue;
      auto canonical = catalog_.words("position").lookup(phrase_at(p.span.begin, p.span.size()));
      bool lateral = canonical && (*canonical == "left" || *canonical == "right");
      bool after_the = p.span.begin > 0 && w_[p.span.begin - 1] == "the";
      p.role = lateral && !after_the ? "direction" : "position";
      if (p.role == "direction") p.cls = "direction";
    }
  }

  bool anchor_part(std::size_t i) const {
    auto r = role_at(i);
    return r == "component" || r == "shape" || r == "objectShape" || r == "valueLiteral" || r == "objectName" ||
           r == "wildcard" || r == "objectColor" || r == "field";
  }

  void label_anchors() {
    for (std::size_t idx = 0; idx < pieces_.size(); ++idx) {
      auto p = pieces_[idx];
      if (p.role != "position" || p.span.empty()) continue;
      std::size_t k = p.span.end;
      bool linked = false;
      if (word(k) == "of") {
        ++k;
        linked = true;
      }
      if (lx_.is_determiner(word(k))) {
        ++k;
        linked = true;
      }
      auto canonical = catalog_.words("position").lookup(phrase_at(p.span.begin, p.span.size()));
      bool preposition = canonical && phrase_at(p.span.begin, p.span.size()) != *canonical;  // above, below
      if (!linked && !preposition) continue;
      std::size_t e = k;
      while (e < w_.size() && anchor_part(e)) e = piece_at(e)->span.end;
      if (e == k) continue;
      merge({k, e}, "anchor", "anchor");
    }
  }

  bool accepted_by_detected(const std::string& role) const {
    for (const auto& intent : intents_.intents) {
      if (const auto* op = catalog_.find_operation(intent.name); op && op->accepts_role(role)) return true;
    }
    return false;
  }

  const Catalog& catalog_;
  const RuleTable& rules_;
  const TaggerLexicon& lx_;
  std::vector<std::string> w_;
  std::vector<bool> quoted_;
  std::vector<bool> consumed_;
  std::vector<int> owner_;
  std::vector<Piece> pieces_;
  std::vector<std::size_t> stroke_triggers_;
  std::vector<std::size_t> color_triggers_;
  IntentSet intents_;
};

}  // namespace

BioLabel BioLabel::parse(std::string_view s) {
  if (s == "O") return outside();
  if (s.size() > 2 && s[1] == '-' && (s[0] == 'B' || s[0] == 'I')) {
    return {s[0] == 'B' ? Prefix::kB : Prefix::kI, std::string(s.substr(2))};
  }
  throw Error(Errc::kSyntax, "malformed BIO label '" + std::string(s) + "'");
}

std::string BioLabel::str() const {
  switch (prefix) {
    case Prefix::kO: return "O";
    case Prefix::kB: return "B-" + role;
    case Prefix::kI: return "I-" + role;
  }
  return "O";
}

bool well_formed(const std::vector<BioLabel>& labels) {
  const BioLabel* prev = nullptr;
  for (const auto& l : labels) {
    if (l.prefix == BioLabel::Prefix::kO && !l.role.empty()) return false;
    if (l.prefix != BioLabel::Prefix::kO && l.role.empty()) return false;
    if (l.prefix == BioLabel::Prefix::kI) {
      if (!prev || prev->prefix == BioLabel::Prefix::kO || prev->role != l.role) return false;
    }
    prev = &l;
  }
  return true;
}

std::vector<Chunk> chunks(const std::vector<BioLabel>& labels) {
  std::vector<Chunk> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& l = labels[i];
    if (l.prefix == BioLabel::Prefix::kO) continue;
    bool continues = l.prefix == BioLabel::Prefix::kI && !out.empty() && out.back().span.end == i &&
                     out.back().role == l.role;
    if (continues) {
      out.back().span.end = i + 1;
    } else {
      out.push_back({{i, i + 1}, l.role});
    }
  }
  return out;
}

bool IntentSet::contains(std::string_view name) const {
  return std::any_of(intents.begin(), intents.end(), [&](const Intent& i) { return i.name == name; });
}

std::set<std::string> IntentSet::names() const {
  std::set<std::string> out;
  for (const auto& i : intents) out.insert(i.name);
  return out;
}

void IntentSet::add(const std::string& name, double score, TokenSpan trigger) {
  for (auto& i : intents) {
    if (i.name == name) {
      i.score = std::max(i.score, score);
      if (std::find(i.triggers.begin(), i.triggers.end(), trigger) == i.triggers.end()) {
        i.triggers.push_back(trigger);
      }
      return;
    }
  }
  intents.push_back({name, score, {trigger}});
}

void IntentSet::finalize(double threshold) {
  intents.erase(std::remove_if(intents.begin(), intents.end(), [&](const Intent& i) { return i.score <= threshold; }),
                intents.end());
  for (auto& i : intents) {
    std::sort(i.triggers.begin(), i.triggers.end(),
              [](const TokenSpan& a, const TokenSpan& b) { return a.begin < b.begin; });
  }
  std::stable_sort(intents.begin(), intents.end(), [](const Intent& a, const Intent& b) {
    auto first = [](const Intent& i) { return i.triggers.empty() ? std::size_t(-1) : i.triggers.front().begin; };
    return first(a) < first(b);
  });
}

nlohmann::json TaggedUtterance::to_json() const {
  nlohmann::json labels_json = nlohmann::json::array();
  for (const auto& l : labels) labels_json.push_back(l.str());
  nlohmann::json intents_json = nlohmann::json::array();
  for (const auto& i : intents.intents) intents_json.push_back(i.name);
  return {{"text", abstracted.original},
          {"tokens", abstracted.abstracted_tokens},
          {"intents", intents_json},
          {"labels", labels_json}};
}

ReferenceTagger::ReferenceTagger(const Catalog& catalog, const RuleTable& rules)
    : catalog_(catalog), rules_(rules) {
  for (const auto& t : rules_.tagger.triggers) {
    for (const auto& intent : t.intents) {
      if (!catalog_.find_operation(intent)) {
        throw Error(Errc::kUnknownOperation, "trigger names unknown operation '" + intent + "'");
      }
    }
    triggers_.push_back(&t);
  }
  std::stable_sort(triggers_.begin(), triggers_.end(), [](const TriggerRule* a, const TriggerRule* b) {
    return a->pattern.size() > b->pattern.size();
  });
}

std::string ReferenceTagger::version() const { return catalog_.version() + "/" + rules_.version; }

TaggedUtterance ReferenceTagger::tag(const AbstractedUtterance& abstracted) const {
  Work work(abstracted, catalog_, rules_);
  work.run_triggers(triggers_);
  work.run_vocabulary();
  work.run_context();
  work.infer_intents();
  TaggedUtterance out;
  out.abstracted = abstracted;
  out.intents = work.intents();
  out.labels = work.labels();
  return out;
}

}  // namespace nlchart
