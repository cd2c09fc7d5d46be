#include "nlchart/corpus.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <unordered_set>

#include "embedded.hpp"
#include "nlchart/abstractor.hpp"
#include "nlchart/error.hpp"
#include "nlchart/synthesizer.hpp"

namespace nlchart {

namespace {

using Filler = std::pair<std::string, std::string>;  // surface, canonical

std::string dotted(std::string s) {
  std::replace(s.begin(), s.end(), ' ', '.');
  return s;
}

std::vector<TemplatePart> parse_pattern(const std::string& pattern, const std::string& id) {
  std::vector<TemplatePart> parts;
  std::size_t i = 0;
  auto fail = [&](const std::string& why) {
    throw Error(Errc::kTemplate, "template '" + id + "': " + why + " at offset " + std::to_string(i));
  };
  while (i < pattern.size()) {
    if (pattern[i] == ' ') {
      ++i;
      continue;
    }
    TemplatePart part;
    if (pattern[i] == '^') {
      part.trigger = true;
      ++i;
    }
    if (i >= pattern.size()) fail("dangling trigger marker");
    if (pattern[i] == '(') {
      auto close = pattern.find(')', i);
      if (close == std::string::npos) fail("unclosed group");
      part.kind = TemplatePart::Kind::kGroup;
      std::string body = pattern.substr(i + 1, close - i - 1);
      std::size_t start = 0;
      for (std::size_t k = 0; k <= body.size(); ++k) {
        if (k == body.size() || body[k] == '|') {
          part.alternatives.push_back(trim(body.substr(start, k - start)));
          start = k + 1;
        }
      }
      i = close + 1;
    } else if (pattern[i] == '{') {
      auto close = pattern.find('}', i);
      if (close == std::string::npos) fail("unclosed slot");
      part.kind = TemplatePart::Kind::kSlot;
      part.slot = pattern.substr(i + 1, close - i - 1);
      if (part.slot.empty()) fail("empty slot name");
      i = close + 1;
    } else {
      auto end = pattern.find(' ', i);
      if (end == std::string::npos) end = pattern.size();
      part.alternatives.push_back(pattern.substr(i, end - i));
      i = end;
    }
    parts.push_back(std::move(part));
  }
  if (parts.empty()) fail("empty pattern");
  return parts;
}

std::vector<std::string> skeleton_slots(const std::string& skeleton) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < skeleton.size(); ++i) {
    if (skeleton[i] != '{') continue;
    auto close = skeleton.find_first_of("{},", i + 1);
    if (close == std::string::npos || skeleton[close] != '}') continue;
    auto name = skeleton.substr(i + 1, close - i - 1);
    // "{setColor, ..." opens an action, never a slot
    if (!name.empty() && name.find(' ') == std::string::npos) out.push_back(name);
  }
  return out;
}

/// Fill domain of one slot, in a fixed order.
std::vector<Filler> domain(const SlotSpec& spec, const Dataset& dataset, const RuleTable& rules,
                           const Catalog& catalog) {
  if (!spec.values.empty()) return spec.values;
  std::vector<Filler> out;
  const auto& from = spec.from;
  auto colon = from.find(':');
  const std::string kind = from.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : from.substr(colon + 1);
  if (kind == "vocab") {
    for (const auto& [surface, canonical] : catalog.words(arg).entries()) {
      auto c = canonical;
      if (auto k = c.find(':'); k != std::string::npos) c = c.substr(k + 1);
      out.emplace_back(surface, dotted(c));
    }
  } else if (kind == "color") {
    for (const auto& [name, rgb] : rules.colors) out.emplace_back(name, dotted(name));
  } else if (kind == "extent") {
    for (const auto& [base, canon_base] : catalog.words("extentBase").entries()) {
      out.emplace_back(base, canon_base);
      for (const auto& [adverb, canon_adverb] : catalog.words("extentAdverb").entries()) {
        out.emplace_back(adverb + " " + base, dotted(canon_adverb + " " + canon_base));
      }
    }
  } else if (kind == "column") {
    for (const auto& c : dataset.columns()) {
      if (arg.empty() || arg == to_string(c.type)) out.emplace_back(c.name, c.name);
    }
  } else if (kind == "value") {
    for (const auto& c : dataset.columns()) {
      if (c.type != SemanticType::kCategorical) continue;
      if (!arg.empty() && to_lower(arg) != to_lower(c.name)) continue;
      for (const auto& v : c.distinct_values) out.emplace_back(v, v);
    }
  } else if (kind == "integer") {
    auto dots = arg.find("..");
    if (dots == std::string::npos) throw Error(Errc::kTemplate, "integer domain needs lo..hi: '" + from + "'");
    long lo = std::stol(arg.substr(0, dots)), hi = std::stol(arg.substr(dots + 2));
    for (long v = lo; v <= hi; ++v) out.emplace_back(std::to_string(v), std::to_string(v));
  } else {
    throw Error(Errc::kTemplate, "unknown fill source '" + from + "'");
  }
  if (!spec.only.empty()) {
    std::erase_if(out, [&](const Filler& f) {
      return std::find(spec.only.begin(), spec.only.end(), f.second) == spec.only.end();
    });
  }
  return out;
}

/// Radix layout of a template: one digit per group occurrence and one per
/// distinct slot name.
struct Layout {
  std::vector<std::size_t> radix;
  std::vector<std::size_t> digit_of_part;  // parts index -> digit, npos for words
  std::map<std::string, std::size_t> digit_of_slot;
  std::map<std::string, std::vector<Filler>> domains;
  std::uint64_t total = 1;
};

Layout layout(const Template& t, const Dataset& dataset, const RuleTable& rules, const Catalog& catalog) {
  Layout l;
  for (const auto& part : t.parts) {
    std::size_t digit = std::string::npos;
    if (part.kind == TemplatePart::Kind::kGroup) {
      digit = l.radix.size();
      l.radix.push_back(part.alternatives.size());
    } else if (part.kind == TemplatePart::Kind::kSlot) {
      auto it = l.digit_of_slot.find(part.slot);
      if (it == l.digit_of_slot.end()) {
        auto d = domain(t.slots.at(part.slot), dataset, rules, catalog);
        if (d.empty()) throw Error(Errc::kTemplate, "template '" + t.id + "': slot '" + part.slot + "' has no fillers");
        digit = l.radix.size();
        l.radix.push_back(d.size());
        l.digit_of_slot[part.slot] = digit;
        l.domains[part.slot] = std::move(d);
      } else {
        digit = it->second;
      }
    }
    l.digit_of_part.push_back(digit);
  }
  for (auto r : l.radix) {
    l.total = l.total > UINT64_MAX / r ? UINT64_MAX : l.total * r;
  }
  return l;
}

std::string substitute(std::string skeleton, const std::map<std::string, std::string>& canon) {
  for (const auto& [slot, value] : canon) {
    const std::string key = "{" + slot + "}";
    for (auto pos = skeleton.find(key); pos != std::string::npos; pos = skeleton.find(key, pos + value.size())) {
      skeleton.replace(pos, key.size(), value);
    }
  }
  return skeleton;
}

struct Instance {
  std::string text;
  std::vector<BioLabel> labels;                // original tokens
  std::vector<TokenSpan> marked;               // '^' spans, original tokens
  std::map<std::string, TokenSpan> slot_span;  // first occurrence, original tokens
  std::vector<std::string> actions;
};

Instance instantiate(const Template& t, const Layout& l, std::uint64_t index) {
  std::vector<std::size_t> digits(l.radix.size());
  for (std::size_t d = 0; d < l.radix.size(); ++d) {
    digits[d] = index % l.radix[d];
    index /= l.radix[d];
  }
  Instance inst;
  std::vector<std::string> pieces;
  std::map<std::string, std::string> canon;
  std::size_t at = 0;
  for (std::size_t p = 0; p < t.parts.size(); ++p) {
    const auto& part = t.parts[p];
    std::string surface;
    std::optional<std::string> role;
    bool continues = false;
    if (part.kind == TemplatePart::Kind::kWord) {
      surface = part.alternatives.front();
    } else if (part.kind == TemplatePart::Kind::kGroup) {
      surface = part.alternatives[digits[l.digit_of_part[p]]];
    } else {
      const auto& filler = l.domains.at(part.slot)[digits[l.digit_of_part[p]]];
      const auto& spec = t.slots.at(part.slot);
      surface = filler.first + (spec.suffix.empty() ? "" : " " + spec.suffix);
      canon[part.slot] = filler.second;
      role = spec.role;
      continues = spec.continues;
    }
    const auto n = tokenize(surface).size();
    for (std::size_t k = 0; k < n; ++k) {
      if (role) {
        inst.labels.push_back(k == 0 && !continues ? BioLabel::begin(*role) : BioLabel::inside(*role));
      } else {
        inst.labels.push_back(BioLabel::outside());
      }
    }
    TokenSpan span{at, at + n};
    if (part.trigger) inst.marked.push_back(span);
    if (part.kind == TemplatePart::Kind::kSlot && !inst.slot_span.count(part.slot)) inst.slot_span[part.slot] = span;
    at += n;
    if (!surface.empty()) pieces.push_back(surface);
  }
  inst.text = join(pieces, " ");
  for (const auto& a : t.actions) inst.actions.push_back(substitute(a, canon));
  return inst;
}

/// Maps original-token labels and spans onto the abstracted tokens.
GoldRecord project(const Template& t, const Instance& inst, const EntityIndex& index, const Catalog& catalog,
                   const RuleTable& rules) {
  GoldRecord rec;
  rec.template_id = t.id;
  rec.text = inst.text;
  // Round-trip through the action grammar so quoting matches serialized output.
  for (const auto& a : inst.actions) {
    try {
      rec.actions.push_back(serialize_action(parse_action(a, catalog)));
    } catch (const Error& e) {
      throw Error(Errc::kTemplate, t.id + ": action '" + a + "' does not parse: " + e.what());
    }
  }
  auto abs = abstract(inst.text, index);
  if (abs.tokens.size() != inst.labels.size()) {
    throw Error(Errc::kTemplate, "template '" + t.id + "': token count drifted for '" + inst.text + "'");
  }
  const auto n = abs.abstracted_tokens.size();
  std::vector<TokenSpan> orig(n);
  for (std::size_t i = 0; i < n; ++i) orig[i] = abs.original_span({i, i + 1});
  auto to_abstracted = [&](TokenSpan s) {
    TokenSpan out{n, 0};
    for (std::size_t i = 0; i < n; ++i) {
      if (!orig[i].overlaps(s)) continue;
      out.begin = std::min(out.begin, i);
      out.end = std::max(out.end, i + 1);
    }
    return out.begin < out.end ? out : TokenSpan{};
  };
  rec.gold.labels.resize(n);
  std::string prev;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& first = inst.labels[orig[i].begin];
    if (first.prefix == BioLabel::Prefix::kO) {
      prev.clear();
      continue;
    }
    bool begins = first.prefix == BioLabel::Prefix::kB || prev != first.role;
    rec.gold.labels[i] = begins ? BioLabel::begin(first.role) : BioLabel::inside(first.role);
    prev = first.role;
  }
  for (std::size_t k = 0; k < t.intents.size(); ++k) {
    const auto& name = t.intents[k];
    if (k < inst.marked.size()) {
      rec.gold.intents.add(name, 1.0, to_abstracted(inst.marked[k]));
      continue;
    }
    // Unmarked intents are evoked by one slot: the first whose role the
    // lexicon maps to the intent, else the first the operation accepts.
    const auto* op = catalog.find_operation(name);
    const auto& lx = rules.tagger;
    std::optional<TokenSpan> evoking, accepted;
    for (const auto& part : t.parts) {
      if (part.kind != TemplatePart::Kind::kSlot) continue;
      const auto& role = t.slots.at(part.slot).role;
      if (!role || !op->accepts_role(*role)) continue;
      const auto span = inst.slot_span.at(part.slot);
      if (!accepted) accepted = span;
      auto maps = [&](const auto& table) {
        auto it = table.find(*role);
        return it != table.end() && it->second == name;
      };
      if (!evoking && (maps(lx.verb_roles) || maps(lx.implied_roles))) evoking = span;
    }
    bool any = evoking || accepted;
    if (any) rec.gold.intents.add(name, 1.0, to_abstracted(evoking ? *evoking : *accepted));
    if (!any) rec.gold.intents.add(name, 1.0, TokenSpan{});
  }
  rec.gold.intents.finalize(0.0);
  rec.gold.abstracted = std::move(abs);
  return rec;
}

}  // namespace

// ---------------------------------------------------------------------------

Template Template::from_json(const nlohmann::json& j, const Catalog& catalog) {
  Template t;
  t.id = j.value("id", std::string());
  auto fail = [&](const std::string& why) { throw Error(Errc::kTemplate, "template '" + t.id + "': " + why); };
  if (t.id.empty()) fail("missing id");
  if (!j.contains("pattern") || !j["pattern"].is_string()) fail("missing pattern");
  t.pattern = j["pattern"].get<std::string>();
  t.intents = j.value("intents", std::vector<std::string>{});
  t.actions = j.value("actions", std::vector<std::string>{});
  for (const auto& name : t.intents) {
    if (!catalog.find_operation(name)) fail("unknown operation '" + name + "'");
  }
  if (j.contains("slots")) {
    for (const auto& [name, s] : j["slots"].items()) {
      SlotSpec spec;
      if (s.contains("role") && !s["role"].is_null()) {
        spec.role = s["role"].get<std::string>();
        if (!catalog.find_entity_role(*spec.role)) fail("unknown role '" + *spec.role + "'");
      }
      spec.from = s.value("from", std::string());
      spec.suffix = s.value("suffix", std::string());
      spec.only = s.value("only", std::vector<std::string>{});
      spec.continues = s.value("continues", false);
      if (s.contains("values")) {
        for (const auto& v : s["values"]) {
          if (v.is_array()) {
            spec.values.emplace_back(v.at(0).get<std::string>(), v.at(1).get<std::string>());
          } else {
            auto surface = v.get<std::string>();
            spec.values.emplace_back(surface, is_quoted(surface) ? unquote(surface) : surface);
          }
        }
      }
      if (spec.from.empty() && spec.values.empty()) fail("slot '" + name + "' has no source");
      t.slots[name] = std::move(spec);
    }
  }
  t.parts = parse_pattern(t.pattern, t.id);
  std::set<std::string> used;
  std::size_t markers = 0;
  for (const auto& p : t.parts) {
    markers += p.trigger;
    if (p.kind != TemplatePart::Kind::kSlot) continue;
    if (!t.slots.count(p.slot)) fail("undeclared slot '" + p.slot + "'");
    used.insert(p.slot);
  }
  if (markers > t.intents.size()) fail("more trigger markers than intents");
  for (const auto& [name, spec] : t.slots) {
    if (!used.count(name)) fail("slot '" + name + "' is not in the pattern");
  }
  for (const auto& a : t.actions) {
    for (const auto& s : skeleton_slots(a)) {
      if (!t.slots.count(s)) fail("action references undeclared slot '" + s + "'");
    }
  }
  return t;
}

nlohmann::json Template::to_json() const {
  nlohmann::json slots_json = nlohmann::json::object();
  for (const auto& [name, s] : slots) {
    nlohmann::json j;
    j["role"] = s.role ? nlohmann::json(*s.role) : nlohmann::json(nullptr);
    if (!s.from.empty()) j["from"] = s.from;
    if (!s.suffix.empty()) j["suffix"] = s.suffix;
    if (!s.only.empty()) j["only"] = s.only;
    if (s.continues) j["continues"] = true;
    if (!s.values.empty()) {
      j["values"] = nlohmann::json::array();
      for (const auto& [surface, canonical] : s.values) j["values"].push_back({surface, canonical});
    }
    slots_json[name] = j;
  }
  return {{"id", id}, {"pattern", pattern}, {"intents", intents}, {"slots", slots_json}, {"actions", actions}};
}

std::vector<Template> load_templates(const nlohmann::json& doc, const Catalog& catalog) {
  const auto& list = doc.is_object() ? doc.at("templates") : doc;
  if (!list.is_array()) throw Error(Errc::kTemplate, "templates must be an array");
  std::vector<Template> out;
  std::set<std::string> ids;
  for (const auto& j : list) {
    out.push_back(Template::from_json(j, catalog));
    if (!ids.insert(out.back().id).second) throw Error(Errc::kTemplate, "duplicate template id '" + out.back().id + "'");
  }
  return out;
}

const std::vector<Template>& builtin_templates() {
  static const std::vector<Template> templates = load_templates(nlohmann::json::parse(embedded::kTemplates));
  return templates;
}

std::vector<std::string> leading_phrases(const Template& t, const RuleTable& rules, const Catalog& catalog,
                                         std::size_t max_domain) {
  static const Dataset kNoData;
  constexpr std::size_t kMaxExpandedSlots = 2;
  std::vector<std::vector<std::string>> choices;
  std::size_t expanded = 0;
  for (const auto& part : t.parts) {
    if (part.kind != TemplatePart::Kind::kSlot) {
      choices.push_back(part.alternatives);
      continue;
    }
    const auto& spec = t.slots.at(part.slot);
    const auto kind = spec.from.substr(0, spec.from.find(':'));
    if (spec.values.empty() && (kind == "column" || kind == "value")) break;
    if (spec.role == "text" || spec.role == "name") break;  // free text reads badly as a completion
    if (kind == "integer" || expanded == kMaxExpandedSlots) break;
    ++expanded;
    // one surface per canonical keeps synonyms from multiplying the list
    std::vector<std::string> surfaces;
    std::set<std::string> seen;
    for (const auto& [surface, canonical] : domain(spec, kNoData, rules, catalog)) {
      if (seen.insert(canonical).second) surfaces.push_back(surface + spec.suffix);
    }
    if (surfaces.empty() || surfaces.size() > max_domain) break;
    choices.push_back(std::move(surfaces));
  }
  std::vector<std::string> out{""};
  for (const auto& alts : choices) {
    std::vector<std::string> next;
    for (const auto& prefix : out) {
      for (const auto& a : alts) {
        if (a.empty()) next.push_back(prefix);
        else next.push_back(prefix.empty() ? a : prefix + " " + a);
      }
    }
    out = std::move(next);
  }
  std::erase(out, "");
  return out;
}

std::uint64_t combinations(const Template& t, const Dataset& dataset, const RuleTable& rules, const Catalog& catalog) {
  return layout(t, dataset, rules, catalog).total;
}

std::vector<GoldRecord> expand(const std::vector<Template>& templates, const Dataset& dataset, const RuleTable& rules,
                               std::size_t limit, std::uint64_t seed, const Catalog& catalog) {
  std::vector<GoldRecord> out;
  if (limit == 0) return out;
  const auto index = EntityIndex::build(dataset, rules.defaults.value_index_cap);

  // Per-template combination order; small spaces are shuffled exhaustively,
  // large ones are sampled without replacement.
  constexpr std::uint64_t kExhaustive = 1u << 16;
  struct Walk {
    Layout layout;
    std::mt19937_64 rng;
    std::vector<std::uint64_t> order;
    std::unordered_set<std::uint64_t> seen;
    std::size_t next = 0;
    bool done = false;
  };
  std::vector<Walk> walks;
  for (std::size_t k = 0; k < templates.size(); ++k) {
    Walk w{layout(templates[k], dataset, rules, catalog), std::mt19937_64(), {}, {}, 0, false};
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(k)};
    w.rng.seed(seq);
    if (w.layout.total <= kExhaustive) {
      w.order.resize(w.layout.total);
      std::iota(w.order.begin(), w.order.end(), 0);
      for (std::size_t i = w.order.size(); i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(w.order[i - 1], w.order[pick(w.rng)]);
      }
    }
    walks.push_back(std::move(w));
  }
  auto draw = [&](Walk& w) -> std::optional<std::uint64_t> {
    if (!w.order.empty() || w.layout.total <= kExhaustive) {
      if (w.next >= w.order.size()) return std::nullopt;
      return w.order[w.next++];
    }
    // sparse space: give up after many consecutive repeats
    std::uniform_int_distribution<std::uint64_t> pick(0, w.layout.total - 1);
    for (int tries = 0; tries < 64; ++tries) {
      auto i = pick(w.rng);
      if (w.seen.insert(i).second) return i;
    }
    return std::nullopt;
  };

  std::unordered_set<std::string> texts;
  std::size_t live = walks.size();
  while (out.size() < limit && live > 0) {
    for (std::size_t k = 0; k < walks.size() && out.size() < limit; ++k) {
      auto& w = walks[k];
      if (w.done) continue;
      // skip over duplicate texts within this template's turn
      for (;;) {
        auto i = draw(w);
        if (!i) {
          w.done = true;
          --live;
          break;
        }
        auto inst = instantiate(templates[k], w.layout, *i);
        if (!texts.insert(inst.text).second) continue;
        out.push_back(project(templates[k], inst, index, catalog, rules));
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

nlohmann::json GoldRecord::to_json() const {
  nlohmann::json intents = nlohmann::json::array();
  for (const auto& i : gold.intents.intents) {
    nlohmann::json triggers = nlohmann::json::array();
    for (const auto& t : i.triggers) triggers.push_back({t.begin, t.end});
    intents.push_back({{"name", i.name}, {"triggers", triggers}});
  }
  nlohmann::json labels = nlohmann::json::array();
  for (const auto& l : gold.labels) labels.push_back(l.str());
  return {{"template", template_id}, {"text", text},      {"tokens", gold.abstracted.abstracted_tokens},
          {"intents", intents},      {"labels", labels}, {"actions", actions}};
}

GoldRecord GoldRecord::from_json(const nlohmann::json& j, const EntityIndex& index) {
  GoldRecord rec;
  rec.template_id = j.value("template", std::string());
  rec.text = j.at("text").get<std::string>();
  rec.actions = j.value("actions", std::vector<std::string>{});
  rec.gold.abstracted = abstract(rec.text, index);
  auto tokens = j.at("tokens").get<std::vector<std::string>>();
  if (tokens != rec.gold.abstracted.abstracted_tokens) {
    throw Error(Errc::kMisaligned, "abstracted tokens differ for '" + rec.text + "'");
  }
  for (const auto& l : j.at("labels")) rec.gold.labels.push_back(BioLabel::parse(l.get<std::string>()));
  if (rec.gold.labels.size() != tokens.size()) throw Error(Errc::kMisaligned, "label count differs for '" + rec.text + "'");
  for (const auto& i : j.at("intents")) {
    for (const auto& t : i.at("triggers")) {
      rec.gold.intents.add(i.at("name").get<std::string>(), 1.0, {t.at(0).get<std::size_t>(), t.at(1).get<std::size_t>()});
    }
  }
  rec.gold.intents.finalize(0.0);
  return rec;
}

nlohmann::json BenchmarkReport::to_json() const {
  return {{"records", records},
          {"metrics", metrics.to_json()},
          {"action_matches", action_matches},
          {"action_accuracy", action_accuracy},
          {"misses", misses}};
}

BenchmarkReport run_benchmark(const Tagger& tagger, const std::vector<GoldRecord>& records, const EntityIndex& index,
                              const Catalog& catalog, const RuleTable& rules) {
  BenchmarkReport report;
  report.records = records.size();
  std::vector<TaggedUtterance> predictions, gold;
  for (const auto& r : records) {
    auto tagged = tagger.tag(abstract(r.text, index));
    bool tags_match = tagged.labels == r.gold.labels && tagged.intents.names() == r.gold.intents.names();
    if (!tags_match && report.misses.size() < 20) report.misses.push_back(r.text);
    if (synthesize(tagged, catalog, rules).serialized() == r.actions) ++report.action_matches;
    predictions.push_back(std::move(tagged));
    gold.push_back(r.gold);
  }
  if (!records.empty()) {
    report.metrics = evaluate(predictions, gold);
    report.action_accuracy = static_cast<double>(report.action_matches) / static_cast<double>(records.size());
  }
  return report;
}

}  // namespace nlchart
