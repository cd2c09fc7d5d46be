#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlchart/catalog.hpp"
#include "nlchart/dataset.hpp"
#include "nlchart/metrics.hpp"
#include "nlchart/rules.hpp"
#include "nlchart/tagger.hpp"

namespace nlchart {

/// Where a slot draws its fillers from. Each filler has the surface text
/// that goes into the utterance and the canonical text that goes into the
/// action skeleton.
struct SlotSpec {
  std::optional<std::string> role;  // entity role; nullopt = decorative, labeled O
  std::string from;                 // vocab:<class> | color | extent | column[:type] | value[:column] | integer:lo..hi
  std::vector<std::pair<std::string, std::string>> values;  // explicit (surface, canonical), overrides `from`
  std::vector<std::string> only;  // canonical whitelist applied to `from`
  std::string suffix;      // appended to every surface ("px", "%") inside the chunk
  bool continues = false;  // first token is I-role: extends the preceding chunk
};

/// One pattern element.
struct TemplatePart {
  enum class Kind { kWord, kGroup, kSlot };

  Kind kind = Kind::kWord;
  std::vector<std::string> alternatives;  // kWord: one entry; kGroup: may contain ""
  std::string slot;                       // kSlot
  bool trigger = false;                   // marked with '^'
};

struct Template {
  std::string id;
  std::string pattern;
  std::vector<std::string> intents;
  std::map<std::string, SlotSpec> slots;
  std::vector<std::string> actions;  // skeletons with {slot} references
  std::vector<TemplatePart> parts;   // parsed pattern

  /// Throws Error(kTemplate) on undeclared slots, unknown roles or
  /// operations, and malformed patterns.
  static Template from_json(const nlohmann::json& j, const Catalog& catalog = Catalog::builtin());
  nlohmann::json to_json() const;
};

std::vector<Template> load_templates(const nlohmann::json& doc, const Catalog& catalog = Catalog::builtin());
/// The shipped template set.
const std::vector<Template>& builtin_templates();

struct GoldRecord {
  std::string template_id;
  std::string text;
  TaggedUtterance gold;  // abstracted tokens, intents with trigger spans, labels
  std::vector<std::string> actions;

  nlohmann::json to_json() const;
  /// Re-abstracts `text` with `index`; throws Error(kMisaligned) when the
  /// recorded abstracted tokens differ.
  static GoldRecord from_json(const nlohmann::json& j, const EntityIndex& index);
};

/// Deterministic for a fixed seed. Templates are visited round-robin, each
/// walking its own shuffled combination order; duplicate texts are dropped.
/// Throws Error(kTemplate) when a slot has an empty fill domain.
std::vector<GoldRecord> expand(const std::vector<Template>& templates, const Dataset& dataset, const RuleTable& rules,
                               std::size_t limit, std::uint64_t seed, const Catalog& catalog = Catalog::builtin());

/// Number of distinct pattern instantiations of one template.
std::uint64_t combinations(const Template& t, const Dataset& dataset, const RuleTable& rules,
                           const Catalog& catalog = Catalog::builtin());

/// Phrases a template's utterances start with, for autocompletion. Groups
/// and up to two slots with at most `max_domain` dataset-independent
/// fillers are expanded; the phrase stops at the first other slot.
std::vector<std::string> leading_phrases(const Template& t, const RuleTable& rules,
                                         const Catalog& catalog = Catalog::builtin(), std::size_t max_domain = 8);

struct BenchmarkReport {
  Metrics metrics;
  std::size_t records = 0;
  std::size_t action_matches = 0;  // end-to-end serialized action equality
  double action_accuracy = 0;
  std::vector<std::string> misses;  // texts whose tags differ from gold, first 20

  nlohmann::json to_json() const;
};

/// Abstracts and tags each record's text and scores it against the gold tags;
/// also synthesizes and compares actions.
BenchmarkReport run_benchmark(const Tagger& tagger, const std::vector<GoldRecord>& records, const EntityIndex& index,
                              const Catalog& catalog = Catalog::builtin(), const RuleTable& rules = RuleTable::builtin());

}  // namespace nlchart
