#pragma once

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nlchart/abstractor.hpp"
#include "nlchart/catalog.hpp"
#include "nlchart/rules.hpp"

namespace nlchart {

struct BioLabel {
  enum class Prefix { kB, kI, kO };

  Prefix prefix = Prefix::kO;
  std::string role;  // empty iff O

  static BioLabel outside() { return {}; }
  static BioLabel begin(std::string role) { return {Prefix::kB, std::move(role)}; }
  static BioLabel inside(std::string role) { return {Prefix::kI, std::move(role)}; }
  /// "O", "B-color", "I-extent"; throws Error(kSyntax) otherwise.
  static BioLabel parse(std::string_view s);
  std::string str() const;

  bool operator==(const BioLabel&) const = default;
};

/// I-x only after B-x or I-x; O carries no role.
bool well_formed(const std::vector<BioLabel>& labels);

struct Chunk {
  TokenSpan span;
  std::string role;

  bool operator==(const Chunk&) const = default;
};

/// Chunks in the conlleval reading: an I- that does not continue a chunk of
/// the same role starts a new one.
std::vector<Chunk> chunks(const std::vector<BioLabel>& labels);

struct Intent {
  std::string name;
  double score = 1.0;
  std::vector<TokenSpan> triggers;  // abstracted-token spans that evoked it
};

/// Detected operations, ordered by first trigger.
struct IntentSet {
  std::vector<Intent> intents;

  bool contains(std::string_view name) const;
  std::set<std::string> names() const;
  /// Adds a trigger to an existing intent or appends a new one.
  void add(const std::string& name, double score, TokenSpan trigger);
  /// Drops intents at or below `threshold`; restores trigger order.
  void finalize(double threshold);
};

struct TaggedUtterance {
  AbstractedUtterance abstracted;
  IntentSet intents;
  std::vector<BioLabel> labels;  // one per abstracted token

  const std::vector<std::string>& tokens() const { return abstracted.abstracted_tokens; }
  nlohmann::json to_json() const;
};

/// Contract shared by the reference tagger and any learned tagger.
class Tagger {
 public:
  virtual ~Tagger() = default;
  virtual TaggedUtterance tag(const AbstractedUtterance& abstracted) const = 0;
  virtual std::string name() const = 0;
  virtual std::string version() const = 0;
};

/// Deterministic lexicon and pattern tagger driven by the catalog
/// vocabulary and the rule table's tagger lexicons.
class ReferenceTagger final : public Tagger {
 public:
  explicit ReferenceTagger(const Catalog& catalog = Catalog::builtin(),
                           const RuleTable& rules = RuleTable::builtin());

  TaggedUtterance tag(const AbstractedUtterance& abstracted) const override;
  std::string name() const override { return "reference"; }
  std::string version() const override;

 private:
  const Catalog& catalog_;
  const RuleTable& rules_;
  std::vector<const TriggerRule*> triggers_;  // longest pattern first
};

}  // namespace nlchart
