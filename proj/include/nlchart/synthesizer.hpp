#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlchart/action.hpp"
#include "nlchart/tagger.hpp"

namespace nlchart {

/// One BIO chunk awaiting assignment.
struct EntityCandidate {
  std::string role;
  std::string value;  // binding canonical for a lone placeholder, else the original text
  TokenSpan span;     // abstracted-token span
  bool consumed = false;
};

/// Where a candidate ended up. Exactly one per candidate.
struct Disposition {
  enum class Kind {
    kObject,     // object of `action`
    kParameter,  // parameter of `action`
    kModifier,   // folded into the selector of candidate `into`
    kAnchor,     // anchor of the position candidate `into`
    kOrphan,     // packaged alone as orphan `action`
  };

  Kind kind = Kind::kOrphan;
  std::optional<std::size_t> action;
  std::optional<std::size_t> into;
};

const char* to_string(Disposition::Kind k);

struct ActionTrace {
  std::string intent;  // "*" for orphans
  TokenSpan trigger;
  std::vector<std::size_t> candidates;  // consumed directly, in token order
  std::string rule;                     // matched | duplicated | residual | orphan
  std::vector<std::string> defaults;    // slots filled without a candidate
};

struct ActionSequence {
  std::vector<EditingAction> actions;  // ranked
  std::vector<ActionTrace> trace;      // parallel to actions
  std::vector<EntityCandidate> candidates;
  std::vector<Disposition> dispositions;  // parallel to candidates

  std::vector<std::string> serialized() const;
  nlohmann::json to_json() const;
};

/// One candidate per chunk, in token order.
std::vector<EntityCandidate> extract_candidates(const TaggedUtterance& tagged);

/// Stage 3. Total: an utterance nothing can be made of yields orphans or an
/// empty sequence, never an error.
ActionSequence synthesize(const TaggedUtterance& tagged, const Catalog& catalog = Catalog::builtin(),
                          const RuleTable& rules = RuleTable::builtin());

/// Permutation that stably sorts actions by (category rank, source span
/// start) with orphans after every categorized action.
std::vector<std::size_t> rank_order(const std::vector<EditingAction>& actions,
                                    const Catalog& catalog = Catalog::builtin());

}  // namespace nlchart
