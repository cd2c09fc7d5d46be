#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "json.hpp"
#include "nlchart/abstractor.hpp"
#include "nlchart/engine.hpp"
#include "nlchart/synthesizer.hpp"
#include "nlchart/tagger.hpp"

namespace nlchart {

/// Every intermediate of one utterance, for explanation and debugging.
struct Parse {
  std::string utterance;
  TaggedUtterance tagged;  // carries the abstracted utterance
  ActionSequence sequence;

  nlohmann::json to_json() const;
  /// Recognized entity spans over the original text: byte offsets, role,
  /// and the dataset binding when the span was abstracted.
  nlohmann::json highlights() const;
  /// Multi-line human-readable account of all three stages.
  std::string explain() const;
};

/// Utterance -> ranked action sequence over one dataset.
class Parser {
 public:
  explicit Parser(std::shared_ptr<const Dataset> dataset, const Catalog& catalog = Catalog::builtin(),
                  const RuleTable& rules = RuleTable::builtin());

  Parse parse(std::string_view utterance) const;

  const Dataset& dataset() const { return *dataset_; }
  const EntityIndex& index() const { return index_; }
  const Tagger& tagger() const { return tagger_; }

 private:
  std::shared_ptr<const Dataset> dataset_;
  const Catalog& catalog_;
  const RuleTable& rules_;
  EntityIndex index_;
  ReferenceTagger tagger_;
};

/// A parser and a session over the same dataset.
class Workspace {
 public:
  explicit Workspace(std::shared_ptr<const Dataset> dataset, const Catalog& catalog = Catalog::builtin(),
                     const RuleTable& rules = RuleTable::builtin());
  /// Adopts an existing session over `dataset`, e.g. one rebuilt by replay.
  Workspace(std::shared_ptr<const Dataset> dataset, Session session, const Catalog& catalog = Catalog::builtin(),
            const RuleTable& rules = RuleTable::builtin());

  struct Turn {
    Parse parse;
    Outcome outcome;
  };

  Turn say(std::string_view utterance);

  const Parser& parser() const { return parser_; }
  Session& session() { return session_; }
  const Session& session() const { return session_; }

 private:
  Parser parser_;
  Session session_;
};

}  // namespace nlchart
