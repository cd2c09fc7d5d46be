#include "nlchart/pipeline.hpp"

#include <sstream>

namespace nlchart {

nlohmann::json Parse::to_json() const {
  return {{"utterance", utterance},
          {"abstracted", tagged.abstracted.to_json()},
          {"tagged", tagged.to_json()},
          {"synthesis", sequence.to_json()}};
}

nlohmann::json Parse::highlights() const {
  const auto& a = tagged.abstracted;
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : chunks(tagged.labels)) {
    auto orig = a.original_span(c.span);
    if (orig.begin >= orig.end || orig.end > a.tokens.size()) continue;
    const auto& first = a.tokens[orig.begin];
    const auto& last = a.tokens[orig.end - 1];
    nlohmann::json h{{"begin", first.offset},
                     {"end", last.offset + last.length},
                     {"text", a.original.substr(first.offset, last.offset + last.length - first.offset)},
                     {"role", c.role}};
    for (std::size_t i = c.span.begin; i < c.span.end; ++i) {
      if (const auto* b = a.binding_at(i)) {
        h["placeholder"] = b->placeholder;
        h["binding"] = b->canonical;
        if (!b->column.empty()) h["column"] = b->column;
        break;
      }
    }
    out.push_back(std::move(h));
  }
  return out;
}

std::string Parse::explain() const {
  std::ostringstream out;
  out << "abstracted:";
  for (const auto& t : tagged.tokens()) out << ' ' << t;
  out << "\nlabels:    ";
  for (std::size_t i = 0; i < tagged.labels.size(); ++i) {
    out << ' ' << tagged.tokens()[i] << '/' << tagged.labels[i].str();
  }
  out << "\nintents:   ";
  if (tagged.intents.intents.empty()) out << " (none)";
  for (const auto& in : tagged.intents.intents) out << ' ' << in.name;
  out << '\n';
  for (std::size_t i = 0; i < sequence.actions.size(); ++i) {
    const auto& tr = sequence.trace[i];
    out << "action " << i + 1 << ": " << serialize_action(sequence.actions[i]) << "  [" << tr.rule;
    if (!tr.defaults.empty()) {
      out << "; defaulted";
      for (const auto& d : tr.defaults) out << ' ' << d;
    }
    out << "]\n";
  }
  return out.str();
}

Parser::Parser(std::shared_ptr<const Dataset> dataset, const Catalog& catalog, const RuleTable& rules)
    : dataset_(std::move(dataset)),
      catalog_(catalog),
      rules_(rules),
      index_(EntityIndex::build(*dataset_, rules.defaults.value_index_cap)),
      tagger_(catalog, rules) {}

Parse Parser::parse(std::string_view utterance) const {
  Parse p;
  p.utterance = std::string(utterance);
  p.tagged = tagger_.tag(abstract(utterance, index_));
  p.sequence = synthesize(p.tagged, catalog_, rules_);
  return p;
}

Workspace::Workspace(std::shared_ptr<const Dataset> dataset, const Catalog& catalog, const RuleTable& rules)
    : parser_(dataset, catalog, rules), session_(dataset, catalog, rules) {}

Workspace::Workspace(std::shared_ptr<const Dataset> dataset, Session session, const Catalog& catalog,
                     const RuleTable& rules)
    : parser_(std::move(dataset), catalog, rules), session_(std::move(session)) {}

Workspace::Turn Workspace::say(std::string_view utterance) {
  Turn t;
  t.parse = parser_.parse(utterance);
  t.outcome = session_.execute(t.parse.sequence.actions, t.parse.utterance);
  return t;
}

}  // namespace nlchart
