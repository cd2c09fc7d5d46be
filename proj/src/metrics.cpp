#include "nlchart/metrics.hpp"

#include <algorithm>

#include "nlchart/error.hpp"

namespace nlchart {

nlohmann::json Metrics::to_json() const {
  nlohmann::json ops = nlohmann::json::object();
  for (const auto& [name, c] : per_operation) {
    ops[name] = {{"tp", c.true_positive}, {"fp", c.false_positive}, {"fn", c.false_negative}};
  }
  return {{"utterances", utterances},       {"tokens", tokens},
          {"intent_accuracy", intent_accuracy}, {"slot_accuracy", slot_accuracy},
          {"entity_precision", entity_precision}, {"entity_recall", entity_recall},
          {"entity_f1", entity_f1},         {"per_operation", ops}};
}

Metrics evaluate(const std::vector<TaggedUtterance>& predictions, const std::vector<TaggedUtterance>& gold) {
  if (predictions.size() != gold.size()) {
    throw Error(Errc::kMisaligned, std::to_string(predictions.size()) + " predictions for " +
                                       std::to_string(gold.size()) + " gold records");
  }
  Metrics m;
  m.utterances = gold.size();
  std::size_t intent_hits = 0, label_hits = 0, matched = 0, predicted = 0, expected = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& p = predictions[i];
    const auto& g = gold[i];
    if (p.labels.size() != g.labels.size()) {
      throw Error(Errc::kMisaligned, "record " + std::to_string(i) + ": " + std::to_string(p.labels.size()) +
                                         " predicted labels for " + std::to_string(g.labels.size()) + " tokens");
    }
    auto pi = p.intents.names();
    auto gi = g.intents.names();
    if (pi == gi) ++intent_hits;
    for (const auto& name : pi) {
      auto& c = m.per_operation[name];
      gi.count(name) ? ++c.true_positive : ++c.false_positive;
    }
    for (const auto& name : gi) {
      if (!pi.count(name)) ++m.per_operation[name].false_negative;
    }
    m.tokens += g.labels.size();
    for (std::size_t t = 0; t < g.labels.size(); ++t) label_hits += p.labels[t] == g.labels[t];
    auto pc = chunks(p.labels);
    auto gc = chunks(g.labels);
    predicted += pc.size();
    expected += gc.size();
    for (const auto& c : pc) matched += std::find(gc.begin(), gc.end(), c) != gc.end();
  }
  auto ratio = [](std::size_t a, std::size_t b) { return b == 0 ? 1.0 : static_cast<double>(a) / static_cast<double>(b); };
  m.intent_accuracy = ratio(intent_hits, m.utterances);
  m.slot_accuracy = ratio(label_hits, m.tokens);
  m.entity_precision = ratio(matched, predicted);
  m.entity_recall = ratio(matched, expected);
  if (predicted == 0 && expected == 0) {
    m.entity_f1 = 1.0;
  } else {
    m.entity_f1 = matched == 0 ? 0.0 : 2.0 * m.entity_precision * m.entity_recall / (m.entity_precision + m.entity_recall);
  }
  return m;
}

}  // namespace nlchart
