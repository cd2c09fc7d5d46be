#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlchart/tagger.hpp"

namespace nlchart {

struct IntentCounts {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;

  bool operator==(const IntentCounts&) const = default;
};

struct Metrics {
  std::size_t utterances = 0;
  std::size_t tokens = 0;
  double intent_accuracy = 1.0;  // exact intent-set match rate
  double slot_accuracy = 1.0;    // per-token label match rate
  double entity_precision = 1.0;
  double entity_recall = 1.0;
  double entity_f1 = 1.0;        // chunk-exact, micro-averaged
  std::map<std::string, IntentCounts> per_operation;

  nlohmann::json to_json() const;
};

/// Micro-averaged scores over aligned prediction/gold pairs. Empty chunk
/// sets on both sides score precision = recall = F1 = 1. Throws
/// Error(kMisaligned) on a length or token-count mismatch.
Metrics evaluate(const std::vector<TaggedUtterance>& predictions, const std::vector<TaggedUtterance>& gold);

}  // namespace nlchart
