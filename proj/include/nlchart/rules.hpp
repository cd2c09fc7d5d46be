#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace nlchart {

struct Rgb {
  int r = 0;
  int g = 0;
  int b = 0;

  bool operator==(const Rgb&) const = default;
  /// "#RRGGBB", upper-case hex.
  std::string hex() const;
  static std::optional<Rgb> from_hex(std::string_view s);
};

/// HSL lightness scaling used for darker/lighter; result clamped to [0, 1].
Rgb scale_lightness(const Rgb& c, double factor);

struct RelationalDeltas {
  double bigger = 1.2;
  double smaller = 0.8;
  double stroke_wider = 1.5;
  double stroke_thinner = 0.5;
  double on_top_offset_px = 10;
  double darker = 0.8;
  double lighter = 1.2;
};

struct SortDefault {
  std::string channel = "y";
  std::string order = "descending";
};

struct RecommendationRule {
  std::string measure;                 // semantic type of the measure channel
  std::vector<std::string> dimension;  // semantic types of the other channel, "none" = unbound
  std::string chart;
};

struct StyleDefaults {
  double canvas_width = 640;
  double canvas_height = 400;
  double margin_left = 60;
  double margin_right = 20;
  double margin_top = 40;
  double margin_bottom = 50;
  Rgb mark_color{76, 120, 168};
  Rgb text_color{51, 51, 51};
  Rgb annotation_color{0, 0, 0};
  Rgb stroke_color{0, 0, 0};
  double mark_size = 50;
  double font_size = 12;
  double title_font_size = 16;
  double line_stroke_width = 2;
  double bar_stroke_width = 0;
  double annotation_stroke_width = 1;
  double move_offset_px = 10;
  int bin_count = 10;
  std::string aggregate = "sum";
  std::string icon = "circle";
  std::size_t value_index_cap = 10000;
};

struct TriggerRule {
  std::vector<std::string> pattern;          // normalized tokens; "<column>", "<word>" are slots
  std::vector<std::string> intents;
  std::vector<std::optional<std::string>> roles;  // per pattern token, may be empty
};

/// Lexicons driving the deterministic reference tagger.
struct TaggerLexicon {
  std::vector<TriggerRule> triggers;
  std::vector<std::string> verbs;
  std::map<std::string, std::string, std::less<>> verb_roles;     // role -> intent, needs a verb
  std::map<std::string, std::string, std::less<>> implied_roles;  // role -> intent, no verb needed
  std::vector<std::string> stopwords;
  std::vector<std::string> determiners;
  std::vector<std::string> coordinators;
  std::vector<std::string> stroke_nouns;
  std::vector<std::string> range_connectors;
  std::map<std::string, std::string, std::less<>> property_nouns;  // normalized phrase -> role
  std::map<std::string, std::string, std::less<>> number_prepositions;

  bool is_stopword(std::string_view w) const;
  bool is_determiner(std::string_view w) const;
  bool is_coordinator(std::string_view w) const;
  bool is_stroke_noun(std::string_view w) const;
};

/// Every numeric disambiguation constant in one versioned, serializable
/// place.
struct RuleTable {
  std::string version;
  double intent_threshold = 0.5;
  std::map<std::string, Rgb, std::less<>> colors;
  std::map<std::string, double, std::less<>> extent_scale;
  std::map<std::string, int, std::less<>> extent_bases;  // +1 grows, -1 shrinks
  std::map<std::string, std::pair<std::string, std::string>, std::less<>> qualitative_ranges;
  RelationalDeltas deltas;
  SortDefault sort_default;
  std::vector<RecommendationRule> recommendation_rules;
  StyleDefaults defaults;
  TaggerLexicon tagger;

  static RuleTable from_json(const nlohmann::json& doc);
  static RuleTable load(const std::string& path);
  static const RuleTable& builtin();
  nlohmann::json to_json() const;

  std::optional<Rgb> color(std::string_view name) const;
  /// True for "<base>" or "<adverb> <base>" with a known extent adverb.
  bool is_extent_keyword(std::string_view keyword) const;
  /// Multiplier applied to the current value for an extent keyword.
  double extent_multiplier(std::string_view keyword) const;
  bool is_vague_keyword(std::string_view lexicon, std::string_view keyword) const;
  /// Multiplier for a relational keyword on a numeric role.
  std::optional<double> relation_factor(std::string_view role, std::string_view relation) const;
};

}  // namespace nlchart
