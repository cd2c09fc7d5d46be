#include "nlchart/rules.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "embedded.hpp"
#include "nlchart/error.hpp"
#include "nlchart/text.hpp"

namespace nlchart {

namespace {

Rgb rgb_from_json(const nlohmann::json& j) {
  Rgb c{j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>()};
  for (int v : {c.r, c.g, c.b}) {
    if (v < 0 || v > 255) throw Error(Errc::kInvalidValue, "color channel out of range");
  }
  return c;
}

nlohmann::json rgb_to_json(const Rgb& c) { return nlohmann::json::array({c.r, c.g, c.b}); }

std::vector<std::string> split_spaces(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(to_lower(w));
  return out;
}

bool contains(const std::vector<std::string>& v, std::string_view w) {
  return std::find(v.begin(), v.end(), w) != v.end();
}

// Splits "very large" into ("very", "large"); a bare base has an empty adverb.
std::pair<std::string, std::string> split_extent(std::string_view keyword) {
  auto pos = keyword.rfind(' ');
  if (pos == std::string_view::npos) return {"", std::string(keyword)};
  return {std::string(keyword.substr(0, pos)), std::string(keyword.substr(pos + 1))};
}

double hue_to_rgb(double p, double q, double t) {
  if (t < 0) t += 1;
  if (t > 1) t -= 1;
  if (t < 1.0 / 6) return p + (q - p) * 6 * t;
  if (t < 1.0 / 2) return q;
  if (t < 2.0 / 3) return p + (q - p) * (2.0 / 3 - t) * 6;
  return p;
}

}  // namespace

std::string Rgb::hex() const {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02X%02X%02X", r, g, b);
  return buf;
}

std::optional<Rgb> Rgb::from_hex(std::string_view s) {
  if (s.size() != 7 || s[0] != '#') return std::nullopt;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  int v[6];
  for (int i = 0; i < 6; ++i) {
    v[i] = nibble(s[1 + i]);
    if (v[i] < 0) return std::nullopt;
  }
  return Rgb{v[0] * 16 + v[1], v[2] * 16 + v[3], v[4] * 16 + v[5]};
}

Rgb scale_lightness(const Rgb& c, double factor) {
  double r = c.r / 255.0, g = c.g / 255.0, b = c.b / 255.0;
  double hi = std::max({r, g, b}), lo = std::min({r, g, b});
  double l = (hi + lo) / 2;
  double h = 0, s = 0;
  if (hi != lo) {
    double d = hi - lo;
    s = l > 0.5 ? d / (2 - hi - lo) : d / (hi + lo);
    if (hi == r) {
      h = (g - b) / d + (g < b ? 6 : 0);
    } else if (hi == g) {
      h = (b - r) / d + 2;
    } else {
      h = (r - g) / d + 4;
    }
    h /= 6;
  }
  l = std::clamp(l * factor, 0.0, 1.0);
  double nr = l, ng = l, nb = l;
  if (s != 0) {
    double q = l < 0.5 ? l * (1 + s) : l + s - l * s;
    double p = 2 * l - q;
    nr = hue_to_rgb(p, q, h + 1.0 / 3);
    ng = hue_to_rgb(p, q, h);
    nb = hue_to_rgb(p, q, h - 1.0 / 3);
  }
  auto to_byte = [](double v) { return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255)); };
  return Rgb{to_byte(nr), to_byte(ng), to_byte(nb)};
}

bool TaggerLexicon::is_stopword(std::string_view w) const { return contains(stopwords, w); }
bool TaggerLexicon::is_determiner(std::string_view w) const { return contains(determiners, w); }
bool TaggerLexicon::is_coordinator(std::string_view w) const { return contains(coordinators, w); }
bool TaggerLexicon::is_stroke_noun(std::string_view w) const { return contains(stroke_nouns, w); }

RuleTable RuleTable::from_json(const nlohmann::json& doc) {
  if (doc.value("schema", "") != "nlchart-rules") {
    throw Error(Errc::kInvalidValue, "not a rule-table document");
  }
  RuleTable t;
  t.version = doc.at("version").get<std::string>();
  t.intent_threshold = doc.at("intent_threshold").get<double>();
  if (!(t.intent_threshold > 0 && t.intent_threshold < 1)) {
    throw Error(Errc::kInvalidValue, "intent_threshold must lie in (0, 1)");
  }
  for (const auto& [name, rgb] : doc.at("colors").items()) {
    t.colors.emplace(normalize_phrase(name), rgb_from_json(rgb));
  }
  for (const auto& [k, v] : doc.at("extent_scale").items()) {
    double m = v.get<double>();
    if (!(m > 0)) throw Error(Errc::kInvalidValue, "extent multiplier must be positive");
    t.extent_scale.emplace(k, m);
  }
  for (const auto& [k, v] : doc.at("extent_bases").items()) t.extent_bases.emplace(k, v.get<int>());
  for (const auto& [k, v] : doc.at("qualitative_ranges").items()) {
    t.qualitative_ranges.emplace(k, std::make_pair(v.at(0).get<std::string>(), v.at(1).get<std::string>()));
  }

  const auto& d = doc.at("relational_deltas");
  t.deltas.bigger = d.at("bigger").get<double>();
  t.deltas.smaller = d.at("smaller").get<double>();
  t.deltas.stroke_wider = d.at("strokeWider").get<double>();
  t.deltas.stroke_thinner = d.at("strokeThinner").get<double>();
  t.deltas.on_top_offset_px = d.at("onTopOffsetPx").get<double>();
  t.deltas.darker = d.at("darker").get<double>();
  t.deltas.lighter = d.at("lighter").get<double>();
  for (double m : {t.deltas.bigger, t.deltas.smaller, t.deltas.stroke_wider, t.deltas.stroke_thinner,
                   t.deltas.darker, t.deltas.lighter}) {
    if (!(m > 0)) throw Error(Errc::kInvalidValue, "relational multipliers must be positive");
  }

  t.sort_default.channel = doc.at("sort_default").at("channel").get<std::string>();
  t.sort_default.order = doc.at("sort_default").at("order").get<std::string>();

  for (const auto& j : doc.at("recommendation_rules")) {
    t.recommendation_rules.push_back({j.at("measure").get<std::string>(),
                                      j.at("dimension").get<std::vector<std::string>>(),
                                      j.at("chart").get<std::string>()});
  }

  const auto& df = doc.at("defaults");
  auto& s = t.defaults;
  s.canvas_width = df.at("canvas").at("width").get<double>();
  s.canvas_height = df.at("canvas").at("height").get<double>();
  s.margin_left = df.at("margins").at("left").get<double>();
  s.margin_right = df.at("margins").at("right").get<double>();
  s.margin_top = df.at("margins").at("top").get<double>();
  s.margin_bottom = df.at("margins").at("bottom").get<double>();
  s.mark_color = rgb_from_json(df.at("mark_color"));
  s.text_color = rgb_from_json(df.at("text_color"));
  s.annotation_color = rgb_from_json(df.at("annotation_color"));
  s.stroke_color = rgb_from_json(df.at("stroke_color"));
  s.mark_size = df.at("mark_size").get<double>();
  s.font_size = df.at("font_size").get<double>();
  s.title_font_size = df.at("title_font_size").get<double>();
  s.line_stroke_width = df.at("line_stroke_width").get<double>();
  s.bar_stroke_width = df.at("bar_stroke_width").get<double>();
  s.annotation_stroke_width = df.at("annotation_stroke_width").get<double>();
  s.move_offset_px = df.at("move_offset_px").get<double>();
  s.bin_count = df.at("bin_count").get<int>();
  s.aggregate = df.at("aggregate").get<std::string>();
  s.icon = df.at("icon").get<std::string>();
  s.value_index_cap = df.at("value_index_cap").get<std::size_t>();

  const auto& tg = doc.at("tagger");
  for (const auto& j : tg.at("triggers")) {
    TriggerRule rule;
    rule.pattern = split_spaces(j.at("phrase").get<std::string>());
    rule.intents = j.at("intents").get<std::vector<std::string>>();
    if (j.contains("roles")) {
      for (const auto& r : j.at("roles")) {
        rule.roles.push_back(r.is_null() ? std::nullopt : std::optional<std::string>(r.get<std::string>()));
      }
      if (rule.roles.size() != rule.pattern.size()) {
        throw Error(Errc::kInvalidValue, "trigger '" + j.at("phrase").get<std::string>() +
                                             "' has a role list of the wrong length");
      }
    }
    t.tagger.triggers.push_back(std::move(rule));
  }
  auto& lx = t.tagger;
  lx.verbs = tg.at("verbs").get<std::vector<std::string>>();
  lx.verb_roles = tg.at("verb_roles").get<std::map<std::string, std::string, std::less<>>>();
  lx.implied_roles = tg.at("implied_roles").get<std::map<std::string, std::string, std::less<>>>();
  lx.stopwords = tg.at("stopwords").get<std::vector<std::string>>();
  lx.determiners = tg.at("determiners").get<std::vector<std::string>>();
  lx.coordinators = tg.at("coordinators").get<std::vector<std::string>>();
  lx.stroke_nouns = tg.at("stroke_nouns").get<std::vector<std::string>>();
  lx.range_connectors = tg.at("range_connectors").get<std::vector<std::string>>();
  for (const auto& [k, v] : tg.at("property_nouns").items()) {
    lx.property_nouns.emplace(normalize_phrase(k), v.get<std::string>());
  }
  lx.number_prepositions =
      tg.at("number_prepositions").get<std::map<std::string, std::string, std::less<>>>();
  return t;
}

RuleTable RuleTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot open rule table '" + path + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kSyntax, "rule table '" + path + "': " + e.what());
  }
}

const RuleTable& RuleTable::builtin() {
  static const RuleTable instance = from_json(nlohmann::json::parse(embedded::kRules));
  return instance;
}

nlohmann::json RuleTable::to_json() const {
  using nlohmann::json;
  json doc;
  doc["schema"] = "nlchart-rules";
  doc["version"] = version;
  doc["intent_threshold"] = intent_threshold;
  json colors_json = json::object();
  for (const auto& [k, v] : colors) colors_json[k] = rgb_to_json(v);
  doc["colors"] = colors_json;
  doc["extent_scale"] = extent_scale;
  doc["extent_bases"] = extent_bases;
  json ranges = json::object();
  for (const auto& [k, v] : qualitative_ranges) ranges[k] = json::array({v.first, v.second});
  doc["qualitative_ranges"] = ranges;
  doc["relational_deltas"] = {{"bigger", deltas.bigger},
                              {"smaller", deltas.smaller},
                              {"strokeWider", deltas.stroke_wider},
                              {"strokeThinner", deltas.stroke_thinner},
                              {"onTopOffsetPx", deltas.on_top_offset_px},
                              {"darker", deltas.darker},
                              {"lighter", deltas.lighter}};
  doc["sort_default"] = {{"channel", sort_default.channel}, {"order", sort_default.order}};
  json rec = json::array();
  for (const auto& r : recommendation_rules) {
    rec.push_back({{"measure", r.measure}, {"dimension", r.dimension}, {"chart", r.chart}});
  }
  doc["recommendation_rules"] = rec;
  const auto& s = defaults;
  doc["defaults"] = {
      {"canvas", {{"width", s.canvas_width}, {"height", s.canvas_height}}},
      {"margins",
       {{"left", s.margin_left}, {"right", s.margin_right}, {"top", s.margin_top}, {"bottom", s.margin_bottom}}},
      {"mark_color", rgb_to_json(s.mark_color)},
      {"text_color", rgb_to_json(s.text_color)},
      {"annotation_color", rgb_to_json(s.annotation_color)},
      {"stroke_color", rgb_to_json(s.stroke_color)},
      {"mark_size", s.mark_size},
      {"font_size", s.font_size},
      {"title_font_size", s.title_font_size},
      {"line_stroke_width", s.line_stroke_width},
      {"bar_stroke_width", s.bar_stroke_width},
      {"annotation_stroke_width", s.annotation_stroke_width},
      {"move_offset_px", s.move_offset_px},
      {"bin_count", s.bin_count},
      {"aggregate", s.aggregate},
      {"icon", s.icon},
      {"value_index_cap", s.value_index_cap}};
  json triggers = json::array();
  for (const auto& r : tagger.triggers) {
    json t = {{"phrase", join(r.pattern, " ")}, {"intents", r.intents}};
    if (!r.roles.empty()) {
      json roles = json::array();
      for (const auto& role : r.roles) roles.push_back(role ? json(*role) : json(nullptr));
      t["roles"] = roles;
    }
    triggers.push_back(t);
  }
  doc["tagger"] = {{"triggers", triggers},
                   {"verbs", tagger.verbs},
                   {"verb_roles", tagger.verb_roles},
                   {"implied_roles", tagger.implied_roles},
                   {"stopwords", tagger.stopwords},
                   {"determiners", tagger.determiners},
                   {"coordinators", tagger.coordinators},
                   {"stroke_nouns", tagger.stroke_nouns},
                   {"range_connectors", tagger.range_connectors},
                   {"property_nouns", tagger.property_nouns},
                   {"number_prepositions", tagger.number_prepositions}};
  return doc;
}

std::optional<Rgb> RuleTable::color(std::string_view name) const {
  auto it = colors.find(name);
  if (it == colors.end()) return std::nullopt;
  return it->second;
}

bool RuleTable::is_extent_keyword(std::string_view keyword) const {
  auto [adverb, base] = split_extent(keyword);
  if (extent_bases.find(base) == extent_bases.end()) return false;
  return adverb.empty() || extent_scale.find(adverb) != extent_scale.end();
}

double RuleTable::extent_multiplier(std::string_view keyword) const {
  if (!is_extent_keyword(keyword)) {
    throw Error(Errc::kInvalidValue, "unknown extent keyword '" + std::string(keyword) + "'");
  }
  auto [adverb, base] = split_extent(keyword);
  bool grow = extent_bases.find(base)->second > 0;
  if (adverb.empty()) return grow ? deltas.bigger : deltas.smaller;
  double m = extent_scale.find(adverb)->second;
  return grow ? m : 1.0 / m;
}

bool RuleTable::is_vague_keyword(std::string_view lexicon, std::string_view keyword) const {
  if (lexicon == "color") return colors.find(keyword) != colors.end();
  if (lexicon == "extent") return is_extent_keyword(keyword);
  if (lexicon == "range") return qualitative_ranges.find(keyword) != qualitative_ranges.end();
  return false;
}

std::optional<double> RuleTable::relation_factor(std::string_view role, std::string_view relation) const {
  if (role == "size") {
    if (relation == "bigger") return deltas.bigger;
    if (relation == "smaller") return deltas.smaller;
  }
  if (role == "strokeWidth") {
    if (relation == "wider") return deltas.stroke_wider;
    if (relation == "thinner") return deltas.stroke_thinner;
  }
  if (role == "color") {
    if (relation == "darker") return deltas.darker;
    if (relation == "lighter") return deltas.lighter;
  }
  return std::nullopt;
}

}  // namespace nlchart
