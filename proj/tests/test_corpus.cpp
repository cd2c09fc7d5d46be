#include <gtest/gtest.h>

#include <random>
#include <set>

#include "nlchart/corpus.hpp"
#include "nlchart/error.hpp"
#include "nlchart/synthesizer.hpp"

namespace nlchart {
namespace {

using nlohmann::json;

const Dataset& cars() { return Dataset::sample(); }

const EntityIndex& cars_index() {
  static const EntityIndex index = EntityIndex::build(cars());
  return index;
}

Template color_template() {
  return Template::from_json(json::parse(R"({
    "id": "t", "pattern": "^color the {comp} {color}", "intents": ["setColor"],
    "slots": {"comp": {"role": "component", "values": ["legend", "title"]},
              "color": {"role": "color", "values": ["red", "blue"]}},
    "actions": ["{setColor, {comp}, color={color}}"]})"));
}

TEST(Template, ParsesGroupsSlotsAndMarkers) {
  auto t = Template::from_json(json::parse(R"({
    "id": "g", "pattern": "(show|display|) {y} by {x}", "intents": ["bindY", "bindX"],
    "slots": {"y": {"role": "yField", "from": "column:quantitative"}, "x": {"role": "xField", "from": "column"}},
    "actions": ["{bindY, yAxis, field={y}}", "{bindX, xAxis, field={x}}"]})"));
  ASSERT_EQ(t.parts.size(), 4u);
  EXPECT_EQ(t.parts[0].kind, TemplatePart::Kind::kGroup);
  EXPECT_EQ(t.parts[0].alternatives, (std::vector<std::string>{"show", "display", ""}));
  EXPECT_EQ(t.parts[1].kind, TemplatePart::Kind::kSlot);
  EXPECT_EQ(t.parts[1].slot, "y");
  EXPECT_EQ(t.parts[2].kind, TemplatePart::Kind::kWord);
  auto back = Template::from_json(t.to_json());
  EXPECT_EQ(back.to_json(), t.to_json());
}

TEST(Template, ValidationErrors) {
  auto bad = [](const char* doc) {
    try {
      Template::from_json(json::parse(doc));
    } catch (const Error& e) {
      return e.code() == Errc::kTemplate;
    }
    return false;
  };
  // undeclared slot in pattern
  EXPECT_TRUE(bad(R"({"id":"a","pattern":"sort by {f}","intents":["sort"],"slots":{},"actions":[]})"));
  // unknown role
  EXPECT_TRUE(bad(R"({"id":"a","pattern":"sort by {f}","intents":["sort"],
                     "slots":{"f":{"role":"nonsense","from":"column"}},"actions":[]})"));
  // unknown operation
  EXPECT_TRUE(bad(R"({"id":"a","pattern":"frob","intents":["frobnicate"],"slots":{},"actions":[]})"));
  // unbalanced group
  EXPECT_TRUE(bad(R"({"id":"a","pattern":"(sort|order by","intents":["sort"],"slots":{},"actions":[]})"));
  // action references a slot that does not exist
  EXPECT_TRUE(bad(R"({"id":"a","pattern":"sort","intents":["sort"],"slots":{},"actions":["{sort, *, field={f}}"]})"));
  // more markers than intents
  EXPECT_TRUE(bad(R"({"id":"a","pattern":"^sort ^now","intents":["sort"],"slots":{},"actions":[]})"));
  // declared but unused slot
  EXPECT_TRUE(bad(R"({"id":"a","pattern":"sort","intents":["sort"],
                     "slots":{"f":{"role":"field","from":"column"}},"actions":[]})"));
}

TEST(Template, BuiltinSetCoversEveryOperation) {
  std::set<std::string> covered;
  for (const auto& t : builtin_templates()) covered.insert(t.intents.begin(), t.intents.end());
  for (const auto& op : Catalog::builtin().operations()) EXPECT_TRUE(covered.count(op.name)) << op.name;
}

TEST(Expand, CountsMatchTheCartesianProduct) {
  auto t = color_template();
  EXPECT_EQ(combinations(t, cars(), RuleTable::builtin()), 4u);
  auto recs = expand({t}, cars(), RuleTable::builtin(), 10, 1);
  ASSERT_EQ(recs.size(), 4u);
  std::set<std::string> texts;
  for (const auto& r : recs) texts.insert(r.text);
  EXPECT_EQ(texts, (std::set<std::string>{"color the legend red", "color the legend blue", "color the title red",
                                          "color the title blue"}));
  EXPECT_TRUE(expand({t}, cars(), RuleTable::builtin(), 0, 1).empty());
}

TEST(Expand, GoldLabelsAndActions) {
  auto recs = expand({color_template()}, cars(), RuleTable::builtin(), 10, 1);
  for (const auto& r : recs) {
    if (r.text != "color the legend red") continue;
    std::vector<std::string> labels;
    for (const auto& l : r.gold.labels) labels.push_back(l.str());
    EXPECT_EQ(labels, (std::vector<std::string>{"O", "O", "B-component", "B-color"}));
    ASSERT_EQ(r.gold.intents.intents.size(), 1u);
    EXPECT_EQ(r.gold.intents.intents[0].name, "setColor");
    ASSERT_EQ(r.gold.intents.intents[0].triggers.size(), 1u);
    EXPECT_EQ(r.gold.intents.intents[0].triggers[0].begin, 0u);
    EXPECT_EQ(r.gold.intents.intents[0].triggers[0].end, 1u);
    EXPECT_EQ(r.actions, (std::vector<std::string>{"{setColor, legend, color=red}"}));
    return;
  }
  FAIL() << "expected text missing";
}

TEST(Expand, ColumnSlotsAreAbstracted) {
  std::vector<Template> ts;
  for (const auto& t : builtin_templates()) {
    if (t.id == "bind-by") ts.push_back(t);
  }
  ASSERT_EQ(ts.size(), 1u);
  auto recs = expand(ts, cars(), RuleTable::builtin(), 100000, 5);
  bool seen = false;
  for (const auto& r : recs) {
    if (r.text != "show Sales by Year") continue;
    seen = true;
    EXPECT_EQ(r.gold.tokens(), (std::vector<std::string>{"show", "<column>", "by", "<column>"}));
    EXPECT_EQ(r.actions, (std::vector<std::string>{"{bindY, yAxis, field=Sales}", "{bindX, xAxis, field=Year}"}));
  }
  EXPECT_TRUE(seen);
}

TEST(Expand, DeterministicUnderSeed) {
  auto a = expand(builtin_templates(), cars(), RuleTable::builtin(), 300, 99);
  auto b = expand(builtin_templates(), cars(), RuleTable::builtin(), 300, 99);
  auto c = expand(builtin_templates(), cars(), RuleTable::builtin(), 300, 100);
  ASSERT_EQ(a.size(), b.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].to_json(), b[i].to_json());
    differs = differs || (i < c.size() && a[i].text != c[i].text);
  }
  EXPECT_TRUE(differs);
}

TEST(Expand, TextsAreUnique) {
  auto recs = expand(builtin_templates(), cars(), RuleTable::builtin(), 3000, 4);
  std::set<std::string> texts;
  for (const auto& r : recs) EXPECT_TRUE(texts.insert(r.text).second) << r.text;
}

TEST(Expand, EmptyDomainThrows) {
  auto numbers = Dataset::parse_csv("a,b\n1,2\n3,4\n", "numbers");
  auto t = Template::from_json(json::parse(R"({
    "id": "v", "pattern": "^filter to {v}", "intents": ["filter"],
    "slots": {"v": {"role": "valueLiteral", "from": "value"}},
    "actions": ["{filter, [value='{v}'], *}"]})"));
  try {
    expand({t}, numbers, RuleTable::builtin(), 5, 1);
    FAIL() << "expected a template error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kTemplate);
  }
}

TEST(GoldRecord, RoundTripsThroughJson) {
  auto recs = expand(builtin_templates(), cars(), RuleTable::builtin(), 400, 8);
  for (const auto& r : recs) {
    auto back = GoldRecord::from_json(r.to_json(), cars_index());
    EXPECT_EQ(back.to_json(), r.to_json());
    EXPECT_EQ(back.gold.tokens(), r.gold.tokens());
  }
}

TEST(GoldRecord, MisalignedTokensThrow) {
  auto recs = expand({color_template()}, cars(), RuleTable::builtin(), 1, 1);
  auto j = recs.at(0).to_json();
  j["tokens"].push_back("extra");
  try {
    GoldRecord::from_json(j, cars_index());
    FAIL() << "expected misalignment";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kMisaligned);
  }
}

// Property: for every generated record, the gold labels are well formed and
// synthesizing from the gold tagging reproduces the gold actions.
TEST(GoldRecord, GoldTaggingSynthesizesGoldActions) {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    auto recs = expand(builtin_templates(), cars(), RuleTable::builtin(), 1500, seed);
    for (const auto& r : recs) {
      ASSERT_EQ(r.gold.labels.size(), r.gold.tokens().size()) << r.text;
      EXPECT_TRUE(well_formed(r.gold.labels)) << r.text;
      EXPECT_EQ(synthesize(r.gold, Catalog::builtin(), RuleTable::builtin()).serialized(), r.actions) << r.text;
    }
  }
}

class RandomLabelTagger final : public Tagger {
 public:
  TaggedUtterance tag(const AbstractedUtterance& abstracted) const override {
    const auto& roles = Catalog::builtin().entity_roles();
    std::uniform_int_distribution<std::size_t> pick(0, roles.size() * 2);
    TaggedUtterance out;
    out.abstracted = abstracted;
    for (std::size_t i = 0; i < abstracted.abstracted_tokens.size(); ++i) {
      auto k = pick(rng_);
      out.labels.push_back(k < roles.size() ? BioLabel::begin(roles[k].name) : BioLabel::outside());
    }
    return out;
  }
  std::string name() const override { return "random"; }
  std::string version() const override { return "0"; }

 private:
  mutable std::mt19937 rng_{12345};
};

class NoIntentTagger final : public Tagger {
 public:
  TaggedUtterance tag(const AbstractedUtterance& abstracted) const override {
    auto out = ReferenceTagger().tag(abstracted);
    out.intents.intents.clear();
    return out;
  }
  std::string name() const override { return "no-intent"; }
  std::string version() const override { return "0"; }
};

TEST(Benchmark, ReferenceTaggerOnBuiltinCorpus) {
  auto recs = expand(builtin_templates(), cars(), RuleTable::builtin(), 2000, 42);
  ASSERT_EQ(recs.size(), 2000u);
  auto report = run_benchmark(ReferenceTagger(), recs, cars_index());
  EXPECT_EQ(report.records, 2000u);
  EXPECT_GE(report.metrics.entity_f1, 0.99);
  EXPECT_GE(report.metrics.intent_accuracy, 0.99);
  EXPECT_GE(report.action_accuracy, 0.99);
  EXPECT_LE(report.misses.size(), 20u);
}

TEST(Benchmark, RandomLabelsScoreNearZero) {
  auto recs = expand(builtin_templates(), cars(), RuleTable::builtin(), 500, 42);
  auto report = run_benchmark(RandomLabelTagger(), recs, cars_index());
  EXPECT_LT(report.metrics.entity_f1, 0.1);
  EXPECT_EQ(report.metrics.intent_accuracy, 0.0);
}

TEST(Benchmark, EmptyIntentsScoreTheEmptyGoldFraction) {
  auto recs = expand(builtin_templates(), cars(), RuleTable::builtin(), 500, 42);
  std::size_t empty = 0;
  for (const auto& r : recs) empty += r.gold.intents.intents.empty() ? 1 : 0;
  auto report = run_benchmark(NoIntentTagger(), recs, cars_index());
  EXPECT_DOUBLE_EQ(report.metrics.intent_accuracy, static_cast<double>(empty) / recs.size());
  EXPECT_GE(report.metrics.entity_f1, 0.99);
}

TEST(Loader, AcceptsArrayOrWrappedObject) {
  auto one = color_template().to_json();
  auto two = one;
  two["id"] = "t2";
  EXPECT_EQ(load_templates(json::array({one})).size(), 1u);
  EXPECT_EQ(load_templates(json{{"templates", json::array({one, two})}}).size(), 2u);
  try {
    load_templates(json::array({one, one}));
    FAIL() << "expected a duplicate-id error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kTemplate);
  }
}

}  // namespace
}  // namespace nlchart
