#include <gtest/gtest.h>

#include <random>

#include "nlchart/action.hpp"
#include "nlchart/error.hpp"

namespace nlchart {
namespace {

EditingAction roundtrip(const std::string& text) { return parse_action(text); }

TEST(Serialize, SelectorWithModifier) {
  EditingAction a;
  a.operation = "setColor";
  a.objects = {ObjectRef::selector({{"shape", "line"}, {"color", "red"}})};
  a.parameters = {ParameterValue::vague("color", "blue")};
  EXPECT_EQ(serialize_action(a), "{setColor, [shape=line, color=red], color=blue}");
}

TEST(Serialize, AllDefaultAction) {
  EXPECT_EQ(serialize_action(EditingAction{}), "{*, *, *}");
}

TEST(Serialize, WildcardPredicateIsQuoted) {
  EditingAction a;
  a.operation = "setStroke";
  a.objects = {ObjectRef::selector({{"shape", "bar"}, {"*", "abc"}})};
  a.parameters = {ParameterValue::vague("stroke", "black")};
  EXPECT_EQ(serialize_action(a), "{setStroke, [shape=bar, *='abc'], stroke=black}");
}

TEST(Parse, VagueExtentKeyword) {
  auto a = roundtrip("{setSize, *, size=very.large}");
  EXPECT_EQ(a.operation, "setSize");
  ASSERT_EQ(a.objects.size(), 1u);
  EXPECT_TRUE(a.objects[0].is_star());
  ASSERT_EQ(a.parameters.size(), 1u);
  EXPECT_EQ(a.parameters[0].form, ParameterValue::Form::kVague);
  EXPECT_EQ(a.parameters[0].keyword, "very large");
}

TEST(Parse, RelationalPlotAnchor) {
  auto a = roundtrip("{place, legend, position=plot[right]}");
  ASSERT_EQ(a.parameters.size(), 1u);
  const auto& p = a.parameters[0];
  EXPECT_EQ(p.form, ParameterValue::Form::kRelational);
  ASSERT_TRUE(p.anchor.has_value());
  EXPECT_EQ(*p.anchor, ObjectRef::of(ComponentKind::kPlotArea));
  EXPECT_EQ(p.relation, "right");
  EXPECT_EQ(roundtrip("{place, legend, position=plotArea[right]}"), a);
}

TEST(Parse, SelfAnchorIsNotAComponent) {
  auto a = roundtrip("{setColor, title, color=self[darker]}");
  EXPECT_TRUE(a.parameters[0].anchored_to_self());
  EXPECT_EQ(serialize_action(a), "{setColor, title, color=self[darker]}");
}

TEST(Parse, SelectorAnchorWithRelation) {
  std::string text = "{addAnnotation, *, text='best seller', position=[shape=bar, value='Ford'][top]}";
  auto a = roundtrip(text);
  ASSERT_TRUE(a.parameters[1].anchor.has_value());
  EXPECT_EQ(a.parameters[1].anchor->predicate("value"), "Ford");
  EXPECT_EQ(serialize_action(a), text);
}

TEST(Parse, UnknownOperation) {
  try {
    roundtrip("{bogusOp, *, *}");
    FAIL() << "expected an error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.code(), Errc::kUnknownOperation);
    EXPECT_EQ(e.position(), 1u);
  }
}

TEST(Parse, UnknownParameterRole) {
  try {
    roundtrip("{setColor, *, hue=red}");
    FAIL() << "expected an error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.code(), Errc::kUnknownRole);
  }
}

TEST(Parse, SyntaxErrorsCarryPosition) {
  try {
    roundtrip("{setColor, * color=red}");
    FAIL() << "expected an error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.code(), Errc::kSyntax);
    EXPECT_EQ(e.position(), 13u);
  }
  EXPECT_THROW(roundtrip("{setColor, *, color=red"), ParseError);
  EXPECT_THROW(roundtrip("{setColor, *, color=red} trailing"), ParseError);
}

TEST(Parse, RejectsUnknownVagueKeyword) {
  EXPECT_THROW(roundtrip("{setColor, *, color=blurple}"), ParseError);
  EXPECT_THROW(roundtrip("{setSize, *, size=somewhat.large}"), ParseError);
}

TEST(Parse, RoleDirectedTyping) {
  auto a = roundtrip("{bindY, yAxis, field=Sales}");
  EXPECT_EQ(a.parameters[0].kind, ValueKind::kText);
  EXPECT_EQ(a.parameters[0].text, "Sales");
  auto b = roundtrip("{arrange, *, count=2}");
  EXPECT_EQ(b.parameters[0].unit, Unit::kCount);
  auto c = roundtrip("{move, title, offset=10px}");
  EXPECT_EQ(c.parameters[0].unit, Unit::kPx);
  EXPECT_EQ(c.parameters[0].number, 10.0);
  auto d = roundtrip("{setOpacity, mark, opacity=50%}");
  EXPECT_EQ(d.parameters[0].unit, Unit::kPercent);
  EXPECT_THROW(roundtrip("{move, title, offset=10%}"), ParseError);
}

TEST(Selector, UnknownPropertyFallsUnderWildcard) {
  auto r = ObjectRef::selector({{"brand", "Ford"}});
  EXPECT_EQ(r.predicates[0].property, "*");
  EXPECT_EQ(r.predicates[0].value, "Ford");
  EXPECT_THROW(ObjectRef::selector({}), Error);
}

TEST(Catalog, Closure) {
  const auto& cat = Catalog::builtin();
  for (const auto& op : cat.operations()) {
    for (const auto& role : cat.expected_parameter_roles(op)) {
      EXPECT_NE(cat.find_parameter_role(role), nullptr) << op.name << " -> " << role;
    }
  }
}

TEST(Catalog, CategoryPartitionCoversMinimumSet) {
  const auto& cat = Catalog::builtin();
  const std::map<std::string, Category> minimum = {
      {"filter", Category::kData},          {"sort", Category::kData},
      {"aggregate", Category::kData},       {"bin", Category::kData},
      {"setTimeUnit", Category::kData},     {"setChartType", Category::kEncoding},
      {"bindX", Category::kEncoding},       {"bindY", Category::kEncoding},
      {"encodeColor", Category::kEncoding}, {"encodeSize", Category::kEncoding},
      {"facetBy", Category::kEncoding},     {"setMarkShape", Category::kMark},
      {"setMarkIcon", Category::kMark},     {"setColor", Category::kStyling},
      {"setSize", Category::kStyling},      {"setStroke", Category::kStyling},
      {"setStrokeWidth", Category::kStyling}, {"setOpacity", Category::kStyling},
      {"setFontStyle", Category::kStyling}, {"setText", Category::kStyling},
      {"setVisible", Category::kStyling},   {"place", Category::kLayout},
      {"move", Category::kLayout},          {"resize", Category::kLayout},
      {"arrange", Category::kLayout},       {"nameObject", Category::kLayout},
      {"addTrendLine", Category::kAnnotate}, {"addReferenceLine", Category::kAnnotate},
      {"addReferenceBand", Category::kAnnotate}, {"addAverageLine", Category::kAnnotate},
      {"addLabel", Category::kAnnotate},    {"addAnnotation", Category::kAnnotate},
      {"removeObject", Category::kAnnotate},
  };
  for (const auto& [name, category] : minimum) {
    const auto* op = cat.find_operation(name);
    ASSERT_NE(op, nullptr) << name;
    EXPECT_EQ(op->category, category) << name;
  }
  std::set<std::string> names;
  for (const auto& op : cat.operations()) EXPECT_TRUE(names.insert(op.name).second) << op.name;
}

// Random actions over the whole catalog, built through the public factories.
class ActionGenerator {
 public:
  explicit ActionGenerator(std::uint64_t seed) : rng_(seed) {}

  EditingAction next() {
    const auto& cat = Catalog::builtin();
    EditingAction a;
    if (pick(10) == 0) {
      a.operation = "*";
    } else {
      a.operation = cat.operations()[pick(cat.operations().size())].name;
    }
    std::size_t n_objects = 1 + pick(3);
    for (std::size_t i = 0; i < n_objects; ++i) a.objects.push_back(object());
    std::size_t n_params = pick(4);
    for (std::size_t i = 0; i < n_params; ++i) a.parameters.push_back(parameter());
    return a;
  }

 private:
  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  std::string word() {
    static const char* words[] = {"Ford", "abc", "US 2020", "it's", "a\\b", "Sales", "x", "日本", "2012", "_z"};
    return words[pick(std::size(words))];
  }

  ObjectRef object() {
    switch (pick(6)) {
      case 0: return ObjectRef::star();
      case 1: return ObjectRef::pronoun();
      case 2: return ObjectRef::named(word());
      case 3: return ObjectRef::of(static_cast<ComponentKind>(pick(14)));
      case 4: return ObjectRef::field(word());
      default: {
        static const char* props[] = {"shape", "color", "value", "kind", "name", "text", "field", "*"};
        std::vector<Predicate> preds;
        std::size_t n = 1 + pick(3);
        for (std::size_t i = 0; i < n; ++i) preds.push_back({props[pick(std::size(props))], word()});
        return ObjectRef::selector(preds);
      }
    }
  }

  double number() {
    static const double values[] = {0, 1, 2.5, 10, 50, 0.1, 120.5, 1e6, 73.83333333333333, 3};
    return values[pick(std::size(values))];
  }

  ParameterValue parameter() {
    const auto& cat = Catalog::builtin();
    const auto& rules = RuleTable::builtin();
    const auto& role = cat.parameter_roles()[pick(cat.parameter_roles().size())];
    int choice = static_cast<int>(pick(3));
    if (choice == 1 && !role.vague_lexicon.empty()) {
      std::vector<std::string> keys;
      if (role.vague_lexicon == "color") {
        for (const auto& [k, v] : rules.colors) keys.push_back(k);
      } else if (role.vague_lexicon == "range") {
        for (const auto& [k, v] : rules.qualitative_ranges) keys.push_back(k);
      } else {
        for (const auto& [b, s] : rules.extent_bases) {
          keys.push_back(b);
          for (const auto& [adv, m] : rules.extent_scale) keys.push_back(adv + " " + b);
        }
      }
      return ParameterValue::vague(role.name, keys[pick(keys.size())]);
    }
    if ((choice == 2 && !role.relations.empty()) || role.kind == ValueKind::kRelation) {
      std::optional<ObjectRef> anchor;
      if (pick(2)) anchor = object();
      return ParameterValue::relational(role.name, anchor, role.relations[pick(role.relations.size())]);
    }
    switch (role.kind) {
      case ValueKind::kNumber: return ParameterValue::number_value(role.name, number(), role.units[pick(role.units.size())]);
      case ValueKind::kColor: return ParameterValue::exact_color(role.name, Rgb{int(pick(256)), int(pick(256)), int(pick(256))});
      case ValueKind::kText: return ParameterValue::text_value(role.name, word());
      case ValueKind::kEnum: return ParameterValue::enumeration(role.name, role.values[pick(role.values.size())]);
      case ValueKind::kBool: return ParameterValue::boolean(role.name, pick(2) == 1);
      case ValueKind::kRange: return ParameterValue::range(role.name, number(), number());
      case ValueKind::kRelation: break;
    }
    return ParameterValue::text_value("text", word());
  }

  std::mt19937_64 rng_;
};

TEST(Property, RoundTripOverCatalog) {
  ActionGenerator gen(20240117);
  for (int i = 0; i < 2000; ++i) {
    auto a = gen.next();
    ASSERT_NO_THROW(validate(a)) << serialize_action(a);
    auto text = serialize_action(a);
    EditingAction back;
    ASSERT_NO_THROW(back = parse_action(text)) << text;
    EXPECT_EQ(back, a) << text;
    EXPECT_EQ(serialize_action(back), text);
  }
}

}  // namespace
}  // namespace nlchart
