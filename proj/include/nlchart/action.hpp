#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nlchart/catalog.hpp"
#include "nlchart/rules.hpp"
#include "nlchart/text.hpp"

namespace nlchart {

enum class ComponentKind {
  kChart,
  kCanvas,
  kXAxis,
  kYAxis,
  kLegend,
  kTitle,
  kMark,
  kGridlines,
  kTrendLine,
  kReferenceLine,
  kReferenceBand,
  kLabel,
  kAnnotationText,
  kPlotArea,
};

/// Canonical keyword ("xAxis", "plot", ...).
const char* to_string(ComponentKind k);
/// Accepts every canonical keyword plus "plotArea".
std::optional<ComponentKind> component_from_string(std::string_view s);

struct Predicate {
  std::string property;  // a selector property or "*"
  std::string value;

  bool operator==(const Predicate&) const = default;
};

/// Reference to the object(s) an action applies to.
struct ObjectRef {
  enum class Kind { kStar, kPronoun, kNamed, kComponent, kField, kSelector };

  Kind kind = Kind::kStar;
  ComponentKind component = ComponentKind::kChart;  // kComponent only
  std::string name;                                 // kNamed and kField
  std::vector<Predicate> predicates;                // kSelector only, never empty

  static ObjectRef star() { return {}; }
  static ObjectRef pronoun();
  static ObjectRef named(std::string name);
  static ObjectRef of(ComponentKind kind);
  static ObjectRef field(std::string column);
  /// Unknown property names are moved under "*" with the value kept verbatim.
  static ObjectRef selector(std::vector<Predicate> predicates, const Catalog& catalog = Catalog::builtin());

  bool is_star() const { return kind == Kind::kStar; }
  /// Value of the first predicate on `property`, if any.
  std::optional<std::string> predicate(std::string_view property) const;

  bool operator==(const ObjectRef&) const = default;
};

struct ParameterValue {
  enum class Form { kExact, kVague, kRelational };

  Form form = Form::kExact;
  std::string role;  // ParameterRole name
  ValueKind kind = ValueKind::kText;

  // kExact
  double number = 0;
  Unit unit = Unit::kNone;
  std::string text;  // enum and text values
  bool flag = false;
  Rgb color;
  double lo = 0;
  double hi = 0;

  // kVague: the lexicon keyword with single spaces ("very large")
  std::string keyword;

  // kRelational: nullopt anchor means Self
  std::optional<ObjectRef> anchor;
  std::string relation;

  static ParameterValue number_value(std::string role, double v, Unit unit);
  static ParameterValue enumeration(std::string role, std::string v);
  static ParameterValue text_value(std::string role, std::string v);
  static ParameterValue boolean(std::string role, bool v);
  static ParameterValue exact_color(std::string role, Rgb c);
  static ParameterValue range(std::string role, double lo, double hi);
  static ParameterValue vague(std::string role, std::string keyword);
  static ParameterValue relational(std::string role, std::optional<ObjectRef> anchor, std::string relation);

  bool anchored_to_self() const { return form == Form::kRelational && !anchor; }

  bool operator==(const ParameterValue&) const = default;
};

/// The (operation, objects, parameters) triple. operation "*" marks an
/// orphan produced by synthesis.
struct EditingAction {
  std::string operation = "*";
  std::vector<ObjectRef> objects;
  std::vector<ParameterValue> parameters;
  TokenSpan source_span;

  bool is_orphan() const { return operation == "*"; }
  const ParameterValue* parameter(std::string_view role) const;

  /// source_span is provenance, not identity; an empty object list equals [*].
  bool operator==(const EditingAction& o) const;
};

/// Throws Error(kUnknownOperation / kUnknownRole / kInvalidValue) on the
/// first violation of the catalog and rule-table typing.
void validate(const EditingAction& action, const Catalog& catalog = Catalog::builtin(),
              const RuleTable& rules = RuleTable::builtin());

std::string serialize_object(const ObjectRef& ref);
std::string serialize_parameter(const ParameterValue& p);
/// `{op, objects, params}`; byte-stable.
std::string serialize_action(const EditingAction& action);
std::string serialize_actions(const std::vector<EditingAction>& actions);

/// Inverse of serialize_action. Value typing is directed by the parameter
/// role, so `field=Sales` is text while `color=blue` is a vague keyword.
/// Throws ParseError with a byte offset.
EditingAction parse_action(std::string_view doc, const Catalog& catalog = Catalog::builtin(),
                           const RuleTable& rules = RuleTable::builtin());

}  // namespace nlchart
