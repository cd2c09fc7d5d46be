#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlchart/action.hpp"
#include "nlchart/dataset.hpp"

namespace nlchart {

/// A live object: `object` is an id inside chart `chart`; "chart" is the
/// chart itself.
struct Handle {
  std::string chart;
  std::string object;

  auto operator<=>(const Handle&) const = default;
};

struct Box {
  double x = 0;
  double y = 0;
  double width = 0;
  double height = 0;

  double right() const { return x + width; }
  double bottom() const { return y + height; }
  double center_x() const { return x + width / 2; }

  bool operator==(const Box&) const = default;
};

struct ChartObject {
  std::string id;
  ComponentKind kind = ComponentKind::kMark;
  std::string shape;  // bar | line | point | area | text, empty for plain components
  std::string value;  // category a mark or label stands for
  std::string field;  // bound column for marks and annotations
  std::string name;   // user-assigned
  std::string text;
  Rgb color;
  Rgb stroke;
  double size = 0;  // mark size or font size
  double stroke_width = 0;
  double opacity = 1;
  std::string font_style = "normal";
  bool visible = true;
  Box box;
  std::optional<double> level;  // reference lines
  std::optional<double> lo;     // reference bands
  std::optional<double> hi;
  std::optional<double> datum;  // value a mark or label encodes
};

struct Encoding {
  std::string field;
  std::string aggregate;  // empty = none
  std::string time_unit;  // empty = none
  int bins = 0;           // 0 = not binned

  bool operator==(const Encoding&) const = default;
};

struct Filter {
  std::string field;
  std::optional<double> lo;
  std::optional<double> hi;
  std::vector<std::string> values;  // value filter when non-empty
};

struct ChartState {
  std::string id;
  std::string chart_type = "unset";  // bar | column | line | pictograph | unset
  std::map<std::string, Encoding> encodings;  // x | y | color | size
  std::vector<ChartObject> objects;           // components, marks, annotations
  std::optional<std::pair<std::string, std::string>> sort;  // field, order
  std::vector<Filter> filters;
  std::string facet;
  std::optional<int> layout_columns;
  std::string icon;
  std::string mark_shape;

  ChartObject* find(const std::string& id);
  const ChartObject* find(const std::string& id) const;
  /// Column chart is a bar chart with vertical bars; both share marks.
  bool bar_family() const { return chart_type == "bar" || chart_type == "column" || chart_type == "pictograph"; }
};

enum class Status { kApplied, kRecommended, kClarificationNeeded, kUnsupported };

const char* to_string(Status s);

struct ActionResult {
  EditingAction action;
  Status status = Status::kApplied;
  std::string message;
  std::vector<Handle> targets;
};

struct Outcome {
  std::vector<ActionResult> results;          // one per executed action
  std::vector<ActionResult> recommendations;  // completions the engine applied on its own
  std::uint64_t spec_version = 0;

  nlohmann::json to_json() const;
};

/// A resolved parameter, tagged by which member is meaningful.
struct ResolvedValue {
  enum class Kind { kNumber, kColor, kText, kBool, kRange, kPoint };

  Kind kind = Kind::kText;
  double number = 0;
  Unit unit = Unit::kNone;
  Rgb color;
  std::string text;
  bool flag = false;
  double lo = 0;
  double hi = 0;
  double x = 0;
  double y = 0;
};

struct HistoryEntry {
  std::string utterance;
  std::vector<std::string> actions;  // serialized, as executed
  std::vector<std::string> statuses;
};

/// Runtime for one user: charts over one dataset, names, and the most
/// recently edited objects. Not thread-safe; callers serialize per session.
class Session {
 public:
  explicit Session(std::shared_ptr<const Dataset> dataset, const Catalog& catalog = Catalog::builtin(),
                   const RuleTable& rules = RuleTable::builtin());

  /// Applies actions in order; a failed action does not undo earlier ones.
  Outcome execute(const std::vector<EditingAction>& actions, const std::string& utterance = {});

  /// Star resolves to nothing; Pronoun to the last edited objects. Throws
  /// Error(kNotFound) for unknown names and empty selector matches.
  std::vector<Handle> resolve_object(const ObjectRef& ref) const;
  /// Throws Error(kInvalidValue) for unknown keywords and unit mismatches,
  /// Error(kNotFound) for unresolvable anchors.
  ResolvedValue resolve_parameter(const Handle& target, const ParameterValue& p) const;
  /// Vague or exact range over a column.
  std::pair<double, double> resolve_range(const std::string& field, const ParameterValue& p) const;
  /// setChartType completion for the active chart, if a rule applies.
  std::optional<EditingAction> recommend() const;

  /// Deterministic chart-spec document; sorted keys.
  nlohmann::json export_spec(const std::string& chart_id) const;
  std::string export_spec_text(const std::string& chart_id) const;

  const Dataset& dataset() const { return *dataset_; }
  const std::vector<ChartState>& charts() const { return charts_; }
  const ChartState& active_chart() const { return charts_[active_]; }
  const ChartObject* object(const Handle& h) const;
  const std::vector<Handle>& last_edited() const { return last_edited_; }
  const std::map<std::string, Handle>& names() const { return names_; }
  std::uint64_t version() const { return version_; }

  const std::vector<HistoryEntry>& history() const { return history_; }
  nlohmann::json history_json() const;
  /// Re-executes a history log's actions against a fresh session.
  static Session replay(std::shared_ptr<const Dataset> dataset, const nlohmann::json& history,
                        const Catalog& catalog = Catalog::builtin(), const RuleTable& rules = RuleTable::builtin());

 private:
  struct Applied;

  ChartState& active() { return charts_[active_]; }
  ChartState* chart_by_id(const std::string& id);
  const ChartState* chart_by_id(const std::string& id) const;
  ChartObject* mutable_object(const Handle& h);
  void add_chart();
  void rebuild_marks(ChartState& chart);
  std::vector<std::map<std::string, Cell>> transformed_rows(const ChartState& chart) const;
  std::optional<std::size_t> column(const std::string& field) const;
  std::vector<double> values(const std::string& field) const;
  bool matches(const ChartObject& o, const Predicate& p) const;
  std::vector<Handle> targets_or_default(const EditingAction& action, bool& defaulted) const;
  std::string measure_field(const ChartState& chart) const;

  ActionResult apply(const EditingAction& action);
  Applied apply_data(const EditingAction& action);
  Applied apply_encoding(const EditingAction& action);
  Applied apply_mark(const EditingAction& action);
  Applied apply_styling(const EditingAction& action);
  Applied apply_layout(const EditingAction& action);
  Applied apply_annotate(const EditingAction& action);

  std::shared_ptr<const Dataset> dataset_;
  const Catalog& catalog_;
  const RuleTable& rules_;
  std::vector<ChartState> charts_;
  std::size_t active_ = 0;
  std::map<std::string, Handle> names_;
  std::vector<Handle> last_edited_;
  std::vector<HistoryEntry> history_;
  std::uint64_t version_ = 0;
  std::uint64_t next_object_ = 1;
};

}  // namespace nlchart
