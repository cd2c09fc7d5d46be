#include "nlchart/engine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

#include "nlchart/error.hpp"

namespace nlchart {

namespace {

bool iequals(std::string_view a, std::string_view b) { return to_lower(a) == to_lower(b); }

bool is_annotation(ComponentKind k) {
  return k == ComponentKind::kTrendLine || k == ComponentKind::kReferenceLine || k == ComponentKind::kReferenceBand ||
         k == ComponentKind::kLabel || k == ComponentKind::kAnnotationText;
}

bool is_text_like(ComponentKind k) {
  return k == ComponentKind::kTitle || k == ComponentKind::kLegend || k == ComponentKind::kXAxis ||
         k == ComponentKind::kYAxis || k == ComponentKind::kLabel || k == ComponentKind::kAnnotationText;
}

Box union_box(const std::vector<Box>& boxes) {
  Box out = boxes.front();
  for (const auto& b : boxes) {
    double x0 = std::min(out.x, b.x), y0 = std::min(out.y, b.y);
    double x1 = std::max(out.right(), b.right()), y1 = std::max(out.bottom(), b.bottom());
    out = {x0, y0, x1 - x0, y1 - y0};
  }
  return out;
}

double aggregate_of(const std::string& fn, std::vector<double> v) {
  if (v.empty()) return 0;
  if (fn == "count") return static_cast<double>(v.size());
  if (fn == "max") return *std::max_element(v.begin(), v.end());
  if (fn == "min") return *std::min_element(v.begin(), v.end());
  double sum = std::accumulate(v.begin(), v.end(), 0.0);
  if (fn == "average") return sum / static_cast<double>(v.size());
  if (fn == "median") {
    std::sort(v.begin(), v.end());
    auto n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
  }
  return sum;
}

nlohmann::json box_json(const Box& b) { return {{"x", b.x}, {"y", b.y}, {"width", b.width}, {"height", b.height}}; }

// Carries a defaulted flag and message out of the per-category handlers.
struct Clarify : Error {
  explicit Clarify(std::string message) : Error(Errc::kNotFound, std::move(message)) {}
};

}  // namespace

struct Session::Applied {
  std::vector<Handle> targets;
  bool defaulted = false;
  bool touches_objects = true;  // updates last_edited
  std::string message;
};

const char* to_string(Status s) {
  switch (s) {
    case Status::kApplied: return "applied";
    case Status::kRecommended: return "recommended";
    case Status::kClarificationNeeded: return "clarification_needed";
    case Status::kUnsupported: return "unsupported";
  }
  return "?";
}

ChartObject* ChartState::find(const std::string& id) {
  for (auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

const ChartObject* ChartState::find(const std::string& id) const {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

nlohmann::json Outcome::to_json() const {
  auto one = [](const ActionResult& r) {
    nlohmann::json targets = nlohmann::json::array();
    for (const auto& t : r.targets) targets.push_back(t.chart + "/" + t.object);
    nlohmann::json j = {{"action", serialize_action(r.action)}, {"status", to_string(r.status)}, {"targets", targets}};
    if (!r.message.empty()) j["message"] = r.message;
    return j;
  };
  nlohmann::json done = nlohmann::json::array(), recs = nlohmann::json::array();
  for (const auto& r : results) done.push_back(one(r));
  for (const auto& r : recommendations) recs.push_back(one(r));
  return {{"results", done}, {"recommendations", recs}, {"version", spec_version}};
}

// ---------------------------------------------------------------------------

Session::Session(std::shared_ptr<const Dataset> dataset, const Catalog& catalog, const RuleTable& rules)
    : dataset_(std::move(dataset)), catalog_(catalog), rules_(rules) {
  if (!dataset_) throw Error(Errc::kInvalidValue, "session needs a dataset");
  add_chart();
}

void Session::add_chart() {
  const auto& d = rules_.defaults;
  ChartState c;
  c.id = "chart" + std::to_string(charts_.size() + 1);
  const double pw = d.canvas_width - d.margin_left - d.margin_right;
  const double ph = d.canvas_height - d.margin_top - d.margin_bottom;
  auto add = [&](std::string id, ComponentKind kind, Box box, double size, Rgb color) {
    ChartObject o;
    o.id = std::move(id);
    o.kind = kind;
    o.box = box;
    o.size = size;
    o.color = color;
    o.stroke = d.stroke_color;
    c.objects.push_back(std::move(o));
  };
  const Rgb white{255, 255, 255};
  add("chart", ComponentKind::kChart, {0, 0, d.canvas_width, d.canvas_height}, 0, white);
  add("canvas", ComponentKind::kCanvas, {0, 0, d.canvas_width, d.canvas_height}, 0, white);
  add("plot", ComponentKind::kPlotArea, {d.margin_left, d.margin_top, pw, ph}, 0, white);
  add("title", ComponentKind::kTitle, {d.margin_left, 0, pw, d.margin_top}, d.title_font_size, d.text_color);
  add("legend", ComponentKind::kLegend, {d.margin_left + pw - 80, d.margin_top, 80, 40}, d.font_size, d.text_color);
  add("xAxis", ComponentKind::kXAxis, {d.margin_left, d.margin_top + ph, pw, d.margin_bottom}, d.font_size,
      d.text_color);
  add("yAxis", ComponentKind::kYAxis, {0, d.margin_top, d.margin_left, ph}, d.font_size, d.text_color);
  add("gridlines", ComponentKind::kGridlines, {d.margin_left, d.margin_top, pw, ph}, 0, Rgb{221, 221, 221});
  charts_.push_back(std::move(c));
  active_ = charts_.size() - 1;
}

ChartState* Session::chart_by_id(const std::string& id) {
  for (auto& c : charts_) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

const ChartState* Session::chart_by_id(const std::string& id) const {
  for (const auto& c : charts_) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

const ChartObject* Session::object(const Handle& h) const {
  const auto* c = chart_by_id(h.chart);
  return c ? c->find(h.object) : nullptr;
}

ChartObject* Session::mutable_object(const Handle& h) {
  auto* c = chart_by_id(h.chart);
  return c ? c->find(h.object) : nullptr;
}

std::optional<std::size_t> Session::column(const std::string& field) const { return dataset_->column_index(field); }

std::vector<double> Session::values(const std::string& field) const {
  auto c = column(field);
  if (!c) throw Clarify("unknown field '" + field + "'");
  return dataset_->numbers(*c);
}

// ---------------------------------------------------------------------------
// Data pipeline and marks

std::vector<std::map<std::string, Cell>> Session::transformed_rows(const ChartState& chart) const {
  std::vector<std::map<std::string, Cell>> rows;
  for (const auto& r : dataset_->rows()) {
    std::map<std::string, Cell> row;
    for (std::size_t i = 0; i < r.size(); ++i) row[dataset_->columns()[i].name] = r[i];
    rows.push_back(std::move(row));
  }
  for (const auto& f : chart.filters) {
    std::erase_if(rows, [&](const auto& row) {
      const auto& cell = row.at(f.field);
      if (!cell) return true;
      if (!f.values.empty()) {
        return std::none_of(f.values.begin(), f.values.end(), [&](const std::string& v) { return iequals(v, *cell); });
      }
      auto v = parse_number(*cell);
      return !v || (f.lo && *v < *f.lo) || (f.hi && *v > *f.hi);
    });
  }
  auto x = chart.encodings.find("x");
  auto y = chart.encodings.find("y");
  if (x != chart.encodings.end()) {
    const auto& enc = x->second;
    const auto* col = dataset_->column(enc.field);
    if (col && !enc.time_unit.empty() && col->type == SemanticType::kTemporalDate) {
      for (auto& row : rows) {
        auto& cell = row[enc.field];
        if (!cell) continue;
        const auto& tu = enc.time_unit;
        if (tu == "year") {
          cell = cell->substr(0, 4);
        } else if (tu == "month") {
          cell = cell->substr(0, 7);
        } else if (tu == "quarter") {
          int m = std::stoi(cell->substr(5, 2));
          cell = cell->substr(0, 4) + "-Q" + std::to_string((m - 1) / 3 + 1);
        }
      }
    }
    if (col && enc.bins > 0 && col->type == SemanticType::kQuantitative) {
      auto nums = dataset_->numbers(*dataset_->column_index(enc.field));
      if (!nums.empty()) {
        double lo = *std::min_element(nums.begin(), nums.end());
        double hi = *std::max_element(nums.begin(), nums.end());
        double width = hi > lo ? (hi - lo) / enc.bins : 1;
        for (auto& row : rows) {
          auto& cell = row[enc.field];
          auto v = cell ? parse_number(*cell) : std::nullopt;
          if (!v) continue;
          int k = std::min(enc.bins - 1, static_cast<int>((*v - lo) / width));
          cell = format_number(lo + k * width) + "-" + format_number(lo + (k + 1) * width);
        }
      }
    }
  }
  // Group by the dimension channels whenever a measure is bound.
  if (x != chart.encodings.end() && y != chart.encodings.end()) {
    const auto* ycol = dataset_->column(y->second.field);
    const auto* xcol = dataset_->column(x->second.field);
    bool measure = ycol && ycol->type == SemanticType::kQuantitative;
    bool dimension = xcol && (xcol->type != SemanticType::kQuantitative || x->second.bins > 0);
    if (measure && dimension) {
      std::vector<std::string> keys;
      auto color = chart.encodings.find("color");
      std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
      std::vector<std::pair<std::string, std::string>> order;
      for (const auto& row : rows) {
        const auto& xc = row.at(x->second.field);
        if (!xc) continue;
        std::string series;
        if (color != chart.encodings.end() && row.at(color->second.field)) series = *row.at(color->second.field);
        auto key = std::make_pair(*xc, series);
        if (!groups.count(key)) order.push_back(key);
        auto& g = groups[key];
        if (const auto& yc = row.at(y->second.field)) {
          if (auto v = parse_number(*yc)) g.push_back(*v);
        }
      }
      const auto fn = y->second.aggregate.empty() ? rules_.defaults.aggregate : y->second.aggregate;
      std::vector<std::map<std::string, Cell>> grouped;
      for (const auto& key : order) {
        std::map<std::string, Cell> row;
        row[x->second.field] = key.first;
        if (color != chart.encodings.end()) row[color->second.field] = key.second;
        row[y->second.field] = format_number(aggregate_of(fn, groups[key]));
        grouped.push_back(std::move(row));
      }
      rows = std::move(grouped);
    }
  }
  if (chart.sort) {
    const auto& [field, order] = *chart.sort;
    bool desc = order == "descending";
    std::stable_sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) {
      auto ia = a.find(field), ib = b.find(field);
      const Cell ca = ia == a.end() ? Cell{} : ia->second;
      const Cell cb = ib == b.end() ? Cell{} : ib->second;
      if (!ca || !cb) return ca.has_value() && !cb.has_value();
      auto na = parse_number(*ca), nb = parse_number(*cb);
      if (na && nb) return desc ? *na > *nb : *na < *nb;
      return desc ? *ca > *cb : *ca < *cb;
    });
  }
  return rows;
}

void Session::rebuild_marks(ChartState& chart) {
  const auto& d = rules_.defaults;
  std::map<std::string, ChartObject> old;
  for (auto& o : chart.objects) {
    if (o.kind == ComponentKind::kMark) old[o.id] = o;
  }
  std::erase_if(chart.objects, [](const ChartObject& o) { return o.kind == ComponentKind::kMark; });

  auto x = chart.encodings.find("x");
  auto y = chart.encodings.find("y");
  std::vector<ChartObject> marks;
  if (chart.chart_type != "unset" && y != chart.encodings.end()) {
    const Box plot = chart.find("plot")->box;
    auto rows = transformed_rows(chart);
    auto keep_style = [&](ChartObject& m) {
      auto it = old.find(m.id);
      if (it == old.end()) return;
      const auto& p = it->second;
      m.color = p.color;
      m.stroke = p.stroke;
      m.size = p.size;
      m.stroke_width = p.stroke_width;
      m.opacity = p.opacity;
      m.visible = p.visible;
      m.name = p.name;
    };
    if (chart.bar_family()) {
      double maxv = 0;
      for (const auto& r : rows) {
        if (const auto& c = r.at(y->second.field)) maxv = std::max(maxv, parse_number(*c).value_or(0));
      }
      if (maxv <= 0) maxv = 1;
      const bool horizontal = chart.chart_type == "bar";
      const double band = (horizontal ? plot.height : plot.width) / std::max<std::size_t>(rows.size(), 1);
      std::set<std::string> used;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        ChartObject m;
        m.kind = ComponentKind::kMark;
        m.shape = "bar";
        if (x != chart.encodings.end() && rows[i].at(x->second.field)) {
          m.value = *rows[i].at(x->second.field);
        } else {
          m.value = std::to_string(i + 1);
        }
        m.id = "mark:" + m.value;
        for (int k = 2; used.count(m.id); ++k) m.id = "mark:" + m.value + "#" + std::to_string(k);
        used.insert(m.id);
        m.field = y->second.field;
        const auto& cell = rows[i].at(y->second.field);
        m.datum = cell ? parse_number(*cell).value_or(0) : 0;
        double len = *m.datum / maxv * (horizontal ? plot.width : plot.height);
        double pos = band * static_cast<double>(i) + band * 0.1;
        m.box = horizontal ? Box{plot.x, plot.y + pos, len, band * 0.8}
                           : Box{plot.x + pos, plot.bottom() - len, band * 0.8, len};
        m.color = d.mark_color;
        m.stroke = d.stroke_color;
        m.size = d.mark_size;
        m.stroke_width = d.bar_stroke_width;
        keep_style(m);
        marks.push_back(std::move(m));
      }
    } else if (chart.chart_type == "line") {
      ChartObject m;
      m.id = "mark:line";
      m.kind = ComponentKind::kMark;
      m.shape = "line";
      m.value = y->second.field;
      m.field = y->second.field;
      m.box = plot;
      m.color = d.mark_color;
      m.stroke = d.mark_color;
      m.size = d.mark_size;
      m.stroke_width = d.line_stroke_width;
      keep_style(m);
      marks.push_back(std::move(m));
    }
  }
  // Labels follow their marks and vanish with them.
  std::erase_if(chart.objects, [&](const ChartObject& o) {
    if (o.kind != ComponentKind::kLabel) return false;
    return std::none_of(marks.begin(), marks.end(), [&](const ChartObject& m) { return m.value == o.value; });
  });
  for (auto& o : chart.objects) {
    if (o.kind != ComponentKind::kLabel) continue;
    for (const auto& m : marks) {
      if (m.value != o.value) continue;
      o.datum = m.datum;
      o.text = m.datum ? format_number(*m.datum) : "";
      o.box = {m.box.center_x(), m.box.y - rules_.deltas.on_top_offset_px, 0, 0};
    }
  }
  for (auto& m : marks) chart.objects.push_back(std::move(m));

  std::set<std::string> live;
  for (const auto& o : chart.objects) live.insert(o.id);
  std::erase_if(last_edited_, [&](const Handle& h) { return h.chart == chart.id && !live.count(h.object); });
  std::erase_if(names_, [&](const auto& kv) { return kv.second.chart == chart.id && !live.count(kv.second.object); });
}

// ---------------------------------------------------------------------------
// Resolution

bool Session::matches(const ChartObject& o, const Predicate& p) const {
  const auto& v = p.value;
  if (p.property == "shape") return iequals(o.shape, v);
  if (p.property == "value") return iequals(o.value, v);
  if (p.property == "name") return !o.name.empty() && iequals(o.name, v);
  if (p.property == "text") return iequals(o.text, v);
  if (p.property == "field") return iequals(o.field, v);
  if (p.property == "kind") {
    auto k = component_from_string(v);
    return k && *k == o.kind;
  }
  if (p.property == "color") {
    auto c = rules_.color(to_lower(v));
    if (!c) c = Rgb::from_hex(v);
    return c && *c == o.color;
  }
  // wildcard: any descriptive property equal to the phrase
  for (const auto* s : {&o.value, &o.text, &o.name, &o.field, &o.shape}) {
    if (!s->empty() && iequals(*s, v)) return true;
  }
  return iequals(to_string(o.kind), v);
}

std::vector<Handle> Session::resolve_object(const ObjectRef& ref) const {
  const auto& chart = active_chart();
  std::vector<Handle> out;
  switch (ref.kind) {
    case ObjectRef::Kind::kStar: return out;
    case ObjectRef::Kind::kPronoun: return last_edited_;
    case ObjectRef::Kind::kNamed: {
      for (const auto& [name, h] : names_) {
        if (iequals(name, ref.name)) return {h};
      }
      throw Error(Errc::kNotFound, "no object named '" + ref.name + "'");
    }
    case ObjectRef::Kind::kComponent:
      for (const auto& o : chart.objects) {
        if (o.kind == ref.component) out.push_back({chart.id, o.id});
      }
      if (out.empty()) throw Error(Errc::kNotFound, std::string("no ") + to_string(ref.component) + " in " + chart.id);
      return out;
    case ObjectRef::Kind::kField:
      for (const auto& o : chart.objects) {
        if (iequals(o.field, ref.name)) out.push_back({chart.id, o.id});
      }
      if (out.empty()) throw Error(Errc::kNotFound, "nothing bound to field '" + ref.name + "'");
      return out;
    case ObjectRef::Kind::kSelector:
      for (const auto& o : chart.objects) {
        bool all = std::all_of(ref.predicates.begin(), ref.predicates.end(),
                               [&](const Predicate& p) { return matches(o, p); });
        if (all) out.push_back({chart.id, o.id});
      }
      if (out.empty()) throw Error(Errc::kNotFound, "no object matches " + serialize_object(ref));
      return out;
  }
  return out;
}

std::pair<double, double> Session::resolve_range(const std::string& field, const ParameterValue& p) const {
  if (p.form == ParameterValue::Form::kExact && p.kind == ValueKind::kRange) return {p.lo, p.hi};
  if (p.form != ParameterValue::Form::kVague) throw Error(Errc::kInvalidValue, "not a range: " + serialize_parameter(p));
  auto it = rules_.qualitative_ranges.find(p.keyword);
  if (it == rules_.qualitative_ranges.end()) throw Error(Errc::kInvalidValue, "unknown range keyword '" + p.keyword + "'");
  auto nums = values(field);
  if (nums.empty()) throw Error(Errc::kInvalidValue, "field '" + field + "' has no numbers");
  double mean = std::accumulate(nums.begin(), nums.end(), 0.0) / static_cast<double>(nums.size());
  double lo = *std::min_element(nums.begin(), nums.end());
  double hi = *std::max_element(nums.begin(), nums.end());
  auto stat = [&](const std::string& s) { return s == "mean" ? mean : s == "min" ? lo : hi; };
  return {stat(it->second.first), stat(it->second.second)};
}

ResolvedValue Session::resolve_parameter(const Handle& target, const ParameterValue& p) const {
  const auto* role = catalog_.find_parameter_role(p.role);
  if (!role) throw Error(Errc::kUnknownRole, "unknown parameter role '" + p.role + "'");
  const auto* obj = object(target);
  ResolvedValue out;
  auto current = [&]() -> const ChartObject& {
    if (!obj) throw Error(Errc::kNotFound, "target is not live");
    return *obj;
  };
  if (p.form == ParameterValue::Form::kVague) {
    if (role->vague_lexicon == "color") {
      auto c = rules_.color(p.keyword);
      if (!c) throw Error(Errc::kInvalidValue, "unknown color '" + p.keyword + "'");
      out.kind = ResolvedValue::Kind::kColor;
      out.color = *c;
      return out;
    }
    if (role->vague_lexicon == "extent") {
      if (!rules_.is_extent_keyword(p.keyword)) throw Error(Errc::kInvalidValue, "unknown extent '" + p.keyword + "'");
      out.kind = ResolvedValue::Kind::kNumber;
      out.number = current().size * rules_.extent_multiplier(p.keyword);
      return out;
    }
    if (role->vague_lexicon == "range") {
      std::string field = obj && !obj->field.empty() ? obj->field : measure_field(active_chart());
      auto [lo, hi] = resolve_range(field, p);
      out.kind = ResolvedValue::Kind::kRange;
      out.lo = lo;
      out.hi = hi;
      return out;
    }
    throw Error(Errc::kInvalidValue, "role '" + p.role + "' takes no vague keywords");
  }
  if (p.form == ParameterValue::Form::kRelational) {
    if (!role->allows_relation(p.relation)) {
      throw Error(Errc::kInvalidValue, "relation '" + p.relation + "' not allowed for '" + p.role + "'");
    }
    if (p.role == "position") {
      Box self = current().box;
      Box anchor = self;
      if (p.anchor) {
        auto handles = resolve_object(*p.anchor);
        if (handles.empty()) throw Error(Errc::kNotFound, "anchor did not resolve");
        std::vector<Box> boxes;
        for (const auto& h : handles) boxes.push_back(object(h)->box);
        anchor = union_box(boxes);
      }
      const double d = rules_.deltas.on_top_offset_px;
      out.kind = ResolvedValue::Kind::kPoint;
      if (p.relation == "right") {
        out.x = anchor.right() + d;
        out.y = anchor.y;
      } else if (p.relation == "left") {
        out.x = anchor.x - d - self.width;
        out.y = anchor.y;
      } else if (p.relation == "top") {
        out.x = anchor.center_x() - self.width / 2;
        out.y = anchor.y - d - self.height;
      } else {
        out.x = anchor.center_x() - self.width / 2;
        out.y = anchor.bottom() + d;
      }
      return out;
    }
    if (p.anchor) throw Error(Errc::kInvalidValue, "only positions take an anchor object");
    auto factor = rules_.relation_factor(p.role, p.relation);
    if (!factor) throw Error(Errc::kInvalidValue, "no delta for " + p.role + "[" + p.relation + "]");
    const auto& o = current();
    if (role->kind == ValueKind::kColor) {
      out.kind = ResolvedValue::Kind::kColor;
      out.color = scale_lightness(o.color, *factor);
    } else {
      out.kind = ResolvedValue::Kind::kNumber;
      out.number = (p.role == "strokeWidth" ? o.stroke_width : o.size) * *factor;
    }
    return out;
  }
  if (role->kind == ValueKind::kNumber && !role->allows_unit(p.unit)) {
    throw Error(Errc::kInvalidValue, "unit not allowed for '" + p.role + "'");
  }
  switch (p.kind) {
    case ValueKind::kNumber:
      out.kind = ResolvedValue::Kind::kNumber;
      out.number = p.number;
      out.unit = p.unit;
      break;
    case ValueKind::kColor:
      out.kind = ResolvedValue::Kind::kColor;
      out.color = p.color;
      break;
    case ValueKind::kBool:
      out.kind = ResolvedValue::Kind::kBool;
      out.flag = p.flag;
      break;
    case ValueKind::kRange:
      out.kind = ResolvedValue::Kind::kRange;
      out.lo = p.lo;
      out.hi = p.hi;
      break;
    default:
      out.kind = ResolvedValue::Kind::kText;
      out.text = p.text;
      break;
  }
  return out;
}

std::string Session::measure_field(const ChartState& chart) const {
  auto y = chart.encodings.find("y");
  if (y != chart.encodings.end()) return y->second.field;
  throw Clarify("no field is bound to the y axis");
}

std::optional<EditingAction> Session::recommend() const {
  const auto& chart = active_chart();
  auto type_of = [&](const char* channel) -> std::string {
    auto it = chart.encodings.find(channel);
    if (it == chart.encodings.end()) return "none";
    const auto* col = dataset_->column(it->second.field);
    return col ? to_string(col->type) : "none";
  };
  const std::string y = type_of("y"), x = type_of("x");
  if (x == "none" && y == "none") return std::nullopt;
  for (const auto& [measure, dimension] : {std::pair{y, x}, std::pair{x, y}}) {
    for (const auto& rule : rules_.recommendation_rules) {
      if (rule.measure != measure) continue;
      if (std::find(rule.dimension.begin(), rule.dimension.end(), dimension) == rule.dimension.end()) continue;
      EditingAction a;
      a.operation = "setChartType";
      a.parameters.push_back(ParameterValue::enumeration("chartType", rule.chart));
      return a;
    }
  }
  return std::nullopt;
}

std::vector<Handle> Session::targets_or_default(const EditingAction& action, bool& defaulted) const {
  std::vector<Handle> out;
  for (const auto& o : action.objects) {
    auto hs = resolve_object(o);
    for (const auto& h : hs) {
      if (std::find(out.begin(), out.end(), h) == out.end()) out.push_back(h);
    }
  }
  bool all_star = std::all_of(action.objects.begin(), action.objects.end(), [](const ObjectRef& o) { return o.is_star(); });
  if (out.empty() && all_star) {
    out = last_edited_;
    defaulted = !out.empty();
  }
  if (out.empty()) throw Clarify("no object to apply " + action.operation + " to");
  return out;
}

// ---------------------------------------------------------------------------
// Execution

namespace {

const ParameterValue* param(const EditingAction& a, std::string_view role) { return a.parameter(role); }

std::optional<std::string> field_object(const EditingAction& a) {
  for (const auto& o : a.objects) {
    if (o.kind == ObjectRef::Kind::kField) return o.name;
    if (o.kind == ObjectRef::Kind::kSelector) {
      if (auto f = o.predicate("field")) return f;
    }
  }
  return std::nullopt;
}

}  // namespace

Session::Applied Session::apply_data(const EditingAction& a) {
  auto& chart = active();
  Applied r;
  r.touches_objects = false;
  r.targets = {{chart.id, "chart"}};
  auto resolve_field = [&](const std::string& fallback_channel) {
    if (auto f = field_object(a)) {
      const auto* col = dataset_->column(*f);
      if (!col) throw Clarify("unknown field '" + *f + "'");
      return col->name;
    }
    auto it = chart.encodings.find(fallback_channel);
    if (it == chart.encodings.end()) throw Clarify("no field given and nothing bound to " + fallback_channel);
    r.defaulted = true;
    return it->second.field;
  };
  const auto& op = a.operation;
  if (op == "sort") {
    auto field = resolve_field(rules_.sort_default.channel);
    std::string order = rules_.sort_default.order;
    if (const auto* p = param(a, "order")) {
      order = p->text;
    } else {
      r.defaulted = true;
    }
    chart.sort = {{field, order}};
  } else if (op == "filter") {
    Filter f;
    for (const auto& o : a.objects) {
      auto v = o.predicate("value");
      if (!v) continue;
      for (const auto& col : dataset_->columns()) {
        bool has = std::any_of(col.distinct_values.begin(), col.distinct_values.end(),
                               [&](const std::string& d) { return iequals(d, *v); });
        if (has && (f.field.empty() || f.field == col.name)) {
          f.field = col.name;
          f.values.push_back(*v);
          break;
        }
      }
    }
    if (f.values.empty()) {
      const auto* p = param(a, "range");
      if (!p) throw Clarify("filter needs a range or values");
      f.field = field_object(a) ? resolve_field("y") : measure_field(chart);
      auto [lo, hi] = resolve_range(f.field, *p);
      f.lo = lo;
      f.hi = hi;
    }
    chart.filters.push_back(std::move(f));
  } else if (op == "aggregate") {
    auto field = resolve_field("y");
    std::string fn = rules_.defaults.aggregate;
    if (const auto* p = param(a, "aggregate")) {
      fn = p->text;
    } else {
      r.defaulted = true;
    }
    std::string channel = "y";
    for (const auto& [ch, enc] : chart.encodings) {
      if (enc.field == field) channel = ch;
    }
    auto& enc = chart.encodings[channel];
    if (enc.field.empty()) enc.field = field;
    enc.aggregate = fn;
  } else if (op == "bin") {
    auto field = resolve_field("x");
    int bins = rules_.defaults.bin_count;
    if (const auto* p = param(a, "count")) {
      bins = static_cast<int>(p->number);
    } else {
      r.defaulted = true;
    }
    if (bins < 1) throw Error(Errc::kInvalidValue, "bin count must be positive");
    std::string channel = "x";
    for (const auto& [ch, enc] : chart.encodings) {
      if (enc.field == field) channel = ch;
    }
    auto& enc = chart.encodings[channel];
    if (enc.field.empty()) enc.field = field;
    enc.bins = bins;
  } else if (op == "setTimeUnit") {
    auto field = resolve_field("x");
    const auto* p = param(a, "timeUnit");
    if (!p) throw Clarify("which time unit?");
    std::string channel = "x";
    for (const auto& [ch, enc] : chart.encodings) {
      if (enc.field == field) channel = ch;
    }
    auto& enc = chart.encodings[channel];
    if (enc.field.empty()) enc.field = field;
    enc.time_unit = p->text;
  } else {
    throw Error(Errc::kUnknownOperation, "unsupported data operation '" + op + "'");
  }
  rebuild_marks(chart);
  return r;
}

Session::Applied Session::apply_encoding(const EditingAction& a) {
  Applied r;
  r.touches_objects = false;
  const auto& op = a.operation;
  if (op == "setChartType") {
    ChartState* chart = &active();
    for (const auto& o : a.objects) {
      if (o.kind == ObjectRef::Kind::kNamed) {
        auto hs = resolve_object(o);
        chart = chart_by_id(hs.front().chart);
      }
    }
    const auto* p = param(a, "chartType");
    std::string type;
    if (p) {
      type = p->text;
    } else {
      auto rec = recommend();
      if (!rec) throw Clarify("no chart type given and none can be recommended");
      type = rec->parameters.front().text;
      r.defaulted = true;
    }
    chart->chart_type = type;
    if (type == "pictograph" && chart->icon.empty()) {
      chart->icon = rules_.defaults.icon;
      r.defaulted = true;
    }
    rebuild_marks(*chart);
    r.targets = {{chart->id, "chart"}};
    return r;
  }
  static const std::map<std::string, std::string> kChannel = {
      {"bindX", "x"}, {"bindY", "y"}, {"encodeColor", "color"}, {"encodeSize", "size"}, {"facetBy", "facet"}};
  auto it = kChannel.find(op);
  if (it == kChannel.end()) throw Error(Errc::kUnknownOperation, "unsupported encoding operation '" + op + "'");
  const auto* p = param(a, "field");
  if (!p) throw Clarify("which field should " + op + " use?");
  const auto* col = dataset_->column(p->text);
  if (!col) throw Clarify("unknown field '" + p->text + "'");
  auto& chart = active();
  if (it->second == "facet") {
    chart.facet = col->name;
  } else {
    chart.encodings[it->second] = Encoding{col->name, {}, {}, 0};
  }
  rebuild_marks(chart);
  r.targets = {{chart.id, "chart"}};
  return r;
}

Session::Applied Session::apply_mark(const EditingAction& a) {
  Applied r;
  r.touches_objects = false;
  auto& chart = active();
  if (a.operation == "setMarkShape") {
    const auto* p = param(a, "shape");
    if (!p) throw Clarify("which mark shape?");
    chart.mark_shape = p->text;
  } else if (a.operation == "setMarkIcon") {
    const auto* p = param(a, "icon");
    if (!p) throw Clarify("which icon?");
    chart.icon = p->text;
  } else {
    throw Error(Errc::kUnknownOperation, "unsupported mark operation '" + a.operation + "'");
  }
  r.targets = {{chart.id, "chart"}};
  return r;
}

Session::Applied Session::apply_styling(const EditingAction& a) {
  Applied r;
  r.targets = targets_or_default(a, r.defaulted);
  const auto& op = a.operation;
  auto need = [&](std::string_view role) -> const ParameterValue& {
    const auto* p = param(a, role);
    if (!p) throw Clarify(op + " needs a " + std::string(role));
    return *p;
  };
  // Resolve everything first so a bad target leaves nothing half-applied.
  std::vector<std::function<void()>> writes;
  for (const auto& h : r.targets) {
    auto* o = mutable_object(h);
    if (!o) throw Clarify("object vanished");
    if (op == "setColor") {
      auto v = resolve_parameter(h, need("color"));
      writes.push_back([o, v] { o->color = v.color; });
    } else if (op == "setStroke") {
      auto v = resolve_parameter(h, need("stroke"));
      writes.push_back([o, v, this] {
        o->stroke = v.color;
        if (o->stroke_width <= 0) o->stroke_width = rules_.defaults.annotation_stroke_width;
      });
    } else if (op == "setSize") {
      const ParameterValue* p = param(a, "size");
      if (!p) p = param(a, "extent");
      if (!p) throw Clarify("setSize needs a size");
      auto v = resolve_parameter(h, *p);
      double size = v.unit == Unit::kPercent ? o->size * v.number / 100 : v.number;
      if (size <= 0) throw Error(Errc::kInvalidValue, "size must be positive");
      writes.push_back([o, size] { o->size = size; });
    } else if (op == "setStrokeWidth") {
      auto v = resolve_parameter(h, need("strokeWidth"));
      if (v.number < 0) throw Error(Errc::kInvalidValue, "stroke width must not be negative");
      writes.push_back([o, v] { o->stroke_width = v.number; });
    } else if (op == "setOpacity") {
      auto v = resolve_parameter(h, need("opacity"));
      double x = v.unit == Unit::kPercent || v.number > 1 ? v.number / 100 : v.number;
      if (x < 0 || x > 1) throw Error(Errc::kInvalidValue, "opacity out of range");
      writes.push_back([o, x] { o->opacity = x; });
    } else if (op == "setFontStyle") {
      auto v = resolve_parameter(h, need("fontStyle"));
      if (!is_text_like(o->kind)) throw Error(Errc::kInvalidValue, std::string(to_string(o->kind)) + " has no font");
      writes.push_back([o, v] { o->font_style = v.text; });
    } else if (op == "setText") {
      auto v = resolve_parameter(h, need("text"));
      writes.push_back([o, v] { o->text = v.text; });
    } else if (op == "setVisible") {
      bool flag = false;
      if (const auto* p = param(a, "visible")) {
        flag = resolve_parameter(h, *p).flag;
      } else {
        r.defaulted = true;
      }
      writes.push_back([o, flag] { o->visible = flag; });
    } else {
      throw Error(Errc::kUnknownOperation, "unsupported styling operation '" + op + "'");
    }
  }
  for (auto& w : writes) w();
  return r;
}

Session::Applied Session::apply_layout(const EditingAction& a) {
  Applied r;
  const auto& op = a.operation;
  if (op == "addChart") {
    add_chart();
    r.targets = {{active().id, "chart"}};
    return r;
  }
  if (op == "arrange") {
    const auto* p = param(a, "count");
    if (!p) throw Clarify("how many columns?");
    int n = static_cast<int>(p->number);
    if (n < 1) throw Error(Errc::kInvalidValue, "column count must be positive");
    std::set<std::string> ids;
    bool all = false;
    for (const auto& o : a.objects) {
      // "the charts" means every chart, not the active one
      if (o.kind == ObjectRef::Kind::kComponent && o.component == ComponentKind::kChart) {
        all = true;
        continue;
      }
      for (const auto& h : resolve_object(o)) ids.insert(h.chart);
    }
    if (ids.empty() || all) {
      for (const auto& c : charts_) ids.insert(c.id);
    }
    for (auto& c : charts_) {
      if (ids.count(c.id)) {
        c.layout_columns = n;
        r.targets.push_back({c.id, "chart"});
      }
    }
    return r;
  }
  if (op == "nameObject") {
    const auto* p = param(a, "name");
    if (!p) throw Clarify("what name?");
    std::vector<Handle> targets;
    for (const auto& o : a.objects) {
      for (const auto& h : resolve_object(o)) targets.push_back(h);
    }
    if (targets.empty()) targets = last_edited_.empty() ? std::vector<Handle>{{active().id, "chart"}} : last_edited_;
    if (targets.size() != 1) throw Clarify("a name must refer to exactly one object");
    for (auto it = names_.begin(); it != names_.end();) {
      if (iequals(it->first, p->text) || it->second == targets.front()) {
        if (auto* old = mutable_object(it->second)) old->name.clear();
        it = names_.erase(it);
      } else {
        ++it;
      }
    }
    names_[p->text] = targets.front();
    mutable_object(targets.front())->name = p->text;
    r.targets = targets;
    return r;
  }
  r.targets = targets_or_default(a, r.defaulted);
  std::vector<std::function<void()>> writes;
  for (const auto& h : r.targets) {
    auto* o = mutable_object(h);
    if (op == "place") {
      const auto* p = param(a, "position");
      if (!p) throw Clarify("where should it go?");
      auto v = resolve_parameter(h, *p);
      writes.push_back([o, v] {
        o->box.x = v.x;
        o->box.y = v.y;
      });
    } else if (op == "move") {
      const auto* dir = param(a, "direction");
      if (!dir) throw Clarify("which direction?");
      double offset = rules_.defaults.move_offset_px;
      if (const auto* p = param(a, "offset")) {
        offset = resolve_parameter(h, *p).number;
      } else {
        r.defaulted = true;
      }
      const auto d = dir->text;
      writes.push_back([o, d, offset] {
        if (d == "up") o->box.y -= offset;
        if (d == "down") o->box.y += offset;
        if (d == "left") o->box.x -= offset;
        if (d == "right") o->box.x += offset;
      });
    } else if (op == "resize") {
      const auto* w = param(a, "width");
      const auto* hgt = param(a, "height");
      if (!w && !hgt) throw Clarify("resize needs a width or height");
      auto size = [&](const ParameterValue* p, double current) {
        auto v = resolve_parameter(h, *p);
        double out = v.unit == Unit::kPercent ? current * v.number / 100 : v.number;
        if (out <= 0) throw Error(Errc::kInvalidValue, "size must be positive");
        return out;
      };
      double nw = w ? size(w, o->box.width) : o->box.width;
      double nh = hgt ? size(hgt, o->box.height) : o->box.height;
      writes.push_back([o, nw, nh] {
        o->box.width = nw;
        o->box.height = nh;
      });
    } else {
      throw Error(Errc::kUnknownOperation, "unsupported layout operation '" + op + "'");
    }
  }
  for (auto& w : writes) w();
  return r;
}

Session::Applied Session::apply_annotate(const EditingAction& a) {
  Applied r;
  auto& chart = active();
  const auto& d = rules_.defaults;
  const Box plot = chart.find("plot")->box;
  const auto& op = a.operation;
  auto new_object = [&](ComponentKind kind, std::string shape) {
    ChartObject o;
    o.id = std::string(to_string(kind)) + ":" + std::to_string(next_object_++);
    o.kind = kind;
    o.shape = std::move(shape);
    o.color = d.annotation_color;
    o.stroke = d.annotation_color;
    o.stroke_width = d.annotation_stroke_width;
    o.size = d.font_size;
    o.box = plot;
    return o;
  };
  auto annotated_field = [&] {
    if (auto f = field_object(a)) {
      const auto* col = dataset_->column(*f);
      if (!col) throw Clarify("unknown field '" + *f + "'");
      return col->name;
    }
    r.defaulted = true;
    return measure_field(chart);
  };
  auto y_of = [&](double v) {
    double maxv = 0;
    for (const auto& o : chart.objects) {
      if (o.kind == ComponentKind::kMark && o.datum) maxv = std::max(maxv, *o.datum);
    }
    return maxv > 0 ? plot.bottom() - v / maxv * plot.height : plot.bottom();
  };
  auto mean_of = [&](const std::string& field) {
    auto nums = values(field);
    if (nums.empty()) throw Clarify("field '" + field + "' has no numbers");
    return std::accumulate(nums.begin(), nums.end(), 0.0) / static_cast<double>(nums.size());
  };
  std::vector<ChartObject> added;
  if (op == "addTrendLine") {
    auto o = new_object(ComponentKind::kTrendLine, "line");
    o.field = annotated_field();
    added.push_back(std::move(o));
  } else if (op == "addReferenceLine" || op == "addAverageLine") {
    auto o = new_object(ComponentKind::kReferenceLine, "line");
    o.field = annotated_field();
    if (const auto* p = param(a, "level"); p && op == "addReferenceLine") {
      o.level = p->number;
    } else {
      o.level = mean_of(o.field);
      o.text = "average";
      r.defaulted = r.defaulted || op == "addReferenceLine";
    }
    o.box = {plot.x, y_of(*o.level), plot.width, 0};
    added.push_back(std::move(o));
  } else if (op == "addReferenceBand") {
    auto o = new_object(ComponentKind::kReferenceBand, "area");
    o.field = annotated_field();
    if (const auto* p = param(a, "range")) {
      std::tie(o.lo, o.hi) = resolve_range(o.field, *p);
    } else {
      auto nums = values(o.field);
      if (nums.empty()) throw Clarify("field '" + o.field + "' has no numbers");
      o.lo = *std::min_element(nums.begin(), nums.end());
      o.hi = *std::max_element(nums.begin(), nums.end());
      r.defaulted = true;
    }
    double top = y_of(*o.hi), bottom = y_of(*o.lo);
    o.box = {plot.x, top, plot.width, bottom - top};
    o.color = Rgb{238, 238, 238};
    added.push_back(std::move(o));
  } else if (op == "addLabel") {
    std::vector<Handle> marks;
    for (const auto& ref : a.objects) {
      for (const auto& h : resolve_object(ref)) marks.push_back(h);
    }
    if (marks.empty()) {
      for (const auto& o : chart.objects) {
        if (o.kind == ComponentKind::kMark) marks.push_back({chart.id, o.id});
      }
      r.defaulted = true;
    }
    for (const auto& h : marks) {
      const auto* m = object(h);
      if (!m || m->kind != ComponentKind::kMark || m->shape != "bar") continue;
      bool exists = std::any_of(chart.objects.begin(), chart.objects.end(), [&](const ChartObject& o) {
        return o.kind == ComponentKind::kLabel && o.value == m->value;
      });
      if (exists) continue;
      auto o = new_object(ComponentKind::kLabel, "text");
      o.value = m->value;
      o.field = m->field;
      o.datum = m->datum;
      o.text = m->datum ? format_number(*m->datum) : "";
      o.color = d.text_color;
      o.box = {m->box.center_x(), m->box.y - rules_.deltas.on_top_offset_px, 0, 0};
      added.push_back(std::move(o));
    }
    if (added.empty() && marks.empty()) throw Clarify("there are no marks to label");
  } else if (op == "addAnnotation") {
    const auto* text = param(a, "text");
    if (!text) throw Clarify("what should the annotation say?");
    auto o = new_object(ComponentKind::kAnnotationText, "text");
    o.text = text->text;
    o.box = {plot.center_x(), plot.y, 0, 0};
    chart.objects.push_back(o);
    Handle h{chart.id, o.id};
    try {
      if (const auto* pos = param(a, "position")) {
        auto v = resolve_parameter(h, *pos);
        chart.find(o.id)->box.x = v.x;
        chart.find(o.id)->box.y = v.y;
      } else {
        r.defaulted = true;
      }
    } catch (...) {
      chart.objects.pop_back();
      throw;
    }
    r.targets.push_back(h);
    return r;
  } else if (op == "removeObject") {
    r.targets = targets_or_default(a, r.defaulted);
    for (const auto& h : r.targets) {
      auto* c = chart_by_id(h.chart);
      auto* o = c->find(h.object);
      if (o && is_annotation(o->kind)) {
        std::erase_if(c->objects, [&](const ChartObject& x) { return x.id == h.object; });
      } else if (o) {
        o->visible = false;
      }
    }
    r.touches_objects = false;
    std::erase_if(last_edited_, [&](const Handle& h) { return object(h) == nullptr; });
    std::erase_if(names_, [&](const auto& kv) { return object(kv.second) == nullptr; });
    return r;
  } else {
    throw Error(Errc::kUnknownOperation, "unsupported annotation operation '" + op + "'");
  }
  for (auto& o : added) {
    r.targets.push_back({chart.id, o.id});
    chart.objects.push_back(std::move(o));
  }
  return r;
}

ActionResult Session::apply(const EditingAction& action) {
  ActionResult result;
  result.action = action;
  if (action.is_orphan()) {
    result.status = Status::kClarificationNeeded;
    result.message = "no operation";
    return result;
  }
  const auto* op = catalog_.find_operation(action.operation);
  if (!op) {
    result.status = Status::kUnsupported;
    result.message = "unknown operation '" + action.operation + "'";
    return result;
  }
  // Snapshot: a failed action leaves state and version untouched.
  auto charts = charts_;
  auto names = names_;
  auto last = last_edited_;
  auto active = active_;
  auto next = next_object_;
  try {
    Applied applied;
    switch (op->category) {
      case Category::kData: applied = apply_data(action); break;
      case Category::kEncoding: applied = apply_encoding(action); break;
      case Category::kMark: applied = apply_mark(action); break;
      case Category::kStyling: applied = apply_styling(action); break;
      case Category::kLayout: applied = apply_layout(action); break;
      case Category::kAnnotate: applied = apply_annotate(action); break;
    }
    result.status = applied.defaulted ? Status::kRecommended : Status::kApplied;
    result.message = applied.message;
    result.targets = applied.targets;
    if (applied.touches_objects && !applied.targets.empty()) last_edited_ = applied.targets;
    ++version_;
  } catch (const Error& e) {
    charts_ = std::move(charts);
    names_ = std::move(names);
    last_edited_ = std::move(last);
    active_ = active;
    next_object_ = next;
    result.status = e.code() == Errc::kUnknownOperation ? Status::kUnsupported : Status::kClarificationNeeded;
    result.message = e.what();
  }
  return result;
}

Outcome Session::execute(const std::vector<EditingAction>& actions, const std::string& utterance) {
  Outcome out;
  HistoryEntry entry;
  entry.utterance = utterance;
  for (const auto& a : actions) {
    auto r = apply(a);
    entry.actions.push_back(serialize_action(a));
    entry.statuses.push_back(to_string(r.status));
    out.results.push_back(std::move(r));
  }
  if (active_chart().chart_type == "unset" && !active_chart().encodings.empty()) {
    if (auto rec = recommend()) {
      auto r = apply(*rec);
      if (r.status == Status::kApplied) r.status = Status::kRecommended;
      out.recommendations.push_back(std::move(r));
    }
  }
  history_.push_back(std::move(entry));
  out.spec_version = version_;
  return out;
}

// ---------------------------------------------------------------------------
// Export and replay

nlohmann::json Session::export_spec(const std::string& chart_id) const {
  const auto* chart = chart_by_id(chart_id);
  if (!chart) throw Error(Errc::kNotFound, "no chart '" + chart_id + "'");
  using nlohmann::json;
  auto style = [](const ChartObject& o) {
    json j = {{"id", o.id},
              {"kind", to_string(o.kind)},
              {"color", o.color.hex()},
              {"stroke", o.stroke.hex()},
              {"strokeWidth", o.stroke_width},
              {"opacity", o.opacity},
              {"visible", o.visible},
              {"box", box_json(o.box)}};
    if (o.size > 0) j["size"] = o.size;
    if (!o.shape.empty()) j["shape"] = o.shape;
    if (!o.value.empty()) j["value"] = o.value;
    if (!o.field.empty()) j["field"] = o.field;
    if (!o.name.empty()) j["name"] = o.name;
    if (!o.text.empty()) j["text"] = o.text;
    if (is_text_like(o.kind)) j["fontStyle"] = o.font_style;
    if (o.level) j["level"] = *o.level;
    if (o.lo) j["range"] = {*o.lo, *o.hi};
    if (o.datum) j["datum"] = *o.datum;
    return j;
  };
  json data = json::array();
  for (const auto& row : transformed_rows(*chart)) {
    json r = json::object();
    for (const auto& [k, cell] : row) {
      if (!cell) {
        r[k] = nullptr;
        continue;
      }
      const auto* col = dataset_->column(k);
      auto num = parse_number(*cell);
      bool numeric = col && (col->type == SemanticType::kQuantitative || col->type == SemanticType::kTemporalYear);
      r[k] = numeric && num ? json(*num) : json(*cell);
    }
    data.push_back(std::move(r));
  }
  json encodings = json::object();
  for (const auto& [ch, enc] : chart->encodings) {
    const auto* col = dataset_->column(enc.field);
    json e = {{"field", enc.field}, {"type", col ? to_string(col->type) : "unknown"}};
    if (!enc.aggregate.empty()) e["aggregate"] = enc.aggregate;
    if (!enc.time_unit.empty()) e["timeUnit"] = enc.time_unit;
    if (enc.bins > 0) e["bin"] = enc.bins;
    encodings[ch] = e;
  }
  json marks = json::array(), annotations = json::array(), components = json::object();
  for (const auto& o : chart->objects) {
    if (o.kind == ComponentKind::kMark) {
      marks.push_back(style(o));
    } else if (is_annotation(o.kind)) {
      annotations.push_back(style(o));
    } else {
      components[o.id] = style(o);
    }
  }
  json filters = json::array();
  for (const auto& f : chart->filters) {
    json j = {{"field", f.field}};
    if (!f.values.empty()) j["oneOf"] = f.values;
    if (f.lo) j["range"] = {*f.lo, *f.hi};
    filters.push_back(j);
  }
  const auto& title = *chart->find("title");
  json spec = {
      {"schema", "nlchart-spec/1"},
      {"id", chart->id},
      {"version", version_},
      {"chartType", chart->chart_type},
      {"incomplete", chart->chart_type == "unset"},
      {"data", data},
      {"encodings", encodings},
      {"marks", {{"items", marks}, {"shape", chart->mark_shape.empty() ? json(nullptr) : json(chart->mark_shape)},
                 {"icon", chart->icon.empty() ? json(nullptr) : json(chart->icon)}}},
      {"annotations", annotations},
      {"components", components},
      {"title", title.text},
      {"legend", {{"visible", chart->find("legend")->visible}}},
      {"filters", filters},
      {"facet", chart->facet.empty() ? json(nullptr) : json(chart->facet)},
      {"layout", chart->layout_columns ? json{{"columns", *chart->layout_columns}} : json(nullptr)},
      {"sort", chart->sort ? json{{"field", chart->sort->first}, {"order", chart->sort->second}} : json(nullptr)},
  };
  if (chart->chart_type != "unset") {
    spec["orientation"] = chart->chart_type == "bar" ? "horizontal" : "vertical";
  }
  const auto& self = *chart->find("chart");
  spec["name"] = self.name.empty() ? json(nullptr) : json(self.name);
  return spec;
}

std::string Session::export_spec_text(const std::string& chart_id) const { return export_spec(chart_id).dump(2) + "\n"; }

nlohmann::json Session::history_json() const {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : history_) {
    entries.push_back({{"utterance", e.utterance}, {"actions", e.actions}, {"statuses", e.statuses}});
  }
  return {{"schema", "nlchart-history/1"}, {"dataset", dataset_->name()}, {"entries", entries}};
}

Session Session::replay(std::shared_ptr<const Dataset> dataset, const nlohmann::json& history, const Catalog& catalog,
                        const RuleTable& rules) {
  Session s(std::move(dataset), catalog, rules);
  if (!history.contains("entries") || !history["entries"].is_array()) {
    throw Error(Errc::kSyntax, "history log needs an 'entries' array");
  }
  for (const auto& e : history["entries"]) {
    std::vector<EditingAction> actions;
    for (const auto& a : e.at("actions")) actions.push_back(parse_action(a.get<std::string>(), catalog, rules));
    s.execute(actions, e.value("utterance", std::string()));
  }
  return s;
}

}  // namespace nlchart
