#include "nlchart/action.hpp"

#include <algorithm>
#include <cctype>

#include "nlchart/error.hpp"

namespace nlchart {

namespace {

struct ComponentName {
  ComponentKind kind;
  const char* name;
};

constexpr ComponentName kComponents[] = {
    {ComponentKind::kChart, "chart"},
    {ComponentKind::kCanvas, "canvas"},
    {ComponentKind::kXAxis, "xAxis"},
    {ComponentKind::kYAxis, "yAxis"},
    {ComponentKind::kLegend, "legend"},
    {ComponentKind::kTitle, "title"},
    {ComponentKind::kMark, "mark"},
    {ComponentKind::kGridlines, "gridlines"},
    {ComponentKind::kTrendLine, "trendLine"},
    {ComponentKind::kReferenceLine, "referenceLine"},
    {ComponentKind::kReferenceBand, "referenceBand"},
    {ComponentKind::kLabel, "label"},
    {ComponentKind::kAnnotationText, "annotationText"},
    {ComponentKind::kPlotArea, "plot"},
};

// Selector properties whose values are data or free text, always quoted.
bool always_quoted(std::string_view property) {
  return property == "*" || property == "value" || property == "name" || property == "text" ||
         property == "field";
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s[0]);
  if (!std::isalpha(head) && s[0] != '_') return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::string quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  out += '\'';
  return out;
}

std::string bare_or_quoted(std::string_view s) {
  return is_identifier(s) ? std::string(s) : quote(s);
}

std::string dotted(std::string_view keyword) {
  std::string out(keyword);
  std::replace(out.begin(), out.end(), ' ', '.');
  return out;
}

std::string undotted(std::string_view keyword) {
  std::string out(keyword);
  std::replace(out.begin(), out.end(), '.', ' ');
  return out;
}

const char* unit_suffix(Unit u) {
  switch (u) {
    case Unit::kPx: return "px";
    case Unit::kPercent: return "%";
    case Unit::kNone:
    case Unit::kCount: return "";
  }
  return "";
}

// Recursive-descent reader over the canonical grammar. Offsets are absolute
// byte positions into the original document.
class Reader {
 public:
  Reader(std::string_view doc, const Catalog& catalog, const RuleTable& rules)
      : doc_(doc), catalog_(catalog), rules_(rules) {}

  EditingAction action() {
    EditingAction a;
    skip_ws();
    expect('{');
    skip_ws();
    std::size_t op_at = pos_;
    if (peek() == '*') {
      ++pos_;
      a.operation = "*";
    } else {
      a.operation = identifier();
      if (!catalog_.find_operation(a.operation)) {
        throw ParseError(Errc::kUnknownOperation, "unknown operation '" + a.operation + "'", op_at);
      }
    }
    skip_ws();
    expect(',');
    a.objects = object_list();
    skip_ws();
    expect(',');
    skip_ws();
    if (peek() == '*' && is_closing_star()) {
      ++pos_;
    } else {
      a.parameters.push_back(parameter());
      skip_ws();
      while (peek() == ',') {
        ++pos_;
        a.parameters.push_back(parameter());
        skip_ws();
      }
    }
    skip_ws();
    expect('}');
    skip_ws();
    if (pos_ != doc_.size()) fail("trailing characters after action");
    return a;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(Errc::kSyntax, msg, pos_); }

  char peek() const { return pos_ < doc_.size() ? doc_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < doc_.size() && std::isspace(static_cast<unsigned char>(doc_[pos_]))) ++pos_;
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  bool at_word_char() const {
    char c = peek();
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  std::string identifier() {
    std::size_t start = pos_;
    while (at_word_char()) ++pos_;
    if (start == pos_) fail("expected identifier");
    return std::string(doc_.substr(start, pos_ - start));
  }

  // A parameter list of exactly `*` is followed by optional space and '}'.
  bool is_closing_star() const {
    std::size_t p = pos_ + 1;
    while (p < doc_.size() && std::isspace(static_cast<unsigned char>(doc_[p]))) ++p;
    return p < doc_.size() && doc_[p] == '}';
  }

  std::string quoted() {
    expect('\'');
    std::string out;
    while (true) {
      if (pos_ >= doc_.size()) fail("unterminated quoted string");
      char c = doc_[pos_++];
      if (c == '\'') break;
      if (c == '\\') {
        if (pos_ >= doc_.size()) fail("dangling escape");
        c = doc_[pos_++];
      }
      out += c;
    }
    return out;
  }

  std::string bare_or_quoted_value() {
    if (peek() == '\'') return quoted();
    return identifier();
  }

  std::vector<ObjectRef> object_list() {
    std::vector<ObjectRef> out;
    skip_ws();
    out.push_back(object());
    skip_ws();
    while (peek() == '+') {
      ++pos_;
      skip_ws();
      out.push_back(object());
      skip_ws();
    }
    return out;
  }

  ObjectRef object() {
    skip_ws();
    if (peek() == '*') {
      ++pos_;
      return ObjectRef::star();
    }
    if (peek() == '[') return selector();
    std::size_t at = pos_;
    auto word = identifier();
    if (word == "it") return ObjectRef::pronoun();
    if (word == "name" || word == "field") {
      expect('(');
      auto value = quoted();
      expect(')');
      return word == "name" ? ObjectRef::named(value) : ObjectRef::field(value);
    }
    if (auto k = component_from_string(word)) return ObjectRef::of(*k);
    throw ParseError(Errc::kSyntax, "unknown object '" + word + "'", at);
  }

  ObjectRef selector() {
    expect('[');
    std::vector<Predicate> preds;
    do {
      skip_ws();
      std::string prop;
      if (peek() == '*') {
        ++pos_;
        prop = "*";
      } else {
        prop = identifier();
      }
      skip_ws();
      expect('=');
      skip_ws();
      preds.push_back({prop, bare_or_quoted_value()});
      skip_ws();
    } while (peek() == ',' && (++pos_, true));
    expect(']');
    return ObjectRef::selector(std::move(preds), catalog_);
  }

  // Position of the '[' matching a final ']' in [begin, end), or npos.
  std::size_t relation_open(std::size_t begin, std::size_t end) const {
    if (end <= begin || doc_[end - 1] != ']') return std::string_view::npos;
    for (std::size_t p = end - 1; p > begin; --p) {
      if (doc_[p - 1] == '[') return p - 1;
      if (doc_[p - 1] == '\'' || doc_[p - 1] == '=' || doc_[p - 1] == ',') return std::string_view::npos;
    }
    return std::string_view::npos;
  }

  // End of the current parameter value: next ',' or '}' at depth 0.
  std::size_t value_end() const {
    int depth = 0;
    bool in_quote = false;
    for (std::size_t p = pos_; p < doc_.size(); ++p) {
      char c = doc_[p];
      if (in_quote) {
        if (c == '\\') {
          ++p;
        } else if (c == '\'') {
          in_quote = false;
        }
        continue;
      }
      if (c == '\'') {
        in_quote = true;
      } else if (c == '[' || c == '(') {
        ++depth;
      } else if (c == ']' || c == ')') {
        --depth;
      } else if (depth == 0 && (c == ',' || c == '}')) {
        std::size_t e = p;
        while (e > pos_ && std::isspace(static_cast<unsigned char>(doc_[e - 1]))) --e;
        return e;
      }
    }
    return doc_.size();
  }

  ParameterValue parameter() {
    skip_ws();
    std::size_t role_at = pos_;
    auto role_name = identifier();
    const auto* role = catalog_.find_parameter_role(role_name);
    if (!role) throw ParseError(Errc::kUnknownRole, "unknown parameter role '" + role_name + "'", role_at);
    skip_ws();
    expect('=');
    skip_ws();
    std::size_t begin = pos_;
    std::size_t end = value_end();
    if (begin == end) fail("empty parameter value");

    std::size_t open = relation_open(begin, end);
    if (open != std::string_view::npos && open > begin) {
      return relational(*role, begin, open, end);
    }
    if (role->kind == ValueKind::kRelation) fail("parameter '" + role->name + "' needs anchor[relation]");
    auto raw = doc_.substr(begin, end - begin);
    ParameterValue out = exact_or_vague(*role, raw, begin);
    pos_ = end;
    return out;
  }

  ParameterValue relational(const ParameterRole& role, std::size_t begin, std::size_t open, std::size_t end) {
    std::optional<ObjectRef> anchor;
    auto anchor_text = doc_.substr(begin, open - begin);
    if (anchor_text != "self") {
      Reader sub(doc_.substr(0, open), catalog_, rules_);
      sub.pos_ = begin;
      anchor = sub.object();
      sub.skip_ws();
      if (sub.pos_ != open) throw ParseError(Errc::kSyntax, "malformed relational anchor", sub.pos_);
    }
    auto relation = std::string(doc_.substr(open + 1, end - open - 2));
    if (!role.allows_relation(relation)) {
      throw ParseError(Errc::kInvalidValue,
                       "relation '" + relation + "' not allowed for '" + role.name + "'", open + 1);
    }
    pos_ = end;
    return ParameterValue::relational(role.name, std::move(anchor), relation);
  }

  ParameterValue vague_or_fail(const ParameterRole& role, std::string_view raw, std::size_t at) {
    auto keyword = undotted(raw);
    if (!role.vague_lexicon.empty() && rules_.is_vague_keyword(role.vague_lexicon, keyword)) {
      return ParameterValue::vague(role.name, keyword);
    }
    throw ParseError(Errc::kInvalidValue,
                     "invalid value '" + std::string(raw) + "' for '" + role.name + "'", at);
  }

  ParameterValue exact_or_vague(const ParameterRole& role, std::string_view raw, std::size_t at) {
    switch (role.kind) {
      case ValueKind::kColor:
        if (auto c = Rgb::from_hex(raw)) return ParameterValue::exact_color(role.name, *c);
        return vague_or_fail(role, raw, at);
      case ValueKind::kNumber: {
        Unit unit = Unit::kNone;
        auto digits = raw;
        if (digits.size() > 2 && digits.substr(digits.size() - 2) == "px") {
          unit = Unit::kPx;
          digits.remove_suffix(2);
        } else if (!digits.empty() && digits.back() == '%') {
          unit = Unit::kPercent;
          digits.remove_suffix(1);
        } else if (!role.allows_unit(Unit::kNone) && role.allows_unit(Unit::kCount)) {
          unit = Unit::kCount;
        }
        if (auto v = parse_number(digits)) {
          if (!role.allows_unit(unit)) {
            throw ParseError(Errc::kInvalidValue,
                             std::string("unit '") + to_string(unit) + "' not allowed for '" + role.name + "'", at);
          }
          return ParameterValue::number_value(role.name, *v, unit);
        }
        return vague_or_fail(role, raw, at);
      }
      case ValueKind::kEnum: {
        std::string v(raw);
        if (!role.allows_value(v)) {
          throw ParseError(Errc::kInvalidValue, "'" + v + "' is not a " + role.name + " value", at);
        }
        return ParameterValue::enumeration(role.name, v);
      }
      case ValueKind::kText: {
        Reader sub(raw, catalog_, rules_);
        auto v = sub.bare_or_quoted_value();
        if (sub.pos_ != raw.size()) throw ParseError(Errc::kSyntax, "malformed text value", at + sub.pos_);
        return ParameterValue::text_value(role.name, v);
      }
      case ValueKind::kBool:
        if (raw == "true") return ParameterValue::boolean(role.name, true);
        if (raw == "false") return ParameterValue::boolean(role.name, false);
        throw ParseError(Errc::kInvalidValue, "expected true or false", at);
      case ValueKind::kRange: {
        if (raw.size() >= 6 && raw.front() == '(' && raw.back() == ')') {
          auto inner = raw.substr(1, raw.size() - 2);
          auto sep = inner.find("..");
          if (sep != std::string_view::npos) {
            auto lo = parse_number(inner.substr(0, sep));
            auto hi = parse_number(inner.substr(sep + 2));
            if (lo && hi) return ParameterValue::range(role.name, *lo, *hi);
          }
          throw ParseError(Errc::kSyntax, "malformed range", at);
        }
        return vague_or_fail(role, raw, at);
      }
      case ValueKind::kRelation:
        break;
    }
    throw ParseError(Errc::kInvalidValue, "unsupported value", at);
  }

  std::string_view doc_;
  const Catalog& catalog_;
  const RuleTable& rules_;
  std::size_t pos_ = 0;
};

}  // namespace

const char* to_string(ComponentKind k) {
  for (const auto& c : kComponents) {
    if (c.kind == k) return c.name;
  }
  return "?";
}

std::optional<ComponentKind> component_from_string(std::string_view s) {
  if (s == "plotArea") return ComponentKind::kPlotArea;
  for (const auto& c : kComponents) {
    if (s == c.name) return c.kind;
  }
  return std::nullopt;
}

ObjectRef ObjectRef::pronoun() {
  ObjectRef r;
  r.kind = Kind::kPronoun;
  return r;
}

ObjectRef ObjectRef::named(std::string name) {
  ObjectRef r;
  r.kind = Kind::kNamed;
  r.name = std::move(name);
  return r;
}

ObjectRef ObjectRef::of(ComponentKind kind) {
  ObjectRef r;
  r.kind = Kind::kComponent;
  r.component = kind;
  return r;
}

ObjectRef ObjectRef::field(std::string column) {
  ObjectRef r;
  r.kind = Kind::kField;
  r.name = std::move(column);
  return r;
}

ObjectRef ObjectRef::selector(std::vector<Predicate> predicates, const Catalog& catalog) {
  if (predicates.empty()) throw Error(Errc::kInvalidValue, "selector needs at least one predicate");
  for (auto& p : predicates) {
    if (p.property != "*" && !catalog.is_selector_property(p.property)) p.property = "*";
  }
  ObjectRef r;
  r.kind = Kind::kSelector;
  r.predicates = std::move(predicates);
  return r;
}

std::optional<std::string> ObjectRef::predicate(std::string_view property) const {
  for (const auto& p : predicates) {
    if (p.property == property) return p.value;
  }
  return std::nullopt;
}

ParameterValue ParameterValue::number_value(std::string role, double v, Unit unit) {
  ParameterValue p;
  p.role = std::move(role);
  p.kind = ValueKind::kNumber;
  p.number = v;
  p.unit = unit;
  return p;
}

ParameterValue ParameterValue::enumeration(std::string role, std::string v) {
  ParameterValue p;
  p.role = std::move(role);
  p.kind = ValueKind::kEnum;
  p.text = std::move(v);
  return p;
}

ParameterValue ParameterValue::text_value(std::string role, std::string v) {
  ParameterValue p;
  p.role = std::move(role);
  p.kind = ValueKind::kText;
  p.text = std::move(v);
  return p;
}

ParameterValue ParameterValue::boolean(std::string role, bool v) {
  ParameterValue p;
  p.role = std::move(role);
  p.kind = ValueKind::kBool;
  p.flag = v;
  return p;
}

ParameterValue ParameterValue::exact_color(std::string role, Rgb c) {
  ParameterValue p;
  p.role = std::move(role);
  p.kind = ValueKind::kColor;
  p.color = c;
  return p;
}

ParameterValue ParameterValue::range(std::string role, double lo, double hi) {
  ParameterValue p;
  p.role = std::move(role);
  p.kind = ValueKind::kRange;
  p.lo = lo;
  p.hi = hi;
  return p;
}

ParameterValue ParameterValue::vague(std::string role, std::string keyword) {
  ParameterValue p;
  p.form = Form::kVague;
  p.role = std::move(role);
  p.kind = ValueKind::kText;
  p.keyword = std::move(keyword);
  return p;
}

ParameterValue ParameterValue::relational(std::string role, std::optional<ObjectRef> anchor,
                                          std::string relation) {
  ParameterValue p;
  p.form = Form::kRelational;
  p.role = std::move(role);
  p.kind = ValueKind::kRelation;
  p.anchor = std::move(anchor);
  p.relation = std::move(relation);
  return p;
}

const ParameterValue* EditingAction::parameter(std::string_view role) const {
  for (const auto& p : parameters) {
    if (p.role == role) return &p;
  }
  return nullptr;
}

bool EditingAction::operator==(const EditingAction& o) const {
  auto normalized = [](const std::vector<ObjectRef>& objs) {
    return objs.empty() ? std::vector<ObjectRef>{ObjectRef::star()} : objs;
  };
  return operation == o.operation && normalized(objects) == normalized(o.objects) &&
         parameters == o.parameters;
}

void validate(const EditingAction& action, const Catalog& catalog, const RuleTable& rules) {
  if (!action.is_orphan() && !catalog.find_operation(action.operation)) {
    throw Error(Errc::kUnknownOperation, "unknown operation '" + action.operation + "'");
  }
  for (const auto& o : action.objects) {
    if (o.kind == ObjectRef::Kind::kSelector && o.predicates.empty()) {
      throw Error(Errc::kInvalidValue, "empty selector");
    }
  }
  for (const auto& p : action.parameters) {
    const auto* role = catalog.find_parameter_role(p.role);
    if (!role) throw Error(Errc::kUnknownRole, "unknown parameter role '" + p.role + "'");
    switch (p.form) {
      case ParameterValue::Form::kVague:
        if (!rules.is_vague_keyword(role->vague_lexicon, p.keyword)) {
          throw Error(Errc::kInvalidValue, "unknown vague keyword '" + p.keyword + "' for '" + p.role + "'");
        }
        break;
      case ParameterValue::Form::kRelational:
        if (!role->allows_relation(p.relation)) {
          throw Error(Errc::kInvalidValue, "relation '" + p.relation + "' not allowed for '" + p.role + "'");
        }
        break;
      case ParameterValue::Form::kExact:
        if (p.kind != role->kind) throw Error(Errc::kInvalidValue, "wrong value kind for '" + p.role + "'");
        if (p.kind == ValueKind::kNumber && !role->allows_unit(p.unit)) {
          throw Error(Errc::kInvalidValue, "unit not allowed for '" + p.role + "'");
        }
        if (p.kind == ValueKind::kEnum && !role->allows_value(p.text)) {
          throw Error(Errc::kInvalidValue, "'" + p.text + "' is not a " + p.role + " value");
        }
        break;
    }
  }
}

std::string serialize_object(const ObjectRef& ref) {
  switch (ref.kind) {
    case ObjectRef::Kind::kStar: return "*";
    case ObjectRef::Kind::kPronoun: return "it";
    case ObjectRef::Kind::kNamed: return "name(" + quote(ref.name) + ")";
    case ObjectRef::Kind::kField: return "field(" + quote(ref.name) + ")";
    case ObjectRef::Kind::kComponent: return to_string(ref.component);
    case ObjectRef::Kind::kSelector: {
      std::string out = "[";
      for (std::size_t i = 0; i < ref.predicates.size(); ++i) {
        const auto& p = ref.predicates[i];
        if (i) out += ", ";
        out += p.property + "=";
        out += always_quoted(p.property) ? quote(p.value) : bare_or_quoted(p.value);
      }
      return out + "]";
    }
  }
  return "*";
}

std::string serialize_parameter(const ParameterValue& p) {
  std::string out = p.role + "=";
  switch (p.form) {
    case ParameterValue::Form::kVague: return out + dotted(p.keyword);
    case ParameterValue::Form::kRelational:
      return out + (p.anchor ? serialize_object(*p.anchor) : "self") + "[" + p.relation + "]";
    case ParameterValue::Form::kExact: break;
  }
  switch (p.kind) {
    case ValueKind::kNumber: return out + format_number(p.number) + unit_suffix(p.unit);
    case ValueKind::kColor: return out + p.color.hex();
    case ValueKind::kEnum: return out + p.text;
    case ValueKind::kText: return out + bare_or_quoted(p.text);
    case ValueKind::kBool: return out + (p.flag ? "true" : "false");
    case ValueKind::kRange: return out + "(" + format_number(p.lo) + ".." + format_number(p.hi) + ")";
    case ValueKind::kRelation: break;
  }
  return out;
}

std::string serialize_action(const EditingAction& action) {
  std::string out = "{" + action.operation + ", ";
  if (action.objects.empty()) {
    out += "*";
  } else {
    for (std::size_t i = 0; i < action.objects.size(); ++i) {
      if (i) out += " + ";
      out += serialize_object(action.objects[i]);
    }
  }
  out += ", ";
  if (action.parameters.empty()) {
    out += "*";
  } else {
    for (std::size_t i = 0; i < action.parameters.size(); ++i) {
      if (i) out += ", ";
      out += serialize_parameter(action.parameters[i]);
    }
  }
  return out + "}";
}

std::string serialize_actions(const std::vector<EditingAction>& actions) {
  std::string out;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i) out += "\n";
    out += serialize_action(actions[i]);
  }
  return out;
}

EditingAction parse_action(std::string_view doc, const Catalog& catalog, const RuleTable& rules) {
  auto action = Reader(doc, catalog, rules).action();
  if (action.objects.empty()) action.objects.push_back(ObjectRef::star());
  return action;
}

}  // namespace nlchart
