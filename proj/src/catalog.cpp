#include "nlchart/catalog.hpp"

#include <algorithm>
#include <fstream>

#include "embedded.hpp"
#include "nlchart/error.hpp"
#include "nlchart/text.hpp"

namespace nlchart {

namespace {

const WordClass kEmptyClass;

Unit unit_from_string(const std::string& s) {
  if (s == "px") return Unit::kPx;
  if (s == "percent") return Unit::kPercent;
  if (s == "count") return Unit::kCount;
  if (s == "none") return Unit::kNone;
  throw Error(Errc::kInvalidValue, "unknown unit '" + s + "'");
}

ValueKind value_kind_from_string(const std::string& s) {
  if (s == "number") return ValueKind::kNumber;
  if (s == "color") return ValueKind::kColor;
  if (s == "text") return ValueKind::kText;
  if (s == "enum") return ValueKind::kEnum;
  if (s == "bool") return ValueKind::kBool;
  if (s == "range") return ValueKind::kRange;
  if (s == "relation") return ValueKind::kRelation;
  throw Error(Errc::kInvalidValue, "unknown value kind '" + s + "'");
}

EntityKind entity_kind_from_string(const std::string& s) {
  if (s == "object") return EntityKind::kObject;
  if (s == "parameter") return EntityKind::kParameter;
  if (s == "modifier") return EntityKind::kModifier;
  if (s == "anchor") return EntityKind::kAnchor;
  throw Error(Errc::kInvalidValue, "unknown entity kind '" + s + "'");
}

ParameterForm form_from_string(const std::string& s) {
  if (s == "exact") return ParameterForm::kExact;
  if (s == "vague") return ParameterForm::kVague;
  if (s == "relational") return ParameterForm::kRelational;
  throw Error(Errc::kInvalidValue, "unknown parameter form '" + s + "'");
}

std::vector<std::string> strings(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return {};
  return j.at(key).get<std::vector<std::string>>();
}

}  // namespace

const char* to_string(Category c) {
  switch (c) {
    case Category::kData: return "Data";
    case Category::kEncoding: return "Encoding";
    case Category::kMark: return "Mark";
    case Category::kStyling: return "Styling";
    case Category::kLayout: return "Layout";
    case Category::kAnnotate: return "Annotate";
  }
  return "?";
}

std::optional<Category> category_from_string(std::string_view s) {
  for (auto c : {Category::kData, Category::kEncoding, Category::kMark, Category::kStyling,
                 Category::kLayout, Category::kAnnotate}) {
    if (s == to_string(c)) return c;
  }
  return std::nullopt;
}

int category_rank(Category c) { return static_cast<int>(c); }

const char* to_string(Unit u) {
  switch (u) {
    case Unit::kNone: return "none";
    case Unit::kPx: return "px";
    case Unit::kPercent: return "percent";
    case Unit::kCount: return "count";
  }
  return "?";
}

bool ParameterRole::allows_unit(Unit u) const {
  return std::find(units.begin(), units.end(), u) != units.end();
}

bool ParameterRole::allows_relation(std::string_view r) const {
  return std::find(relations.begin(), relations.end(), r) != relations.end();
}

bool ParameterRole::allows_value(std::string_view v) const {
  return std::find(values.begin(), values.end(), v) != values.end();
}

bool OperationKind::accepts_role(std::string_view role) const {
  return std::find(accepts.begin(), accepts.end(), role) != accepts.end();
}

void WordClass::add(std::string surface, std::string canonical) {
  auto key = normalize_phrase(surface);
  longest_tokens_ = std::max(longest_tokens_, token_texts(key).size());
  index_.emplace(key, canonical);  // first listing wins
  entries_.emplace_back(std::move(key), std::move(canonical));
}

std::optional<std::string> WordClass::lookup(std::string_view normalized) const {
  auto it = index_.find(normalized);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Catalog Catalog::from_json(const nlohmann::json& doc) {
  if (doc.value("schema", "") != "nlchart-catalog") {
    throw Error(Errc::kInvalidValue, "not a catalog document");
  }
  Catalog cat;
  cat.version_ = doc.at("version").get<std::string>();

  for (const auto& j : doc.at("parameter_roles")) {
    ParameterRole r;
    r.name = j.at("name").get<std::string>();
    r.kind = value_kind_from_string(j.at("kind").get<std::string>());
    for (const auto& u : strings(j, "units")) r.units.push_back(unit_from_string(u));
    r.vague_lexicon = j.value("vague", "");
    r.relations = strings(j, "relations");
    r.values = strings(j, "values");
    if (cat.find_parameter_role(r.name)) {
      throw Error(Errc::kInvalidValue, "duplicate parameter role '" + r.name + "'");
    }
    cat.parameter_roles_.push_back(std::move(r));
  }

  for (const auto& p : strings(doc, "selector_properties")) cat.selector_properties_.insert(p);

  for (const auto& j : doc.at("entity_roles")) {
    EntityRole r;
    r.name = j.at("name").get<std::string>();
    r.kind = entity_kind_from_string(j.at("kind").get<std::string>());
    r.object_kind = j.value("object", "");
    r.property = j.value("property", "");
    r.parameter = j.value("param", "");
    r.form = form_from_string(j.value("form", "exact"));
    if (r.kind == EntityKind::kParameter && !cat.find_parameter_role(r.parameter)) {
      throw Error(Errc::kUnknownRole,
                  "entity role '" + r.name + "' names unknown parameter '" + r.parameter + "'");
    }
    if (cat.find_entity_role(r.name)) {
      throw Error(Errc::kInvalidValue, "duplicate entity role '" + r.name + "'");
    }
    cat.entity_roles_.push_back(std::move(r));
  }

  for (const auto& j : doc.at("operations")) {
    OperationKind op;
    op.name = j.at("name").get<std::string>();
    auto category = category_from_string(j.at("category").get<std::string>());
    if (!category) throw Error(Errc::kInvalidValue, "operation '" + op.name + "' has bad category");
    op.category = *category;
    op.accepts = strings(j, "accepts");
    op.implied_object = j.value("implied_object", "");
    for (const auto& role : op.accepts) {
      if (!cat.find_entity_role(role)) {
        throw Error(Errc::kUnknownRole,
                    "operation '" + op.name + "' accepts unknown role '" + role + "'");
      }
    }
    if (op.name == "*" || cat.find_operation(op.name)) {
      throw Error(Errc::kInvalidValue, "duplicate operation '" + op.name + "'");
    }
    cat.operations_.push_back(std::move(op));
  }

  if (doc.contains("vocabulary")) {
    for (const auto& [cls, entries] : doc.at("vocabulary").items()) {
      WordClass wc;
      for (const auto& e : entries) wc.add(e.at(0).get<std::string>(), e.at(1).get<std::string>());
      cat.vocabulary_.emplace(cls, std::move(wc));
    }
  }
  return cat;
}

Catalog Catalog::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot open catalog '" + path + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kSyntax, "catalog '" + path + "': " + e.what());
  }
}

const Catalog& Catalog::builtin() {
  static const Catalog instance = from_json(nlohmann::json::parse(embedded::kCatalog));
  return instance;
}

const OperationKind* Catalog::find_operation(std::string_view name) const {
  for (const auto& op : operations_) {
    if (op.name == name) return &op;
  }
  return nullptr;
}

const ParameterRole* Catalog::find_parameter_role(std::string_view name) const {
  for (const auto& r : parameter_roles_) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

const EntityRole* Catalog::find_entity_role(std::string_view name) const {
  for (const auto& r : entity_roles_) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

const WordClass& Catalog::words(std::string_view word_class) const {
  auto it = vocabulary_.find(word_class);
  return it == vocabulary_.end() ? kEmptyClass : it->second;
}

bool Catalog::is_selector_property(std::string_view name) const {
  return selector_properties_.find(name) != selector_properties_.end();
}

std::set<std::string> Catalog::expected_object_roles(const OperationKind& op) const {
  std::set<std::string> out;
  for (const auto& name : op.accepts) {
    const auto* r = find_entity_role(name);
    if (r && r->kind == EntityKind::kObject) out.insert(name);
  }
  return out;
}

std::set<std::string> Catalog::expected_parameter_roles(const OperationKind& op) const {
  std::set<std::string> out;
  for (const auto& name : op.accepts) {
    const auto* r = find_entity_role(name);
    if (r && r->kind == EntityKind::kParameter) out.insert(r->parameter);
  }
  return out;
}

}  // namespace nlchart
