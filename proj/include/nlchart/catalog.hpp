#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace nlchart {

enum class Category { kData, kEncoding, kMark, kStyling, kLayout, kAnnotate };

const char* to_string(Category c);
std::optional<Category> category_from_string(std::string_view s);
/// Execution rank: global operations first.
int category_rank(Category c);

enum class Unit { kNone, kPx, kPercent, kCount };

const char* to_string(Unit u);

/// How the value of a parameter role is typed.
enum class ValueKind { kNumber, kColor, kText, kEnum, kBool, kRange, kRelation };

struct ParameterRole {
  std::string name;
  ValueKind kind = ValueKind::kText;
  std::vector<Unit> units;             // kNumber only
  std::string vague_lexicon;           // "color", "extent", "range" or empty
  std::vector<std::string> relations;  // allowed relational keywords
  std::vector<std::string> values;     // kEnum only

  bool allows_unit(Unit u) const;
  bool allows_relation(std::string_view r) const;
  bool allows_value(std::string_view v) const;
};

/// Kind of a BIO entity role: what a labeled chunk contributes to an action.
enum class EntityKind { kObject, kParameter, kModifier, kAnchor };

enum class ParameterForm { kExact, kVague, kRelational };

struct EntityRole {
  std::string name;
  EntityKind kind = EntityKind::kObject;
  std::string object_kind;  // component | shape | value | field | name
  std::string property;     // selector property for modifiers
  std::string parameter;    // ParameterRole name for parameters
  ParameterForm form = ParameterForm::kExact;
};

struct OperationKind {
  std::string name;
  Category category = Category::kData;
  std::vector<std::string> accepts;  // entity role names
  std::string implied_object;        // component keyword or empty

  bool accepts_role(std::string_view role) const;
};

/// Ordered surface-phrase -> canonical-form table for one word class.
class WordClass {
 public:
  void add(std::string surface, std::string canonical);

  /// Canonical form of a normalized phrase, if listed.
  std::optional<std::string> lookup(std::string_view normalized) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::size_t longest_tokens() const { return longest_tokens_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::map<std::string, std::string, std::less<>> index_;
  std::size_t longest_tokens_ = 0;
};

/// The editing-action grammar: operations, roles and vocabulary. Loaded from
/// a versioned JSON document so the operation set can grow without code
/// changes.
class Catalog {
 public:
  static Catalog from_json(const nlohmann::json& doc);
  static Catalog load(const std::string& path);
  /// The catalog shipped in data/catalog.json, compiled in.
  static const Catalog& builtin();

  const std::string& version() const { return version_; }

  const OperationKind* find_operation(std::string_view name) const;
  const ParameterRole* find_parameter_role(std::string_view name) const;
  const EntityRole* find_entity_role(std::string_view name) const;
  const WordClass& words(std::string_view word_class) const;
  bool is_selector_property(std::string_view name) const;

  const std::vector<OperationKind>& operations() const { return operations_; }
  const std::vector<ParameterRole>& parameter_roles() const { return parameter_roles_; }
  const std::vector<EntityRole>& entity_roles() const { return entity_roles_; }
  const std::map<std::string, WordClass, std::less<>>& vocabulary() const { return vocabulary_; }

  std::set<std::string> expected_object_roles(const OperationKind& op) const;
  std::set<std::string> expected_parameter_roles(const OperationKind& op) const;

 private:
  std::string version_;
  std::vector<OperationKind> operations_;
  std::vector<ParameterRole> parameter_roles_;
  std::vector<EntityRole> entity_roles_;
  std::set<std::string, std::less<>> selector_properties_;
  std::map<std::string, WordClass, std::less<>> vocabulary_;
};

}  // namespace nlchart
