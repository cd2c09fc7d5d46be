#include "nlchart/synthesizer.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace nlchart {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// Token gap between two spans; 0 when adjacent or overlapping.
std::size_t gap(TokenSpan a, TokenSpan b) {
  if (a.end <= b.begin) return b.begin - a.end;
  if (b.end <= a.begin) return a.begin - b.end;
  return 0;
}

TokenSpan hull(TokenSpan a, TokenSpan b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return {std::min(a.begin, b.begin), std::max(a.end, b.end)};
}

bool mixes_letters_and_digits(std::string_view w) {
  bool alpha = false, digit = false;
  for (char c : w) {
    auto u = static_cast<unsigned char>(c);
    alpha = alpha || std::isalpha(u);
    digit = digit || std::isdigit(u);
  }
  return alpha && digit;
}

struct Typed {
  const EntityRole* role = nullptr;
  std::optional<ObjectRef> object;
  std::optional<Predicate> modifier;
  std::optional<ParameterValue> param;
  std::optional<ObjectRef> anchor;

  bool ok() const { return object || modifier || param || anchor; }
};

struct Instance {
  std::string intent;
  TokenSpan trigger;
  const OperationKind* op = nullptr;
  TokenSpan window;
  std::vector<std::size_t> objects;
  std::vector<std::size_t> params;
  std::vector<std::size_t> actions;  // produced action indices
};

class Synth {
 public:
  Synth(const TaggedUtterance& t, const Catalog& c, const RuleTable& r)
      : t_(t), a_(t.abstracted), catalog_(c), rules_(r), lx_(r.tagger) {}

  ActionSequence run() {
    out_.candidates = extract_candidates(t_);
    const auto n = out_.candidates.size();
    typed_.resize(n);
    for (std::size_t i = 0; i < n; ++i) typed_[i] = type(out_.candidates[i]);
    disp_.assign(n, std::nullopt);
    anchor_of_.assign(n, kNone);
    mods_of_.assign(n, {});

    attach_anchors();
    fold_modifiers();
    match_instances();
    place_residuals();
    rank();
    return std::move(out_);
  }

 private:
  // ---- surface access -------------------------------------------------

  std::string surface(TokenSpan span) const {
    auto o = a_.original_span(span);
    std::vector<std::string> words;
    for (auto i = o.begin; i < o.end && i < a_.tokens.size(); ++i) words.push_back(a_.tokens[i].text);
    return join(words, " ");
  }

  std::string lowered(TokenSpan span) const { return normalize_phrase(surface(span)); }

  std::vector<double> numbers_in(TokenSpan span) const {
    std::vector<double> out;
    for (auto p = span.begin; p < span.end; ++p) {
      const auto* b = a_.binding_at(p);
      if (!b || (b->placeholder != "<integer>" && b->placeholder != "<float>" && b->placeholder != "<year>")) continue;
      if (auto v = parse_number(b->canonical)) out.push_back(*v);
    }
    return out;
  }

  std::optional<Unit> unit_in(TokenSpan span) const {
    const auto& units = catalog_.words("unit");
    for (auto p = span.begin; p < span.end; ++p) {
      if (a_.binding_at(p)) continue;
      if (auto u = units.lookup(to_lower(a_.abstracted_tokens[p]))) {
        if (*u == "px") return Unit::kPx;
        if (*u == "percent") return Unit::kPercent;
      }
    }
    return std::nullopt;
  }

  // ---- typing -----------------------------------------------------------

  std::optional<std::string> extent_keyword(const std::string& phrase) const {
    auto words = token_texts(phrase);
    if (words.empty()) return std::nullopt;
    auto base = catalog_.words("extentBase").lookup(words.back());
    if (!base) return std::nullopt;
    if (words.size() == 1) return *base;
    words.pop_back();
    auto adverb = catalog_.words("extentAdverb").lookup(join(words, " "));
    if (!adverb) return std::nullopt;
    auto kw = *adverb + " " + *base;
    if (!rules_.is_extent_keyword(kw)) return std::nullopt;
    return kw;
  }

  std::optional<ObjectRef> object_of(const EntityRole& role, const EntityCandidate& c) const {
    const auto& kind = role.object_kind;
    if (kind == "component") {
      auto canon = catalog_.words("component").lookup(lowered(c.span));
      if (!canon) return std::nullopt;
      auto comp = component_from_string(*canon);
      if (!comp) return std::nullopt;
      return ObjectRef::of(*comp);
    }
    if (kind == "shape") {
      auto canon = catalog_.words("shape").lookup(lowered(c.span));
      if (!canon) return std::nullopt;
      return ObjectRef::selector({{"shape", *canon}}, catalog_);
    }
    if (kind == "value") return ObjectRef::selector({{"value", unquote(c.value)}}, catalog_);
    if (kind == "field") return ObjectRef::field(unquote(c.value));
    if (kind == "name") return ObjectRef::named(unquote(c.value));
    return std::nullopt;
  }

  std::optional<Predicate> modifier_of(const EntityRole& role, const EntityCandidate& c) const {
    if (role.property == "color") {
      auto kw = lowered(c.span);
      if (!rules_.color(kw)) return std::nullopt;
      return Predicate{"color", kw};
    }
    if (role.property == "shape") {
      auto canon = catalog_.words("shape").lookup(lowered(c.span));
      if (!canon) return std::nullopt;
      return Predicate{"shape", *canon};
    }
    return Predicate{role.property, unquote(c.value)};
  }

  std::optional<ParameterValue> number_param(const ParameterRole& pr, const EntityCandidate& c) const {
    auto nums = numbers_in(c.span);
    std::optional<double> v;
    if (!nums.empty()) v = nums.front();
    if (!v) {
      if (auto phrase = catalog_.words("countPhrase").lookup(lowered(c.span))) v = parse_number(*phrase);
    }
    if (!v || pr.units.empty()) return std::nullopt;
    Unit unit = Unit::kNone;
    if (pr.allows_unit(Unit::kCount) && pr.units.size() == 1) {
      unit = Unit::kCount;
    } else if (auto u = unit_in(c.span)) {
      unit = *u;
    }
    if (!pr.allows_unit(unit)) unit = pr.units.front();
    return ParameterValue::number_value(pr.name, *v, unit);
  }

  std::optional<std::string> enum_value(const ParameterRole& pr, const std::string& phrase) const {
    static const std::map<std::string, std::vector<std::string>, std::less<>> kClasses = {
        {"chartType", {"chartType", "shape"}}, {"order", {"order"}},
        {"aggregate", {"aggregate"}},          {"timeUnit", {"timeUnit"}},
        {"fontStyle", {"fontStyle"}},          {"direction", {"direction", "position"}},
        {"shape", {"markShape"}},
    };
    auto it = kClasses.find(pr.name);
    if (it != kClasses.end()) {
      for (const auto& cls : it->second) {
        if (auto canon = catalog_.words(cls).lookup(phrase); canon && pr.allows_value(*canon)) return canon;
      }
    }
    if (pr.allows_value(phrase)) return phrase;
    return std::nullopt;
  }

  std::optional<ParameterValue> param_of(const EntityRole& role, const EntityCandidate& c) const {
    const auto* pr = catalog_.find_parameter_role(role.parameter);
    if (!pr) return std::nullopt;
    const auto phrase = lowered(c.span);
    if (pr->kind == ValueKind::kRange) {
      auto nums = numbers_in(c.span);
      if (nums.size() >= 2) {
        return ParameterValue::range(pr->name, std::min(nums[0], nums[1]), std::max(nums[0], nums[1]));
      }
      auto canon = catalog_.words("range").lookup(phrase);
      if (canon && rules_.is_vague_keyword("range", *canon)) return ParameterValue::vague(pr->name, *canon);
      return std::nullopt;
    }
    switch (role.form) {
      case ParameterForm::kVague:
        if (pr->vague_lexicon == "color") {
          if (!rules_.color(phrase)) return std::nullopt;
          return ParameterValue::vague(pr->name, phrase);
        }
        if (pr->vague_lexicon == "extent") {
          auto kw = extent_keyword(phrase);
          if (!kw) return std::nullopt;
          return ParameterValue::vague(pr->name, *kw);
        }
        return std::nullopt;
      case ParameterForm::kRelational: {
        std::optional<std::string> relation;
        if (pr->name == "position") {
          relation = catalog_.words("position").lookup(phrase);
        } else if (auto canon = catalog_.words("relational").lookup(phrase)) {
          relation = canon->substr(canon->find(':') + 1);
        }
        if (!relation || !pr->allows_relation(*relation)) return std::nullopt;
        return ParameterValue::relational(pr->name, std::nullopt, *relation);
      }
      case ParameterForm::kExact: break;
    }
    switch (pr->kind) {
      case ValueKind::kNumber: return number_param(*pr, c);
      case ValueKind::kText: {
        if (pr->name == "icon") {
          auto canon = catalog_.words("icon").lookup(phrase);
          return canon ? std::optional(ParameterValue::text_value(pr->name, *canon)) : std::nullopt;
        }
        auto text = unquote(c.value);
        if (text.empty()) return std::nullopt;
        return ParameterValue::text_value(pr->name, text);
      }
      case ValueKind::kEnum: {
        auto v = enum_value(*pr, phrase);
        return v ? std::optional(ParameterValue::enumeration(pr->name, *v)) : std::nullopt;
      }
      case ValueKind::kBool: {
        auto canon = catalog_.words("visibility").lookup(phrase);
        if (!canon) canon = phrase;
        if (*canon == "true" || *canon == "false") return ParameterValue::boolean(pr->name, *canon == "true");
        return std::nullopt;
      }
      case ValueKind::kColor: {
        auto c2 = Rgb::from_hex(unquote(c.value));
        return c2 ? std::optional(ParameterValue::exact_color(pr->name, *c2)) : std::nullopt;
      }
      case ValueKind::kRange:
      case ValueKind::kRelation: break;
    }
    return std::nullopt;
  }

  // Reads an anchor chunk ("the Ford bar", "plot area") as an object: the
  // first head-like token is the head, the rest become predicates in order.
  std::optional<ObjectRef> anchor_of(TokenSpan span) const {
    std::vector<Predicate> preds;
    std::optional<ComponentKind> lone_component;
    std::size_t heads = 0;
    std::size_t head_at = kNone;
    const auto& components = catalog_.words("component");
    const auto& shapes = catalog_.words("shape");
    for (auto p = span.begin; p < span.end;) {
      const auto& tok = a_.abstracted_tokens[p];
      auto low = to_lower(tok);
      if (const auto* b = a_.binding_at(p)) {
        bool head = b->placeholder != "<table>";
        preds.push_back({b->placeholder == "<column>" ? "field" : "value", b->canonical});
        if (head && head_at == kNone) head_at = preds.size() - 1;
        heads += head;
        ++p;
        continue;
      }
      if (lx_.is_determiner(low) || low == "of") {
        ++p;
        continue;
      }
      std::size_t matched = 0;
      for (std::size_t n = std::min<std::size_t>(3, span.end - p); n >= 1 && !matched; --n) {
        auto phrase = lowered({p, p + n});
        if (auto comp = components.lookup(phrase)) {
          preds.push_back({"kind", *comp});
          if (head_at == kNone) head_at = preds.size() - 1;
          ++heads;
          lone_component = component_from_string(*comp);
          matched = n;
        } else if (auto shape = shapes.lookup(phrase)) {
          preds.push_back({"shape", *shape});
          if (head_at == kNone) head_at = preds.size() - 1;
          ++heads;
          matched = n;
        } else if (rules_.color(phrase)) {
          preds.push_back({"color", phrase});
          matched = n;
        }
      }
      if (!matched) {
        if (mixes_letters_and_digits(tok)) {
          preds.push_back({"name", unquote(tok)});
          if (head_at == kNone) head_at = preds.size() - 1;
          ++heads;
        } else {
          preds.push_back({"*", unquote(tok)});
        }
        matched = 1;
      }
      p += matched;
    }
    if (preds.empty()) return std::nullopt;
    if (preds.size() == 1 && lone_component) return ObjectRef::of(*lone_component);
    if (head_at != kNone && head_at != 0) std::rotate(preds.begin(), preds.begin() + static_cast<std::ptrdiff_t>(head_at), preds.begin() + static_cast<std::ptrdiff_t>(head_at) + 1);
    return ObjectRef::selector(std::move(preds), catalog_);
  }

  Typed type(const EntityCandidate& c) const {
    Typed out;
    out.role = catalog_.find_entity_role(c.role);
    if (!out.role) return out;
    switch (out.role->kind) {
      case EntityKind::kObject: out.object = object_of(*out.role, c); break;
      case EntityKind::kModifier: out.modifier = modifier_of(*out.role, c); break;
      case EntityKind::kParameter: out.param = param_of(*out.role, c); break;
      case EntityKind::kAnchor: out.anchor = anchor_of(c.span); break;
    }
    return out;
  }

  // ---- pre-passes -------------------------------------------------------

  TokenSpan span(std::size_t i) const { return out_.candidates[i].span; }

  bool is_position(std::size_t i) const { return typed_[i].param && typed_[i].param->role == "position"; }

  void attach_anchors() {
    for (std::size_t i = 0; i < typed_.size(); ++i) {
      if (!typed_[i].anchor) continue;
      std::size_t best = kNone;
      for (std::size_t j = 0; j < typed_.size(); ++j) {
        if (!is_position(j) || anchor_of_[j] != kNone || span(j).begin > span(i).begin) continue;
        if (best == kNone || gap(span(j), span(i)) < gap(span(best), span(i))) best = j;
      }
      if (best == kNone) continue;
      anchor_of_[best] = i;
      disp_[i] = Disposition{Disposition::Kind::kAnchor, std::nullopt, best};
    }
  }

  bool between_is_coordination(TokenSpan left, TokenSpan right) const {
    bool coordinator = false;
    for (auto p = left.end; p < right.begin; ++p) {
      const auto low = to_lower(a_.abstracted_tokens[p]);
      if (lx_.is_coordinator(low)) {
        coordinator = true;
      } else if (!lx_.is_determiner(low)) {
        return false;
      }
    }
    return coordinator;
  }

  std::vector<std::size_t> heads() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < typed_.size(); ++i) {
      if (typed_[i].object) out.push_back(i);
    }
    return out;
  }

  // The head plus same-kind heads chained to it by coordinators.
  std::vector<std::size_t> coordinated_group(std::size_t head) const {
    auto hs = heads();
    auto at = static_cast<std::size_t>(std::find(hs.begin(), hs.end(), head) - hs.begin());
    const auto& kind = typed_[head].role->object_kind;
    std::size_t lo = at, hi = at;
    while (lo > 0 && typed_[hs[lo - 1]].role->object_kind == kind &&
           between_is_coordination(span(hs[lo - 1]), span(hs[lo]))) {
      --lo;
    }
    while (hi + 1 < hs.size() && typed_[hs[hi + 1]].role->object_kind == kind &&
           between_is_coordination(span(hs[hi]), span(hs[hi + 1]))) {
      ++hi;
    }
    return {hs.begin() + static_cast<std::ptrdiff_t>(lo), hs.begin() + static_cast<std::ptrdiff_t>(hi) + 1};
  }

  void fold_modifiers() {
    auto hs = heads();
    for (std::size_t i = 0; i < typed_.size(); ++i) {
      if (!typed_[i].modifier || hs.empty()) continue;
      std::size_t best = kNone;
      for (auto h : hs) {
        if (best == kNone || gap(span(h), span(i)) < gap(span(best), span(i))) best = h;
      }
      for (auto g : coordinated_group(best)) mods_of_[g].push_back(i);
      disp_[i] = Disposition{Disposition::Kind::kModifier, std::nullopt, best};
    }
  }

  // ---- building ---------------------------------------------------------

  ObjectRef build_object(std::size_t head) const {
    const auto& base = *typed_[head].object;
    if (mods_of_[head].empty()) return base;
    std::vector<Predicate> preds;
    switch (base.kind) {
      case ObjectRef::Kind::kSelector: preds = base.predicates; break;
      case ObjectRef::Kind::kComponent: preds.push_back({"kind", to_string(base.component)}); break;
      case ObjectRef::Kind::kNamed: preds.push_back({"name", base.name}); break;
      case ObjectRef::Kind::kField: preds.push_back({"field", base.name}); break;
      case ObjectRef::Kind::kStar:
      case ObjectRef::Kind::kPronoun: break;
    }
    auto mods = mods_of_[head];
    std::sort(mods.begin(), mods.end());
    for (auto m : mods) preds.push_back(*typed_[m].modifier);
    return ObjectRef::selector(std::move(preds), catalog_);
  }

  ParameterValue build_param(std::size_t i) const {
    auto p = *typed_[i].param;
    if (p.role == "position") {
      p.anchor = anchor_of_[i] != kNone ? *typed_[anchor_of_[i]].anchor : ObjectRef::of(ComponentKind::kPlotArea);
    }
    return p;
  }

  std::size_t emit(EditingAction action, ActionTrace trace) {
    out_.actions.push_back(std::move(action));
    out_.trace.push_back(std::move(trace));
    return out_.actions.size() - 1;
  }

  void fill_defaults(EditingAction& action, ActionTrace& trace, const OperationKind* op) const {
    if (action.objects.empty()) {
      if (op && !op->implied_object.empty()) {
        if (auto comp = component_from_string(op->implied_object)) {
          action.objects.push_back(ObjectRef::of(*comp));
          trace.defaults.push_back("objects=" + op->implied_object);
        }
      } else {
        trace.defaults.push_back("objects=*");
      }
    }
    if (action.parameters.empty()) trace.defaults.push_back("parameters=*");
  }

  // ---- intent matching ----------------------------------------------------

  std::vector<Instance> instances() const {
    std::vector<Instance> out;
    for (const auto& intent : t_.intents.intents) {
      const auto* op = catalog_.find_operation(intent.name);
      if (!op) continue;
      auto triggers = intent.triggers;
      if (triggers.empty()) triggers.push_back({0, 0});
      for (auto trig : triggers) out.push_back({intent.name, trig, op, {}, {}, {}, {}});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Instance& x, const Instance& y) { return x.trigger.begin < y.trigger.begin; });
    // Instances sharing a trigger share a window; windows split at the last
    // coordinator between consecutive triggers.
    const std::size_t n = a_.abstracted_tokens.size();
    std::vector<std::pair<std::size_t, std::size_t>> groups;  // [first, last] instance index
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!groups.empty() && out[groups.back().first].trigger == out[i].trigger) {
        groups.back().second = i;
      } else {
        groups.push_back({i, i});
      }
    }
    std::vector<std::size_t> starts(groups.size(), 0);
    for (std::size_t g = 1; g < groups.size(); ++g) {
      auto prev = out[groups[g - 1].first].trigger;
      auto cur = out[groups[g].first].trigger;
      std::size_t boundary = cur.begin;
      for (auto p = prev.end; p < cur.begin; ++p) {
        if (lx_.is_coordinator(to_lower(a_.abstracted_tokens[p]))) boundary = p;
      }
      starts[g] = std::max(boundary, starts[g - 1]);
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
      std::size_t end = g + 1 < groups.size() ? starts[g + 1] : n;
      for (auto i = groups[g].first; i <= groups[g].second; ++i) out[i].window = {starts[g], std::max(end, starts[g])};
    }
    return out;
  }

  void match_instances() {
    instances_ = instances();
    for (auto& inst : instances_) {
      for (std::size_t i = 0; i < typed_.size(); ++i) {
        auto& c = out_.candidates[i];
        if (c.consumed || disp_[i] || !(typed_[i].object || typed_[i].param)) continue;
        if (c.span.begin < inst.window.begin || c.span.begin >= inst.window.end) continue;
        if (!inst.op->accepts_role(c.role)) continue;
        c.consumed = true;
        (typed_[i].object ? inst.objects : inst.params).push_back(i);
      }
      build_actions(inst);
    }
  }

  void build_actions(Instance& inst) {
    // Role with the most parameters drives duplication; first in token order wins ties.
    std::map<std::string, std::vector<std::size_t>> by_role;
    std::string dup_role;
    for (auto p : inst.params) {
      auto& v = by_role[out_.candidates[p].role];
      v.push_back(p);
      if (v.size() > 1 && (dup_role.empty() || v.size() > by_role[dup_role].size())) dup_role = out_.candidates[p].role;
    }
    std::vector<std::vector<std::size_t>> objs, params;
    if (dup_role.empty()) {
      objs.push_back(inst.objects);
      params.push_back(inst.params);
    } else {
      const auto& driver = by_role[dup_role];
      objs.assign(driver.size(), {});
      params.assign(driver.size(), {});
      auto closest = [&](std::size_t cand) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < driver.size(); ++k) {
          if (gap(span(driver[k]), span(cand)) < gap(span(driver[best]), span(cand))) best = k;
        }
        return best;
      };
      for (auto p : inst.params) {
        if (out_.candidates[p].role == dup_role) continue;
        params[closest(p)].push_back(p);
      }
      for (std::size_t k = 0; k < driver.size(); ++k) params[k].push_back(driver[k]);
      if (inst.objects.size() == driver.size()) {
        for (std::size_t k = 0; k < driver.size(); ++k) objs[k].push_back(inst.objects[k]);
      } else {
        for (auto o : inst.objects) objs[closest(o)].push_back(o);
      }
    }
    for (std::size_t k = 0; k < objs.size(); ++k) {
      auto& ps = params[k];
      std::sort(ps.begin(), ps.end());
      EditingAction action;
      action.operation = inst.intent;
      ActionTrace trace{inst.intent, inst.trigger, {}, dup_role.empty() ? "matched" : "duplicated", {}};
      TokenSpan src = inst.trigger;
      std::size_t index = out_.actions.size();
      for (auto o : objs[k]) {
        action.objects.push_back(build_object(o));
        disp_[o] = Disposition{Disposition::Kind::kObject, index, std::nullopt};
        trace.candidates.push_back(o);
        src = hull(src, span(o));
      }
      for (auto p : ps) {
        action.parameters.push_back(build_param(p));
        disp_[p] = Disposition{Disposition::Kind::kParameter, index, std::nullopt};
        trace.candidates.push_back(p);
        src = hull(src, span(p));
      }
      std::sort(trace.candidates.begin(), trace.candidates.end());
      fill_defaults(action, trace, inst.op);
      action.source_span = src;
      inst.actions.push_back(emit(std::move(action), std::move(trace)));
    }
  }

  // ---- residuals ----------------------------------------------------------

  void orphan(std::size_t i, std::optional<ObjectRef> object, std::optional<ParameterValue> param) {
    EditingAction action;
    if (object) action.objects.push_back(std::move(*object));
    if (param) action.parameters.push_back(std::move(*param));
    action.source_span = span(i);
    auto index = emit(std::move(action), ActionTrace{"*", {}, {i}, "orphan", {}});
    disp_[i] = Disposition{Disposition::Kind::kOrphan, index, std::nullopt};
  }

  void place_residuals() {
    for (std::size_t i = 0; i < typed_.size(); ++i) {
      if (disp_[i]) continue;
      const auto& c = out_.candidates[i];
      if (typed_[i].param) {
        // (a) closest used intent accepting this parameter role
        const Instance* best = nullptr;
        for (const auto& inst : instances_) {
          if (inst.actions.empty() || !inst.op->accepts_role(c.role)) continue;
          auto d = gap(inst.trigger, c.span);
          if (!best || d < gap(best->trigger, c.span)) best = &inst;
        }
        if (best) {
          EditingAction action;
          action.operation = best->intent;
          action.parameters.push_back(build_param(i));
          action.source_span = c.span;
          ActionTrace trace{best->intent, best->trigger, {i}, "residual", {}};
          fill_defaults(action, trace, best->op);
          auto index = emit(std::move(action), std::move(trace));
          disp_[i] = Disposition{Disposition::Kind::kParameter, index, std::nullopt};
          continue;
        }
        orphan(i, std::nullopt, build_param(i));
      } else if (typed_[i].object) {
        orphan(i, build_object(i), std::nullopt);
      } else if (typed_[i].modifier) {
        orphan(i, ObjectRef::selector({*typed_[i].modifier}, catalog_), std::nullopt);
      } else if (typed_[i].anchor) {
        orphan(i, *typed_[i].anchor, std::nullopt);
      } else {
        auto text = unquote(c.value);
        orphan(i, ObjectRef::selector({{"*", text.empty() ? c.role : text}}, catalog_), std::nullopt);
      }
    }
  }

  void rank() {
    auto order = rank_order(out_.actions, catalog_);
    std::vector<std::size_t> new_index(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) new_index[order[k]] = k;
    std::vector<EditingAction> actions;
    std::vector<ActionTrace> trace;
    for (auto k : order) {
      actions.push_back(std::move(out_.actions[k]));
      trace.push_back(std::move(out_.trace[k]));
    }
    out_.actions = std::move(actions);
    out_.trace = std::move(trace);
    for (auto& d : disp_) {
      if (d && d->action) d->action = new_index[*d->action];
      out_.dispositions.push_back(*d);
    }
  }

  const TaggedUtterance& t_;
  const AbstractedUtterance& a_;
  const Catalog& catalog_;
  const RuleTable& rules_;
  const TaggerLexicon& lx_;
  ActionSequence out_;
  std::vector<Typed> typed_;
  std::vector<std::optional<Disposition>> disp_;
  std::vector<std::size_t> anchor_of_;
  std::vector<std::vector<std::size_t>> mods_of_;
  std::vector<Instance> instances_;
};

}  // namespace

const char* to_string(Disposition::Kind k) {
  switch (k) {
    case Disposition::Kind::kObject: return "object";
    case Disposition::Kind::kParameter: return "parameter";
    case Disposition::Kind::kModifier: return "modifier";
    case Disposition::Kind::kAnchor: return "anchor";
    case Disposition::Kind::kOrphan: return "orphan";
  }
  return "?";
}

std::vector<std::string> ActionSequence::serialized() const {
  std::vector<std::string> out;
  for (const auto& a : actions) out.push_back(serialize_action(a));
  return out;
}

nlohmann::json ActionSequence::to_json() const {
  auto span_json = [](TokenSpan s) { return nlohmann::json::array({s.begin, s.end}); };
  nlohmann::json acts = nlohmann::json::array();
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const auto& t = trace[i];
    acts.push_back({{"action", serialize_action(actions[i])},
                    {"intent", t.intent},
                    {"trigger", span_json(t.trigger)},
                    {"span", span_json(actions[i].source_span)},
                    {"candidates", t.candidates},
                    {"rule", t.rule},
                    {"defaults", t.defaults}});
  }
  nlohmann::json cands = nlohmann::json::array();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    nlohmann::json j = {{"role", c.role}, {"value", c.value}, {"span", span_json(c.span)}};
    if (i < dispositions.size()) {
      const auto& d = dispositions[i];
      j["disposition"] = to_string(d.kind);
      if (d.action) j["action"] = *d.action;
      if (d.into) j["into"] = *d.into;
    }
    cands.push_back(j);
  }
  return {{"actions", acts}, {"candidates", cands}};
}

std::vector<EntityCandidate> extract_candidates(const TaggedUtterance& tagged) {
  std::vector<EntityCandidate> out;
  const auto& a = tagged.abstracted;
  for (const auto& chunk : chunks(tagged.labels)) {
    EntityCandidate c;
    c.role = chunk.role;
    c.span = chunk.span;
    const auto* b = chunk.span.size() == 1 ? a.binding_at(chunk.span.begin) : nullptr;
    if (b) {
      c.value = b->canonical;
    } else {
      auto o = a.original_span(chunk.span);
      std::vector<std::string> words;
      for (auto i = o.begin; i < o.end && i < a.tokens.size(); ++i) words.push_back(a.tokens[i].text);
      if (words.empty()) {
        for (auto i = chunk.span.begin; i < chunk.span.end && i < a.abstracted_tokens.size(); ++i) {
          words.push_back(a.abstracted_tokens[i]);
        }
      }
      c.value = join(words, " ");
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<std::size_t> rank_order(const std::vector<EditingAction>& actions, const Catalog& catalog) {
  auto key = [&](const EditingAction& a) {
    const auto* op = a.is_orphan() ? nullptr : catalog.find_operation(a.operation);
    int rank = op ? category_rank(op->category) : 1000;
    return std::pair<int, std::size_t>(rank, a.source_span.begin);
  };
  std::vector<std::size_t> order(actions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return key(actions[x]) < key(actions[y]); });
  return order;
}

ActionSequence synthesize(const TaggedUtterance& tagged, const Catalog& catalog, const RuleTable& rules) {
  return Synth(tagged, catalog, rules).run();
}

}  // namespace nlchart
