#include "tgm/supermodel.hpp"

#include <algorithm>
#include <set>

#include "tgm/json_io.hpp"

namespace tgm {

using nlohmann::json;

std::string meta_kind_name(MetaKind k) {
  switch (k) {
    case MetaKind::Lexical: return "lexical";
    case MetaKind::Abstract: return "abstract";
    case MetaKind::Aggregation: return "aggregation";
    case MetaKind::Generalization: return "generalization";
    case MetaKind::Function: return "function";
  }
  return "abstract";
}

MetaKind meta_kind_from_name(const std::string& name) {
  if (name == "lexical") return MetaKind::Lexical;
  if (name == "abstract") return MetaKind::Abstract;
  if (name == "aggregation") return MetaKind::Aggregation;
  if (name == "generalization") return MetaKind::Generalization;
  if (name == "function") return MetaKind::Function;
  throw TgmError("ParseError", "unknown meta-element kind '" + name + "'");
}

const MetaElement* SupermodelSchema::find(const std::string& id) const {
  for (const auto& e : elements)
    if (e.id == id) return &e;
  return nullptr;
}

namespace {

/// References an element makes, in payload order. Used for dependency
/// ordering and cycle detection.
std::vector<std::string> references(const MetaElement& e) {
  switch (e.kind) {
    case MetaKind::Lexical:
    case MetaKind::Abstract:
      return {};
    case MetaKind::Aggregation: {
      std::vector<std::string> out;
      for (const auto& m : e.members) out.push_back(m.element);
      for (const auto& a : e.attachments) out.push_back(a);
      return out;
    }
    case MetaKind::Generalization:
      return {e.sub, e.super};
    case MetaKind::Function:
      return {e.source, e.target};
  }
  return {};
}

bool record_mode(const SupermodelSchema& sm, const MetaElement& e,
                 std::set<const MetaElement*>& seen) {
  if (e.kind != MetaKind::Aggregation || e.members.empty()) return false;
  if (!seen.insert(&e).second) return false;
  for (const auto& m : e.members) {
    const MetaElement* el = sm.find(m.element);
    if (!el) return false;
    if (el->kind == MetaKind::Lexical) continue;
    if (el->kind == MetaKind::Aggregation && record_mode(sm, *el, seen))
      continue;
    return false;
  }
  return true;
}

TypeRegistry registry_of(const SupermodelSchema& sm, Verdict* v) {
  TypeRegistry reg;
  for (const auto& t : sm.types) {
    try {
      reg.add(t);
    } catch (const TgmError& err) {
      if (v) v->add("DuplicateTypeLabel", t.label, err.what());
    }
  }
  if (v) v->merge(reg.check());
  return reg;
}

/// Kahn's ordering, ties broken by declaration index. Unprocessed
/// leftovers sit on a reference cycle.
std::vector<std::size_t> dependency_order(const SupermodelSchema& sm,
                                          std::vector<std::string>* cyclic) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < sm.elements.size(); ++i)
    index.emplace(sm.elements[i].id, i);

  std::vector<std::size_t> pending(sm.elements.size(), 0);
  std::vector<std::vector<std::size_t>> dependents(sm.elements.size());
  for (std::size_t i = 0; i < sm.elements.size(); ++i) {
    for (const auto& ref : references(sm.elements[i])) {
      auto it = index.find(ref);
      if (it == index.end() || it->second == i) continue;
      ++pending[i];
      dependents[it->second].push_back(i);
    }
  }

  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < sm.elements.size(); ++i)
    if (pending[i] == 0) ready.insert(i);
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    std::size_t i = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(i);
    for (std::size_t d : dependents[i])
      if (--pending[d] == 0) ready.insert(d);
  }
  if (cyclic)
    for (std::size_t i = 0; i < sm.elements.size(); ++i)
      if (pending[i] > 0) cyclic->push_back(sm.elements[i].id);
  return order;
}

bool reserved_label(const std::string& label) {
  auto ends_with = [&](const std::string& suffix) {
    return label.size() >= suffix.size() &&
           label.compare(label.size() - suffix.size(), suffix.size(),
                         suffix) == 0;
  };
  return label.empty() || ends_with("_props") || ends_with("?") ||
         ends_with(":single");
}

bool valid_member_multiplicity(const Multiplicity& m) {
  if (m.max == 0) return false;
  if (m.max != Multiplicity::kUnbounded && m.min > m.max) return false;
  return true;
}

}  // namespace

bool is_record_aggregation(const SupermodelSchema& sm, const MetaElement& e) {
  std::set<const MetaElement*> seen;
  return record_mode(sm, e, seen);
}

bool is_property_like(const SupermodelSchema& sm, const MetaElement& e) {
  return e.kind == MetaKind::Lexical || is_record_aggregation(sm, e);
}

Verdict check_supermodel(const SupermodelSchema& sm) {
  Verdict v;
  TypeRegistry reg = registry_of(sm, &v);

  std::set<std::string> ids;
  for (const auto& e : sm.elements)
    if (!ids.insert(e.id).second)
      v.add("DuplicateId", e.id, "element id used more than once");

  auto resolve = [&](const std::string& id, const std::string& owner,
                     const std::string& field) -> const MetaElement* {
    const MetaElement* el = sm.find(id);
    if (!el)
      v.add("DanglingReference", owner,
            field + " references unknown element '" + id + "'");
    return el;
  };

  for (const auto& e : sm.elements) {
    if (reserved_label(e.label))
      v.add("ReservedLabel", e.id,
            "label '" + e.label + "' is empty or uses a reserved suffix");

    switch (e.kind) {
      case MetaKind::Lexical: {
        if (e.label.find('.') != std::string::npos)
          v.add("ReservedLabel", e.id,
                "lexical label '" + e.label + "' must not contain '.'");
        if (!reg.contains(e.datatype)) {
          v.add("DanglingReference", e.id,
                "datatype '" + e.datatype + "' is not registered");
        } else if (reg.at(e.datatype).kind == TypeKind::Record) {
          v.add("LexicalShape", e.id,
                "datatype '" + e.datatype +
                    "' is a record; records arise from aggregations");
        }
        break;
      }
      case MetaKind::Abstract:
        break;
      case MetaKind::Aggregation: {
        if (e.members.empty()) {
          v.add("EmptyAggregation", e.id, "aggregation has no members");
          break;
        }
        bool any_property = false, any_abstract = false, bad = false;
        for (const auto& m : e.members) {
          const MetaElement* el = resolve(m.element, e.id, "member");
          if (!el) { bad = true; continue; }
          if (!valid_member_multiplicity(m.multiplicity))
            v.add("MemberMultiplicity", e.id,
                  "member '" + m.element + "' bounds " +
                      m.multiplicity.to_string() + " are unusable");
          if (el->kind == MetaKind::Abstract) {
            any_abstract = true;
          } else if (is_property_like(sm, *el)) {
            any_property = true;
          } else {
            v.add("BadMember", e.id,
                  "member '" + m.element + "' is neither an abstract nor a "
                  "property-like element");
            bad = true;
          }
        }
        if (bad) break;
        if (any_property && any_abstract) {
          v.add("MixedAggregation", e.id,
                "members mix abstracts with property-like elements");
          break;
        }
        if (any_abstract) {
          if (e.members.size() < 2)
            v.add("AggregationArity", e.id,
                  "an edge aggregation needs at least two members");
          std::set<std::string> head_labels;
          for (std::size_t i = 1; i < e.members.size(); ++i) {
            const MetaElement* el = sm.find(e.members[i].element);
            if (el && !head_labels.insert(el->label).second)
              v.add("DuplicateMember", e.id,
                    "head member label '" + el->label + "' repeats");
          }
          for (const auto& a : e.attachments) {
            const MetaElement* el = resolve(a, e.id, "attachment");
            if (el && !is_property_like(sm, *el))
              v.add("BadAttachment", e.id,
                    "attachment '" + a + "' is not property-like");
          }
        } else {
          if (e.label.find('.') != std::string::npos)
            v.add("ReservedLabel", e.id,
                  "record aggregation label '" + e.label +
                      "' must not contain '.'");
          for (const auto& m : e.members)
            if (valid_member_multiplicity(m.multiplicity) &&
                !(m.multiplicity == Multiplicity{1, 1}) &&
                !(m.multiplicity == Multiplicity{0, 1}))
              v.add("MemberMultiplicity", e.id,
                    "record member '" + m.element +
                        "' must be 1..1 or 0..1, got " +
                        m.multiplicity.to_string());
          if (!e.attachments.empty())
            v.add("BadAttachment", e.id,
                  "a record aggregation carries members only");
        }
        break;
      }
      case MetaKind::Generalization: {
        const MetaElement* sub = resolve(e.sub, e.id, "sub");
        const MetaElement* super = resolve(e.super, e.id, "super");
        if ((sub && sub->kind != MetaKind::Abstract) ||
            (super && super->kind != MetaKind::Abstract))
          v.add("GeneralizationShape", e.id,
                "generalization must relate two abstracts");
        if (sub && super && sub == super)
          v.add("GeneralizationShape", e.id,
                "an element cannot generalize itself");
        break;
      }
      case MetaKind::Function: {
        const MetaElement* src = resolve(e.source, e.id, "source");
        const MetaElement* dst = resolve(e.target, e.id, "target");
        if (!src || !dst) break;
        bool src_abstract = src->kind == MetaKind::Abstract;
        bool src_edge = src->kind == MetaKind::Aggregation &&
                        !is_record_aggregation(sm, *src);
        if (!src_abstract && !src_edge) {
          v.add("FunctionShape", e.id,
                "source '" + e.source +
                    "' must be an abstract or an edge aggregation");
          break;
        }
        if (dst->kind == MetaKind::Abstract) {
          if (!src_abstract)
            v.add("FunctionShape", e.id,
                  "an edge aggregation cannot point to an abstract");
        } else if (!is_property_like(sm, *dst)) {
          v.add("FunctionShape", e.id,
                "target '" + e.target +
                    "' must be an abstract or property-like");
        } else if (e.label != dst->label) {
          v.add("FunctionShape", e.id,
                "a property placement must carry its target's label, got '" +
                    e.label + "' for '" + dst->label + "'");
        }
        break;
      }
    }
  }

  // every property-like element is attached exactly once, so that its
  // place in the translated schema is well defined
  std::map<std::string, int> attached;
  for (const auto& e : sm.elements) {
    if (e.kind == MetaKind::Aggregation) {
      bool record = is_record_aggregation(sm, e);
      for (const auto& a : e.attachments) ++attached[a];
      if (record)
        for (const auto& m : e.members) ++attached[m.element];
    } else if (e.kind == MetaKind::Function) {
      const MetaElement* dst = sm.find(e.target);
      if (dst && is_property_like(sm, *dst)) ++attached[e.target];
    }
  }
  for (const auto& e : sm.elements) {
    if (!is_property_like(sm, e)) continue;
    int n = attached.count(e.id) ? attached.at(e.id) : 0;
    if (n == 0)
      v.add("Unattached", e.id,
            "property-like element is never attached to anything");
    else if (n > 1)
      v.add("MultiplyAttached", e.id,
            "property-like element is attached " + std::to_string(n) +
                " times");
  }

  // node, edge, and produced record labels all identify elements in the
  // image; they share one namespace so the inverse can resolve them
  std::set<std::string> produced_labels;
  for (const auto& e : sm.elements) {
    bool makes_record =
        e.kind == MetaKind::Aggregation && is_record_aggregation(sm, e);
    bool labeled =
        e.kind == MetaKind::Abstract || e.kind == MetaKind::Generalization ||
        (e.kind == MetaKind::Aggregation && !e.members.empty());
    if (e.kind == MetaKind::Function) {
      const MetaElement* dst = sm.find(e.target);
      labeled = dst && dst->kind == MetaKind::Abstract;
    }
    if (!labeled) continue;
    if (!produced_labels.insert(e.label).second)
      v.add("DuplicateLabel", e.id,
            "label '" + e.label + "' already names another element");
    if (makes_record && reg.contains(e.label))
      v.add("DuplicateLabel", e.id,
            "record label '" + e.label + "' already names a type");
  }
  for (const auto& t : sm.types)
    if (reserved_label(t.label) || t.label.find('.') != std::string::npos)
      v.add("ReservedLabel", t.label,
            "type label is empty or uses a reserved suffix");

  // distinct component names per property record
  std::map<std::string, std::set<std::string>> comp_names;
  auto claim_component = [&](const std::string& owner_id,
                             const std::string& member_id) {
    const MetaElement* el = sm.find(member_id);
    if (!el) return;
    if (!comp_names[owner_id].insert(el->label).second)
      v.add("DuplicateComponent", owner_id,
            "two properties named '" + el->label + "'");
  };
  for (const auto& e : sm.elements) {
    if (e.kind == MetaKind::Aggregation) {
      for (const auto& a : e.attachments) claim_component(e.id, a);
      if (is_record_aggregation(sm, e))
        for (const auto& m : e.members) claim_component(e.id, m.element);
    } else if (e.kind == MetaKind::Function) {
      const MetaElement* dst = sm.find(e.target);
      if (dst && is_property_like(sm, *dst))
        claim_component(e.source, e.target);
    }
  }

  std::vector<std::string> cyclic;
  dependency_order(sm, &cyclic);
  for (const auto& id : cyclic)
    v.add("CyclicDependency", id, "element sits on a reference cycle");

  // the sub/super relation itself must be acyclic, independently of the
  // reference graph (generalizations reference abstracts, nothing
  // references them back). Peel elements without outgoing sub links;
  // whatever remains sits on a cycle.
  {
    std::map<std::string, std::vector<std::string>> subs_of;  // super -> subs
    std::map<std::string, int> out;                           // pending supers
    for (const auto& e : sm.elements) {
      if (e.kind != MetaKind::Generalization) continue;
      subs_of[e.super].push_back(e.sub);
      ++out[e.sub];
      out.emplace(e.super, 0);
    }
    std::vector<std::string> frontier;
    for (const auto& [id, n] : out)
      if (n == 0) frontier.push_back(id);
    while (!frontier.empty()) {
      std::string top = frontier.back();
      frontier.pop_back();
      for (const auto& sub : subs_of[top])
        if (--out.at(sub) == 0) frontier.push_back(sub);
    }
    for (const auto& e : sm.elements)
      if (e.kind == MetaKind::Generalization && out.at(e.sub) > 0 &&
          out.at(e.super) > 0)
        v.add("CyclicGeneralization", e.id,
              "sub/super chain through '" + e.sub + "' loops");
  }

  v.finalize();
  return v;
}

namespace {

struct EdgeBuild {
  EdgeType edge;
  std::vector<RecordComponent> comps;
};

struct NodeBuild {
  std::string label;
  std::vector<RecordComponent> comps;
};

}  // namespace

TranslationResult translate(const SupermodelSchema& sm) {
  {
    Verdict check = check_supermodel(sm);
    if (!check.ok()) {
      const Violation& first = check.violations().front();
      throw TgmError("InvalidSupermodel", first.rule + " on '" +
                                              first.element + "': " +
                                              first.message);
    }
  }
  std::vector<std::string> cyclic;
  std::vector<std::size_t> order = dependency_order(sm, &cyclic);
  if (!cyclic.empty())
    throw TgmError("CyclicDependency",
                   "element '" + cyclic.front() + "' sits on a cycle");

  TranslationResult result;
  result.report.source_model = sm.source_model;
  TypeRegistry reg = registry_of(sm, nullptr);

  std::map<std::string, NodeBuild> nodes;
  std::map<std::string, EdgeBuild> edges;
  std::vector<std::string> node_order, edge_order;
  std::map<std::string, std::string> owner_label;  // property-like id -> owner

  auto label_of = [&](const std::string& id) { return sm.find(id)->label; };
  auto component_type = [&](const std::string& id, bool optional) {
    const MetaElement* el = sm.find(id);
    std::string base =
        el->kind == MetaKind::Lexical ? el->datatype : el->label;
    if (!optional) return base;
    std::string wrapped = base + "?";
    if (!reg.contains(wrapped)) reg.add(make_optional(wrapped, base));
    return wrapped;
  };

  for (std::size_t idx : order) {
    const MetaElement& e = sm.elements[idx];
    switch (e.kind) {
      case MetaKind::Lexical:
        result.report.steps.push_back({e.id, 1, ""});
        break;
      case MetaKind::Abstract:
        nodes[e.id] = {e.label, {}};
        node_order.push_back(e.id);
        result.report.steps.push_back({e.id, 2, e.label});
        break;
      case MetaKind::Aggregation: {
        if (is_record_aggregation(sm, e)) {
          std::vector<RecordComponent> comps;
          for (const auto& m : e.members) {
            bool opt = m.multiplicity == Multiplicity{0, 1};
            comps.push_back({label_of(m.element),
                             component_type(m.element, opt)});
            owner_label[m.element] = e.label;
          }
          reg.add(make_record(e.label, comps));
        } else {
          EdgeBuild b;
          b.edge.label = e.label;
          b.edge.kind = EdgeKind::Aggregation;
          b.edge.tail = {{label_of(e.members[0].element),
                          e.members[0].multiplicity}};
          for (std::size_t i = 1; i < e.members.size(); ++i)
            b.edge.head.push_back({label_of(e.members[i].element),
                                   e.members[i].multiplicity});
          for (const auto& a : e.attachments) {
            b.comps.push_back({label_of(a), component_type(a, false)});
            owner_label[a] = e.label;
          }
          edges[e.id] = std::move(b);
          edge_order.push_back(e.id);
        }
        result.report.steps.push_back({e.id, 3, e.label});
        break;
      }
      case MetaKind::Generalization: {
        EdgeBuild b;
        b.edge.label = e.label;
        b.edge.kind = EdgeKind::Generalization;
        b.edge.tail = {{label_of(e.sub), {1, 1}}};
        b.edge.head = {{label_of(e.super), {1, 1}}};
        edges[e.id] = std::move(b);
        edge_order.push_back(e.id);
        result.report.steps.push_back({e.id, 4, e.label});
        break;
      }
      case MetaKind::Function: {
        const MetaElement* dst = sm.find(e.target);
        if (dst->kind == MetaKind::Abstract) {
          EdgeBuild b;
          b.edge.label = e.label;
          b.edge.kind = EdgeKind::Plain;
          b.edge.tail = {{label_of(e.source),
                          e.optional ? Multiplicity{0, 1}
                                     : Multiplicity{1, 1}}};
          b.edge.head = {{label_of(e.target),
                          {0, Multiplicity::kUnbounded}}};
          edges[e.id] = std::move(b);
          edge_order.push_back(e.id);
          result.report.steps.push_back({e.id, 5, e.label});
        } else {
          RecordComponent comp{label_of(e.target),
                               component_type(e.target, e.optional)};
          if (nodes.count(e.source))
            nodes[e.source].comps.push_back(comp);
          else
            edges[e.source].comps.push_back(comp);
          owner_label[e.target] = label_of(e.source);
          result.report.steps.push_back(
              {e.id, 5,
               label_of(e.source) + "." + label_of(e.target) + ":single"});
        }
        break;
      }
    }
  }

  TypedGraphSchema& t = result.schema;
  auto materialize_record = [&](const std::string& label,
                                const std::vector<RecordComponent>& comps) {
    if (comps.empty()) return std::string("empty_record");
    std::string rec = label + "_props";
    reg.add(make_record(rec, comps));
    return rec;
  };
  for (const auto& id : node_order) {
    const NodeBuild& b = nodes.at(id);
    t.node_types.push_back(
        {b.label, materialize_record(b.label, b.comps), nullptr});
  }
  for (const auto& id : edge_order) {
    EdgeBuild& b = edges.at(id);
    b.edge.property_type = materialize_record(b.edge.label, b.comps);
    t.edge_types.push_back(b.edge);
  }
  t.registry = std::move(reg);
  t.constraints = sm.constraints;

  for (auto& step : result.report.steps)
    if (step.rule == 1)
      step.produced =
          owner_label.at(step.element) + "." + label_of(step.element);

  return result;
}

namespace {

[[noreturn]] void bad_report(const std::string& what) {
  throw TgmError("BadReport", what);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Splits "<owner>.<component>" at the last dot; component names never
/// contain one.
std::pair<std::string, std::string> split_produced(const std::string& s) {
  auto pos = s.rfind('.');
  if (pos == std::string::npos || pos == 0 || pos + 1 == s.size())
    bad_report("produced label '" + s + "' is not of the form owner.name");
  return {s.substr(0, pos), s.substr(pos + 1)};
}

struct InverseIndex {
  const TypedGraphSchema& t;
  std::map<std::string, std::string> node_id;    // node label -> element id
  std::map<std::string, std::string> agg_id;     // rule 3 produced -> id
  std::map<std::string, std::string> comp_id;    // "<owner>.<name>" -> id
  std::map<std::string, std::string> record_id;  // record label -> id

  const DataType* record_of(const std::string& owner) const {
    std::string rec;
    if (const NodeType* n = t.find_node(owner))
      rec = n->property_type;
    else if (const EdgeType* e = t.find_edge(owner))
      rec = e->property_type;
    else if (t.registry.contains(owner))
      rec = owner;
    else
      return nullptr;
    if (!t.registry.contains(rec)) return nullptr;
    const DataType& d = t.registry.at(rec);
    return d.kind == TypeKind::Record ? &d : nullptr;
  }

  const RecordComponent* component(const std::string& owner,
                                   const std::string& name) const {
    const DataType* rec = record_of(owner);
    if (!rec) return nullptr;
    for (const auto& c : rec->components)
      if (c.name == name) return &c;
    return nullptr;
  }

  /// Unwraps a generated "<base>?" wrapper; returns (base, was wrapped).
  /// User-defined optional types keep their own label and stay intact.
  std::pair<std::string, bool> strip_optional(const std::string& label) const {
    if (ends_with(label, "?") && t.registry.contains(label)) {
      const DataType& d = t.registry.at(label);
      if (d.kind == TypeKind::Optional) return {d.element, true};
    }
    return {label, false};
  }

  /// Element id of the member a component stands for: a lexical traced
  /// as "<owner>.<name>", or a record aggregation traced by its label.
  std::string member_id(const std::string& owner,
                        const RecordComponent& comp) const {
    auto lex = comp_id.find(owner + "." + comp.name);
    if (lex != comp_id.end()) return lex->second;
    std::string base = strip_optional(comp.type).first;
    auto rec = record_id.find(base);
    if (rec != record_id.end() && comp.name == base) return rec->second;
    bad_report("component '" + comp.name + "' of '" + owner +
               "' is not traced by any step");
  }
};

}  // namespace

SupermodelSchema translate_inverse(const TypedGraphSchema& t,
                                   const TranslationReport& r) {
  SupermodelSchema sm;
  sm.source_model = r.source_model;

  InverseIndex ix{t, {}, {}, {}, {}};
  std::set<std::string> singles;  // "<owner>.<name>" claimed by rule 5
  for (const auto& step : r.steps) {
    switch (step.rule) {
      case 1:
        ix.comp_id[step.produced] = step.element;
        break;
      case 2:
        if (!ix.node_id.emplace(step.produced, step.element).second)
          bad_report("two steps produce node '" + step.produced + "'");
        break;
      case 3:
        ix.agg_id[step.produced] = step.element;
        if (!t.find_edge(step.produced)) ix.record_id[step.produced] = step.element;
        break;
      case 4:
        break;
      case 5:
        if (ends_with(step.produced, ":single"))
          singles.insert(
              step.produced.substr(0, step.produced.size() - 7));
        break;
      default:
        bad_report("step for '" + step.element + "' uses unknown rule " +
                   std::to_string(step.rule));
    }
  }

  for (const auto& step : r.steps) {
    MetaElement e;
    e.id = step.element;
    switch (step.rule) {
      case 1: {
        auto [owner, name] = split_produced(step.produced);
        const RecordComponent* comp = ix.component(owner, name);
        if (!comp)
          bad_report("no component '" + name + "' on '" + owner + "'");
        e.kind = MetaKind::Lexical;
        e.label = name;
        e.datatype = ix.strip_optional(comp->type).first;
        break;
      }
      case 2: {
        if (!t.find_node(step.produced))
          bad_report("no node type '" + step.produced + "'");
        e.kind = MetaKind::Abstract;
        e.label = step.produced;
        break;
      }
      case 3: {
        e.kind = MetaKind::Aggregation;
        e.label = step.produced;
        if (const EdgeType* edge = t.find_edge(step.produced)) {
          auto member = [&](const Participation& p) {
            auto it = ix.node_id.find(p.node_type);
            if (it == ix.node_id.end())
              bad_report("edge '" + edge->label +
                         "' touches untraced node type '" + p.node_type +
                         "'");
            return AggregationMember{it->second, p.multiplicity};
          };
          for (const auto& p : edge->tail) e.members.push_back(member(p));
          for (const auto& p : edge->head) e.members.push_back(member(p));
          const DataType* rec = ix.record_of(step.produced);
          if (rec)
            for (const auto& c : rec->components)
              if (!singles.count(step.produced + "." + c.name))
                e.attachments.push_back(ix.member_id(step.produced, c));
        } else {
          const DataType* rec = ix.record_of(step.produced);
          if (!rec)
            bad_report("step for '" + step.element +
                       "' produced neither an edge nor a record");
          for (const auto& c : rec->components) {
            bool opt = ix.strip_optional(c.type).second;
            e.members.push_back(
                {ix.member_id(step.produced, c),
                 opt ? Multiplicity{0, 1} : Multiplicity{1, 1}});
          }
        }
        break;
      }
      case 4: {
        const EdgeType* edge = t.find_edge(step.produced);
        if (!edge || edge->kind != EdgeKind::Generalization ||
            edge->tail.size() != 1 || edge->head.size() != 1)
          bad_report("no generalization edge '" + step.produced + "'");
        e.kind = MetaKind::Generalization;
        e.label = step.produced;
        auto sub = ix.node_id.find(edge->tail[0].node_type);
        auto super = ix.node_id.find(edge->head[0].node_type);
        if (sub == ix.node_id.end() || super == ix.node_id.end())
          bad_report("generalization '" + step.produced +
                     "' touches untraced node types");
        e.sub = sub->second;
        e.super = super->second;
        break;
      }
      case 5: {
        e.kind = MetaKind::Function;
        if (ends_with(step.produced, ":single")) {
          std::string placed =
              step.produced.substr(0, step.produced.size() - 7);
          auto [owner, name] = split_produced(placed);
          const RecordComponent* comp = ix.component(owner, name);
          if (!comp)
            bad_report("no component '" + name + "' on '" + owner + "'");
          e.label = name;
          auto src_node = ix.node_id.find(owner);
          auto src_agg = ix.agg_id.find(owner);
          if (src_node != ix.node_id.end())
            e.source = src_node->second;
          else if (src_agg != ix.agg_id.end())
            e.source = src_agg->second;
          else
            bad_report("function owner '" + owner + "' is untraced");
          e.target = ix.member_id(owner, *comp);
          e.optional = ix.strip_optional(comp->type).second;
        } else {
          const EdgeType* edge = t.find_edge(step.produced);
          if (!edge || edge->tail.size() != 1 || edge->head.size() != 1)
            bad_report("no single-valued edge '" + step.produced + "'");
          e.label = step.produced;
          auto src = ix.node_id.find(edge->tail[0].node_type);
          auto dst = ix.node_id.find(edge->head[0].node_type);
          if (src == ix.node_id.end() || dst == ix.node_id.end())
            bad_report("edge '" + step.produced +
                       "' touches untraced node types");
          e.source = src->second;
          e.target = dst->second;
          e.optional = edge->tail[0].multiplicity == Multiplicity{0, 1};
        }
        break;
      }
      default:
        bad_report("unknown rule");
    }
    sm.elements.push_back(std::move(e));
  }

  // everything in the schema must trace back to some step
  std::set<std::string> produced_nodes, produced_edges;
  for (const auto& step : r.steps) {
    if (step.rule == 2) produced_nodes.insert(step.produced);
    if (step.rule == 4 || (step.rule == 3 && t.find_edge(step.produced)) ||
        (step.rule == 5 && !ends_with(step.produced, ":single")))
      produced_edges.insert(step.produced);
  }
  for (const auto& n : t.node_types)
    if (!produced_nodes.count(n.label))
      throw TgmError("NotInImage",
                     "node type '" + n.label + "' has no translation step");
  for (const auto& e : t.edge_types)
    if (!produced_edges.count(e.label))
      throw TgmError("NotInImage",
                     "edge type '" + e.label + "' has no translation step");

  for (const auto& [label, ty] : t.registry.types()) {
    if (TypeRegistry::is_builtin(label)) continue;
    if (ends_with(label, "_props") || ends_with(label, "?")) continue;
    if (ix.record_id.count(label)) continue;
    sm.types.push_back(ty);
  }
  sm.constraints = t.constraints;
  return sm;
}

namespace {

/// Rebuilds the meta-elements a record type stands for, recursively.
/// Returns the id of the record aggregation. Each record may be used
/// once; sharing has no preimage.
std::string structural_record(const TypedGraphSchema& t,
                              const std::string& label,
                              SupermodelSchema& sm,
                              std::set<std::string>& used_records);

std::string structural_property(const TypedGraphSchema& t,
                                const std::string& owner,
                                const RecordComponent& comp,
                                SupermodelSchema& sm,
                                std::set<std::string>& used_records,
                                bool* optional) {
  std::string base = comp.type;
  *optional = false;
  if (ends_with(base, "?") && t.registry.contains(base) &&
      t.registry.at(base).kind == TypeKind::Optional) {
    *optional = true;
    base = t.registry.at(base).element;
  }
  if (t.registry.contains(base) &&
      t.registry.at(base).kind == TypeKind::Record) {
    if (comp.name != base)
      throw TgmError("NotInImage", "component '" + comp.name + "' of '" +
                                       owner + "' uses record '" + base +
                                       "' under a different name");
    return structural_record(t, base, sm, used_records);
  }
  MetaElement lex;
  lex.id = owner + "." + comp.name;
  lex.kind = MetaKind::Lexical;
  lex.label = comp.name;
  lex.datatype = base;
  sm.elements.push_back(std::move(lex));
  return owner + "." + comp.name;
}

std::string structural_record(const TypedGraphSchema& t,
                              const std::string& label,
                              SupermodelSchema& sm,
                              std::set<std::string>& used_records) {
  if (!used_records.insert(label).second)
    throw TgmError("NotInImage",
                   "record type '" + label +
                       "' is attached more than once; sharing has no "
                       "preimage");
  MetaElement agg;
  agg.id = label;
  agg.kind = MetaKind::Aggregation;
  agg.label = label;
  for (const auto& c : t.registry.at(label).components) {
    bool optional = false;
    std::string member =
        structural_property(t, label, c, sm, used_records, &optional);
    agg.members.push_back(
        {member, optional ? Multiplicity{0, 1} : Multiplicity{1, 1}});
  }
  sm.elements.push_back(std::move(agg));
  return label;
}

}  // namespace

SupermodelSchema translate_inverse(const TypedGraphSchema& t) {
  SupermodelSchema sm;
  sm.source_model = "tgs";
  std::set<std::string> used_records;

  auto expand_components = [&](const std::string& owner,
                               const std::string& record_label) {
    if (!t.registry.contains(record_label)) return;
    const DataType& rec = t.registry.at(record_label);
    if (rec.kind != TypeKind::Record) return;
    for (const auto& c : rec.components) {
      bool optional = false;
      std::string member =
          structural_property(t, owner, c, sm, used_records, &optional);
      MetaElement fn;
      fn.id = owner + "." + c.name + ":single";
      fn.kind = MetaKind::Function;
      fn.label = c.name;
      fn.source = owner;
      fn.target = member;
      fn.optional = optional;
      sm.elements.push_back(std::move(fn));
    }
  };

  for (const auto& n : t.node_types) {
    MetaElement abs;
    abs.id = n.label;
    abs.kind = MetaKind::Abstract;
    abs.label = n.label;
    sm.elements.push_back(std::move(abs));
  }
  for (const auto& n : t.node_types)
    expand_components(n.label, n.property_type);

  for (const auto& e : t.edge_types) {
    switch (e.kind) {
      case EdgeKind::Generalization: {
        if (e.tail.size() != 1 || e.head.size() != 1)
          throw TgmError("NotInImage", "generalization edge '" + e.label +
                                           "' is not binary");
        MetaElement gen;
        gen.id = e.label;
        gen.kind = MetaKind::Generalization;
        gen.label = e.label;
        gen.sub = e.tail[0].node_type;
        gen.super = e.head[0].node_type;
        sm.elements.push_back(std::move(gen));
        break;
      }
      case EdgeKind::Composition:
      case EdgeKind::User:
        throw TgmError("NotInImage", e.kind_text() + " edge '" + e.label +
                                         "' has no inverse rule");
      case EdgeKind::Plain:
      case EdgeKind::Aggregation: {
        bool single =
            e.kind == EdgeKind::Plain && e.tail.size() == 1 &&
            e.head.size() == 1 &&
            (e.tail[0].multiplicity == Multiplicity{1, 1} ||
             e.tail[0].multiplicity == Multiplicity{0, 1}) &&
            e.property_type == "empty_record";
        if (single) {
          MetaElement fn;
          fn.id = e.label;
          fn.kind = MetaKind::Function;
          fn.label = e.label;
          fn.source = e.tail[0].node_type;
          fn.target = e.head[0].node_type;
          fn.optional = e.tail[0].multiplicity == Multiplicity{0, 1};
          sm.elements.push_back(std::move(fn));
          break;
        }
        MetaElement agg;
        agg.id = e.label;
        agg.kind = MetaKind::Aggregation;
        agg.label = e.label;
        for (const auto& p : e.tail)
          agg.members.push_back({p.node_type, p.multiplicity});
        for (const auto& p : e.head)
          agg.members.push_back({p.node_type, p.multiplicity});
        sm.elements.push_back(std::move(agg));
        expand_components(e.label, e.property_type);
        break;
      }
    }
  }

  for (const auto& [label, ty] : t.registry.types()) {
    if (TypeRegistry::is_builtin(label)) continue;
    if (ends_with(label, "_props") || ends_with(label, "?")) continue;
    if (used_records.count(label)) continue;
    sm.types.push_back(ty);
  }
  sm.constraints = t.constraints;
  return sm;
}

nlohmann::json supermodel_to_json(const SupermodelSchema& sm) {
  json j;
  j["source_model"] = sm.source_model;

  std::vector<const DataType*> types;
  for (const auto& t : sm.types) types.push_back(&t);
  std::sort(types.begin(), types.end(),
            [](const DataType* a, const DataType* b) {
              return a->label < b->label;
            });
  json jtypes = json::array();
  for (const DataType* t : types) jtypes.push_back(datatype_to_json(*t));
  j["types"] = std::move(jtypes);

  std::vector<const MetaElement*> elements;
  for (const auto& e : sm.elements) elements.push_back(&e);
  std::sort(elements.begin(), elements.end(),
            [](const MetaElement* a, const MetaElement* b) {
              return a->id < b->id;
            });
  json jelems = json::array();
  for (const MetaElement* e : elements) {
    json entry = {{"id", e->id},
                  {"kind", meta_kind_name(e->kind)},
                  {"label", e->label}};
    switch (e->kind) {
      case MetaKind::Lexical:
        entry["datatype"] = e->datatype;
        break;
      case MetaKind::Abstract:
        break;
      case MetaKind::Aggregation: {
        json members = json::array();
        for (const auto& m : e->members) {
          json jm = multiplicity_to_json(m.multiplicity);
          jm["element"] = m.element;
          members.push_back(std::move(jm));
        }
        entry["members"] = std::move(members);
        if (!e->attachments.empty()) entry["attachments"] = e->attachments;
        break;
      }
      case MetaKind::Generalization:
        entry["sub"] = e->sub;
        entry["super"] = e->super;
        break;
      case MetaKind::Function:
        entry["source"] = e->source;
        entry["target"] = e->target;
        if (e->optional) entry["optional"] = true;
        break;
    }
    jelems.push_back(std::move(entry));
  }
  j["elements"] = std::move(jelems);

  std::vector<const Constraint*> constraints;
  for (const auto& c : sm.constraints) constraints.push_back(&c);
  std::sort(constraints.begin(), constraints.end(),
            [](const Constraint* a, const Constraint* b) {
              return a->label < b->label;
            });
  json jcons = json::array();
  for (const Constraint* c : constraints)
    jcons.push_back({{"label", c->label},
                     {"scope", c->scope},
                     {"expression", c->expression}});
  j["constraints"] = std::move(jcons);
  return j;
}

SupermodelSchema supermodel_from_json(const nlohmann::json& j) {
  auto fail = [](const std::string& what) -> void {
    throw TgmError("ParseError", what);
  };
  if (!j.is_object()) fail("supermodel must be a JSON object");
  SupermodelSchema sm;
  if (j.contains("source_model")) {
    if (!j["source_model"].is_string())
      fail("supermodel: source_model must be a string");
    sm.source_model = j["source_model"].get<std::string>();
  }
  if (j.contains("types")) {
    if (!j["types"].is_array()) fail("supermodel: types must be an array");
    for (const auto& t : j["types"]) sm.types.push_back(datatype_from_json(t));
  }
  auto need_str = [&](const json& o, const char* key,
                      const std::string& where) {
    if (!o.contains(key) || !o[key].is_string())
      fail(where + ": missing string key '" + key + "'");
    return o[key].get<std::string>();
  };
  if (j.contains("elements")) {
    if (!j["elements"].is_array())
      fail("supermodel: elements must be an array");
    for (const auto& o : j["elements"]) {
      MetaElement e;
      e.id = need_str(o, "id", "element entry");
      std::string where = "element '" + e.id + "'";
      e.kind = meta_kind_from_name(need_str(o, "kind", where));
      e.label = need_str(o, "label", where);
      switch (e.kind) {
        case MetaKind::Lexical:
          e.datatype = need_str(o, "datatype", where);
          break;
        case MetaKind::Abstract:
          break;
        case MetaKind::Aggregation: {
          if (!o.contains("members") || !o["members"].is_array())
            fail(where + ": members must be an array");
          for (const auto& m : o["members"])
            e.members.push_back({need_str(m, "element", where),
                                 multiplicity_from_json(m)});
          if (o.contains("attachments")) {
            if (!o["attachments"].is_array())
              fail(where + ": attachments must be an array");
            for (const auto& a : o["attachments"]) {
              if (!a.is_string()) fail(where + ": attachments must be ids");
              e.attachments.push_back(a.get<std::string>());
            }
          }
          break;
        }
        case MetaKind::Generalization:
          e.sub = need_str(o, "sub", where);
          e.super = need_str(o, "super", where);
          break;
        case MetaKind::Function:
          e.source = need_str(o, "source", where);
          e.target = need_str(o, "target", where);
          if (o.contains("optional")) {
            if (!o["optional"].is_boolean())
              fail(where + ": optional must be a boolean");
            e.optional = o["optional"].get<bool>();
          }
          break;
      }
      sm.elements.push_back(std::move(e));
    }
  }
  if (j.contains("constraints")) {
    if (!j["constraints"].is_array())
      fail("supermodel: constraints must be an array");
    for (const auto& c : j["constraints"])
      sm.constraints.push_back({need_str(c, "label", "constraint entry"),
                                need_str(c, "scope", "constraint entry"),
                                need_str(c, "expression", "constraint entry")});
  }
  return sm;
}

nlohmann::json translation_report_to_json(const TranslationReport& r) {
  json steps = json::array();
  for (const auto& s : r.steps)
    steps.push_back(
        {{"element", s.element}, {"rule", s.rule}, {"produced", s.produced}});
  return {{"source_model", r.source_model}, {"steps", std::move(steps)}};
}

TranslationReport translation_report_from_json(const nlohmann::json& j) {
  auto fail = [](const std::string& what) -> void {
    throw TgmError("ParseError", what);
  };
  if (!j.is_object()) fail("translation report must be a JSON object");
  TranslationReport r;
  if (j.contains("source_model") && j["source_model"].is_string())
    r.source_model = j["source_model"].get<std::string>();
  if (j.contains("steps")) {
    if (!j["steps"].is_array()) fail("report: steps must be an array");
    for (const auto& s : j["steps"]) {
      if (!s.contains("element") || !s["element"].is_string() ||
          !s.contains("rule") || !s["rule"].is_number_integer() ||
          !s.contains("produced") || !s["produced"].is_string())
        fail("report: each step needs element, rule, produced");
      r.steps.push_back({s["element"].get<std::string>(),
                         s["rule"].get<int>(),
                         s["produced"].get<std::string>()});
    }
  }
  return r;
}

bool supermodel_equals(const SupermodelSchema& a, const SupermodelSchema& b) {
  return supermodel_to_json(a) == supermodel_to_json(b);
}

std::vector<std::string> supermodel_diff(const SupermodelSchema& a,
                                         const SupermodelSchema& b) {
  std::vector<std::string> out;
  json ja = supermodel_to_json(a);
  json jb = supermodel_to_json(b);
  if (ja["source_model"] != jb["source_model"])
    out.push_back("source model: '" + ja["source_model"].get<std::string>() +
                  "' vs '" + jb["source_model"].get<std::string>() + "'");

  auto keyed = [](const json& arr, const char* key) {
    std::map<std::string, json> out_map;
    for (const auto& entry : arr)
      out_map.emplace(entry[key].get<std::string>(), entry);
    return out_map;
  };
  auto compare = [&](const char* section, const char* key) {
    auto ma = keyed(ja[section], key);
    auto mb = keyed(jb[section], key);
    for (const auto& [k, va] : ma) {
      auto it = mb.find(k);
      if (it == mb.end())
        out.push_back(std::string(section) + " '" + k +
                      "': only in the first schema");
      else if (va != it->second)
        out.push_back(std::string(section) + " '" + k + "': " + va.dump() +
                      " vs " + it->second.dump());
    }
    for (const auto& [k, vb] : mb)
      if (!ma.count(k))
        out.push_back(std::string(section) + " '" + k +
                      "': only in the second schema");
  };
  compare("types", "label");
  compare("elements", "id");
  compare("constraints", "label");
  return out;
}

Verdict check_information_preservation(const SupermodelSchema& sm) {
  Verdict v = check_supermodel(sm);
  if (!v.ok()) return v;
  try {
    TranslationResult res = translate(sm);
    SupermodelSchema back = translate_inverse(res.schema, res.report);
    for (const auto& d : supermodel_diff(sm, back))
      v.add("NotPreserved", sm.source_model, d);
  } catch (const TgmError& err) {
    v.add("NotPreserved", sm.source_model, err.what());
  }
  v.finalize();
  return v;
}

Verdict check_semantics_preservation(const SupermodelSchema& sm,
                                     std::size_t instance_count,
                                     const InstanceMapper& mapper) {
  Verdict v;
  if (!mapper) {
    v.add("MapperUnavailable", sm.source_model,
          "this source model has schema-only support");
    v.finalize();
    return v;
  }
  auto schema = std::make_shared<const TypedGraphSchema>(translate(sm).schema);
  for (std::size_t i = 0; i < instance_count; ++i) {
    std::string where = "instance[" + std::to_string(i) + "]";
    try {
      TypedGraphInstance mapped = mapper(i, schema);
      Verdict inner = validate_instance(mapped);
      for (const auto& viol : inner.violations())
        v.add(viol.rule, where + "/" + viol.element, viol.message);
    } catch (const TgmError& err) {
      v.add("MappingFailed", where, err.what());
    }
  }
  v.finalize();
  return v;
}

}  // namespace tgm
