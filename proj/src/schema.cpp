#include "tgm/schema.hpp"

#include <algorithm>
#include <set>

#include "tgm/constraint_expr.hpp"
#include "tgm/json_io.hpp"

namespace tgm {

std::string Multiplicity::to_string() const {
  return std::to_string(min) + ".." +
         (unbounded() ? "*" : std::to_string(max));
}

Multiplicity most_general_multiplicity(const std::vector<Multiplicity>& ms) {
  if (ms.empty())
    throw TgmError("EmptyInput", "no multiplicities to generalize over");
  Multiplicity out = ms.front();
  for (const Multiplicity& m : ms) {
    out.min = std::min(out.min, m.min);
    out.max = std::max(out.max, m.max);  // kUnbounded absorbs
  }
  return out;
}

const char* edge_kind_name(EdgeKind k) {
  switch (k) {
    case EdgeKind::Plain: return "plain";
    case EdgeKind::Aggregation: return "aggregation";
    case EdgeKind::Generalization: return "generalization";
    case EdgeKind::Composition: return "composition";
    case EdgeKind::User: return "user";
  }
  return "?";
}

std::string EdgeType::kind_text() const {
  if (kind == EdgeKind::User) return "user:" + user_tag;
  return edge_kind_name(kind);
}

const NodeType* TypedGraphSchema::find_node(const std::string& label) const {
  for (const auto& n : node_types)
    if (n.label == label) return &n;
  return nullptr;
}

const EdgeType* TypedGraphSchema::find_edge(const std::string& label) const {
  for (const auto& e : edge_types)
    if (e.label == label) return &e;
  return nullptr;
}

std::vector<const EdgeType*> TypedGraphSchema::edges_touching(
    const std::string& node_label) const {
  std::vector<const EdgeType*> out;
  for (const auto& e : edge_types) {
    auto on_side = [&](const std::vector<Participation>& side) {
      return std::any_of(side.begin(), side.end(), [&](const Participation& p) {
        return p.node_type == node_label;
      });
    };
    if (on_side(e.tail) || on_side(e.head)) out.push_back(&e);
  }
  return out;
}

namespace {

void check_property_record(const TypedGraphSchema& s, const std::string& owner,
                           const std::string& type_label, Verdict& out) {
  const DataType* t = s.registry.find(type_label);
  if (!t) {
    out.add("DanglingPropertyType", owner,
            "property type '" + type_label + "' is not registered");
    return;
  }
  if (t->kind != TypeKind::Record)
    out.add("PropertyTypeNotRecord", owner,
            "property type '" + type_label + "' is a " + kind_name(t->kind) +
                ", not a record");
}

bool reaches_any_type(const TypeRegistry& reg, const std::string& start) {
  std::vector<std::string> stack{start};
  std::set<std::string> seen;
  while (!stack.empty()) {
    std::string label = stack.back();
    stack.pop_back();
    if (!seen.insert(label).second) continue;
    if (label == "anyType") return true;
    const DataType* t = reg.find(label);
    if (!t) continue;
    for (const auto& [ref, cut] : type_references(*t)) stack.push_back(ref);
  }
  return false;
}

void check_participations(const TypedGraphSchema& s, const EdgeType& e,
                          const char* side_name,
                          const std::vector<Participation>& side,
                          Verdict& out) {
  if (side.empty())
    out.add("MissingParticipation", e.label,
            std::string(side_name) + " side has no participation");
  std::set<std::string> seen;
  for (const Participation& p : side) {
    if (!s.find_node(p.node_type))
      out.add("DanglingNodeType", e.label,
              std::string(side_name) + " references unknown node type '" +
                  p.node_type + "'");
    if (!seen.insert(p.node_type).second)
      out.add("DuplicateParticipation", e.label,
              "node type '" + p.node_type + "' repeats on the " + side_name);
    if (p.multiplicity.max == 0)
      out.add("MaxNotPositive", e.label,
              "participation of '" + p.node_type + "' allows no edges at all");
    if (p.multiplicity.min > p.multiplicity.max)
      out.add("MinExceedsMax", e.label,
              "participation of '" + p.node_type + "' has multiplicity " +
                  p.multiplicity.to_string());
  }
}

void validate_into(const TypedGraphSchema& s, const std::string& prefix,
                   std::vector<const TypedGraphSchema*>& ancestry,
                   Verdict& out) {
  auto at = [&](const std::string& element) {
    return prefix.empty() ? element : prefix + "/" + element;
  };

  {
    Verdict types = s.registry.check();
    for (const auto& v : types.violations())
      out.add(v.rule, at(v.element), v.message);
    for (const auto& w : types.warnings())
      out.warn(w.rule, at(w.element), w.message);
  }

  std::set<std::string> labels;
  for (const auto& n : s.node_types) {
    if (n.label.empty()) out.add("InvalidLabel", at("?"), "empty node label");
    if (!labels.insert(n.label).second)
      out.add("DuplicateLabel", at(n.label),
              "label '" + n.label + "' declared more than once");
    Verdict scratch;
    check_property_record(s, n.label, n.property_type, scratch);
    for (const auto& v : scratch.violations())
      out.add(v.rule, at(v.element), v.message);
    if (s.registry.contains(n.property_type) &&
        reaches_any_type(s.registry, n.property_type))
      out.warn("AnyType", at(n.label),
               "properties reach anyType; values are effectively unchecked");
    if (n.nested) {
      bool cycle = std::find(ancestry.begin(), ancestry.end(),
                             n.nested.get()) != ancestry.end();
      if (cycle) {
        out.add("ContainmentCycle", at(n.label),
                "hyper-node nests one of its own ancestors");
      } else {
        ancestry.push_back(n.nested.get());
        validate_into(*n.nested, at(n.label), ancestry, out);
        ancestry.pop_back();
      }
    }
  }

  for (const auto& e : s.edge_types) {
    if (e.label.empty()) out.add("InvalidLabel", at("?"), "empty edge label");
    if (!labels.insert(e.label).second)
      out.add("DuplicateLabel", at(e.label),
              "label '" + e.label + "' declared more than once");
    Verdict scratch;
    check_property_record(s, e.label, e.property_type, scratch);
    check_participations(s, e, "tail", e.tail, scratch);
    check_participations(s, e, "head", e.head, scratch);
    for (const auto& v : scratch.violations())
      out.add(v.rule, at(v.element), v.message);
    if (s.registry.contains(e.property_type) &&
        reaches_any_type(s.registry, e.property_type))
      out.warn("AnyType", at(e.label),
               "properties reach anyType; values are effectively unchecked");
    if (e.kind == EdgeKind::User && e.user_tag.empty())
      out.add("UserKindTag", at(e.label), "user edge kind without a tag");
    if (e.kind == EdgeKind::Generalization) {
      const DataType* pt = s.registry.find(e.property_type);
      bool plain_ends =
          e.tail.size() == 1 && e.head.size() == 1 &&
          e.tail[0].multiplicity == Multiplicity{1, 1} &&
          e.head[0].multiplicity == Multiplicity{1, 1};
      bool no_props = pt && pt->kind == TypeKind::Record &&
                      pt->components.empty();
      if (!plain_ends || !no_props)
        out.add("GeneralizationShape", at(e.label),
                "generalization edges are binary, carry no properties, and "
                "use multiplicity 1..1 on both ends");
    }
  }

  std::set<std::string> constraint_labels;
  for (const auto& c : s.constraints) {
    if (!constraint_labels.insert(c.label).second)
      out.add("DuplicateLabel", at(c.label),
              "constraint label '" + c.label + "' declared more than once");
    Verdict scratch = check_constraint(s, c);
    for (const auto& v : scratch.violations())
      out.add(v.rule, at(v.element), v.message);
  }
}

}  // namespace

Verdict validate_schema(const TypedGraphSchema& s) {
  Verdict out;
  std::vector<const TypedGraphSchema*> ancestry{&s};
  validate_into(s, "", ancestry, out);
  out.finalize();
  return out;
}

bool schema_equals(const TypedGraphSchema& a, const TypedGraphSchema& b) {
  for (const TypedGraphSchema* s : {&a, &b}) {
    Verdict v = validate_schema(*s);
    if (!v.ok()) {
      const Violation& first = v.violations().front();
      throw TgmError("InvalidSchema", "schema_equals over invalid schema (" +
                                          first.rule + " on " + first.element +
                                          ": " + first.message + ")");
    }
  }
  return schema_to_json(a) == schema_to_json(b);
}

}  // namespace tgm
