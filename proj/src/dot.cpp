#include "tgm/dot.hpp"

#include <algorithm>

namespace tgm {

namespace {

std::string escape_text(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string escape_record(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '{' || c == '}' || c == '|' || c == '<' || c == '>' ||
        c == '"' || c == '\\')
      out += '\\';
    out += c;
  }
  return out;
}

std::string property_lines(const TypedGraphSchema& s,
                           const std::string& record_label) {
  const DataType* record = s.registry.find(record_label);
  if (!record) return "";
  std::string out;
  for (const auto& c : record->components)
    out += escape_record(c.name) + " : " + escape_record(c.type) + "\\l";
  return out;
}

std::string role_label(const Participation& p) {
  return "(" + p.multiplicity.to_string() + ")";
}

}  // namespace

std::string to_dot(const TypedGraphSchema& s) {
  Verdict v = validate_schema(s);
  if (!v.ok()) {
    const Violation& first = v.violations().front();
    throw TgmError("InvalidSchema", first.rule + " at '" + first.element +
                                        "': " + first.message);
  }

  std::vector<const NodeType*> nodes;
  for (const auto& n : s.node_types) nodes.push_back(&n);
  std::sort(nodes.begin(), nodes.end(),
            [](const NodeType* a, const NodeType* b) {
              return a->label < b->label;
            });
  std::vector<const EdgeType*> edges;
  for (const auto& e : s.edge_types) edges.push_back(&e);
  std::sort(edges.begin(), edges.end(),
            [](const EdgeType* a, const EdgeType* b) {
              return a->label < b->label;
            });

  std::string out = "digraph schema {\n";
  if (!nodes.empty()) {
    out += "  rankdir=LR;\n";
    out += "  node [shape=record, fontsize=10];\n";
    out += "  edge [fontsize=9];\n";
  }

  for (const NodeType* n : nodes) {
    std::string title = escape_record(n->label);
    if (n->nested) {
      title += " (hyper-node)";
      std::string members;
      std::vector<std::string> labels;
      for (const auto& inner : n->nested->node_types)
        labels.push_back(inner.label);
      std::sort(labels.begin(), labels.end());
      for (const auto& l : labels)
        members += (members.empty() ? "" : ", ") + escape_record(l);
      title = "{" + title + "|nested: " + members + "\\l" +
              property_lines(s, n->property_type) + "}";
    } else {
      std::string props = property_lines(s, n->property_type);
      title = props.empty() ? "{" + title + "}" : "{" + title + "|" + props + "}";
    }
    out += "  \"" + escape_text(n->label) + "\" [label=\"" + title + "\"];\n";
  }

  for (const EdgeType* e : edges) {
    std::string caption = escape_text(e->label) + " : " + e->kind_text();
    const DataType* record = s.registry.find(e->property_type);
    std::string props;
    if (record)
      for (const auto& c : record->components)
        props += "\\n" + escape_text(c.name) + " : " + escape_text(c.type);
    std::string head_style =
        e->kind == EdgeKind::Generalization ? ", arrowhead=empty" : "";

    if (e->tail.size() == 1 && e->head.size() == 1) {
      out += "  \"" + escape_text(e->tail[0].node_type) + "\" -> \"" +
             escape_text(e->head[0].node_type) + "\" [label=\"" + caption +
             "\\n" + role_label(e->tail[0]) + " -> " + role_label(e->head[0]) +
             props + "\"" + head_style + "];\n";
      continue;
    }

    std::string joint = "edge:" + e->label;
    out += "  \"" + escape_text(joint) + "\" [shape=diamond, label=\"" +
           caption + props + "\"];\n";
    for (const auto& p : e->tail)
      out += "  \"" + escape_text(p.node_type) + "\" -> \"" +
             escape_text(joint) + "\" [label=\"" + role_label(p) +
             "\", arrowhead=none];\n";
    for (const auto& p : e->head)
      out += "  \"" + escape_text(joint) + "\" -> \"" +
             escape_text(p.node_type) + "\" [label=\"" + role_label(p) + "\"" +
             head_style + "];\n";
  }

  out += "}\n";
  return out;
}

}  // namespace tgm
