#include "tgm/json_io.hpp"

#include <algorithm>
#include <fstream>

namespace tgm {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& what) {
  throw TgmError("ParseError", what);
}

const json& need(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end())
    parse_fail(where + ": missing key '" + key + "'");
  return *it;
}

std::string need_string(const json& j, const char* key,
                        const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_string())
    parse_fail(where + ": key '" + key + "' must be a string");
  return v.get<std::string>();
}

std::uint32_t need_count(const json& v, const std::string& where) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    parse_fail(where + ": expected a non-negative integer");
  return static_cast<std::uint32_t>(v.get<std::int64_t>());
}

}  // namespace

nlohmann::json datatype_to_json(const DataType& t) {
  json j;
  j["label"] = t.label;
  j["kind"] = kind_name(t.kind);
  switch (t.kind) {
    case TypeKind::Range:
      j["base"] = kind_name(t.base);
      if (t.base == TypeKind::Integer) {
        j["bounds"] = {{"min", static_cast<std::int64_t>(t.lo)},
                       {"max", static_cast<std::int64_t>(t.hi)}};
      } else {
        j["bounds"] = {{"min", t.lo}, {"max", t.hi}};
      }
      break;
    case TypeKind::Enum:
      j["literals"] = t.literals;
      break;
    case TypeKind::Record: {
      json comps = json::array();
      for (const auto& c : t.components)
        comps.push_back({{"name", c.name}, {"type", c.type}});
      j["components"] = comps;
      break;
    }
    case TypeKind::Array:
      j["element"] = t.element;
      j["length"] = t.length;
      break;
    case TypeKind::List:
    case TypeKind::Set:
    case TypeKind::Bag:
      j["element"] = t.element;
      j["bounds"] = {{"min", t.occurs_min},
                     {"max", t.occurs_max ? json(*t.occurs_max) : json("*")}};
      break;
    case TypeKind::Optional:
      j["element"] = t.element;
      break;
    case TypeKind::Union:
      j["variants"] = t.variants;
      break;
    default:
      break;  // primitives carry only label and kind
  }
  return j;
}

DataType datatype_from_json(const nlohmann::json& j) {
  if (!j.is_object()) parse_fail("type entry must be an object");
  std::string label = need_string(j, "label", "type entry");
  std::string where = "type '" + label + "'";
  auto kind = kind_from_name(need_string(j, "kind", where));
  if (!kind) parse_fail(where + ": unknown kind");

  DataType t;
  t.label = label;
  t.kind = *kind;
  switch (t.kind) {
    case TypeKind::Range: {
      auto base = kind_from_name(need_string(j, "base", where));
      if (!base || (*base != TypeKind::Integer && *base != TypeKind::Decimal))
        parse_fail(where + ": range base must be integer or decimal");
      t.base = *base;
      const json& b = need(j, "bounds", where);
      if (!b.is_object() || !need(b, "min", where).is_number() ||
          !need(b, "max", where).is_number())
        parse_fail(where + ": bounds must be {min, max} numbers");
      t.lo = b["min"].get<double>();
      t.hi = b["max"].get<double>();
      break;
    }
    case TypeKind::Enum: {
      const json& ls = need(j, "literals", where);
      if (!ls.is_array()) parse_fail(where + ": literals must be an array");
      for (const auto& l : ls) {
        if (!l.is_string()) parse_fail(where + ": literals must be strings");
        t.literals.push_back(l.get<std::string>());
      }
      break;
    }
    case TypeKind::Record: {
      const json& cs = need(j, "components", where);
      if (!cs.is_array()) parse_fail(where + ": components must be an array");
      for (const auto& c : cs)
        t.components.push_back({need_string(c, "name", where),
                                need_string(c, "type", where)});
      break;
    }
    case TypeKind::Array:
      t.element = need_string(j, "element", where);
      t.length = need_count(need(j, "length", where), where);
      break;
    case TypeKind::List:
    case TypeKind::Set:
    case TypeKind::Bag: {
      t.element = need_string(j, "element", where);
      if (j.contains("bounds")) {
        const json& b = j["bounds"];
        t.occurs_min = need_count(need(b, "min", where), where);
        const json& mx = need(b, "max", where);
        if (mx.is_string()) {
          if (mx.get<std::string>() != "*")
            parse_fail(where + ": bounds max must be a count or \"*\"");
        } else {
          t.occurs_max = need_count(mx, where);
        }
      }
      break;
    }
    case TypeKind::Optional:
      t.element = need_string(j, "element", where);
      break;
    case TypeKind::Union: {
      const json& vs = need(j, "variants", where);
      if (!vs.is_array()) parse_fail(where + ": variants must be an array");
      for (const auto& v : vs) {
        if (!v.is_string()) parse_fail(where + ": variants must be strings");
        t.variants.push_back(v.get<std::string>());
      }
      break;
    }
    default:
      break;
  }
  return t;
}

nlohmann::json multiplicity_to_json(const Multiplicity& m) {
  return {{"min", m.min},
          {"max", m.unbounded() ? json("*") : json(m.max)}};
}

Multiplicity multiplicity_from_json(const nlohmann::json& j) {
  Multiplicity m;
  m.min = need_count(need(j, "min", "multiplicity"), "multiplicity min");
  const json& mx = need(j, "max", "multiplicity");
  if (mx.is_string()) {
    if (mx.get<std::string>() != "*")
      parse_fail("multiplicity max must be a count or \"*\"");
    m.max = Multiplicity::kUnbounded;
  } else {
    m.max = need_count(mx, "multiplicity max");
  }
  return m;
}

namespace {

json participations_to_json(const std::vector<Participation>& side) {
  json out = json::array();
  for (const auto& p : side) {
    json entry = multiplicity_to_json(p.multiplicity);
    entry["node"] = p.node_type;
    out.push_back(std::move(entry));
  }
  return out;
}

std::vector<Participation> participations_from_json(const json& j,
                                                    const std::string& where) {
  if (!j.is_array() ) parse_fail(where + ": role list must be an array");
  std::vector<Participation> out;
  for (const auto& entry : j) {
    Participation p;
    p.node_type = need_string(entry, "node", where);
    p.multiplicity = multiplicity_from_json(entry);
    out.push_back(std::move(p));
  }
  return out;
}

EdgeKind edge_kind_from_text(const std::string& text, std::string& tag,
                             const std::string& where) {
  if (text == "plain") return EdgeKind::Plain;
  if (text == "aggregation") return EdgeKind::Aggregation;
  if (text == "generalization") return EdgeKind::Generalization;
  if (text == "composition") return EdgeKind::Composition;
  if (text.rfind("user:", 0) == 0) {
    tag = text.substr(5);
    if (tag.empty()) parse_fail(where + ": user kind needs a tag");
    return EdgeKind::User;
  }
  parse_fail(where + ": unknown edge kind '" + text + "'");
}

json edge_type_to_json(const EdgeType& e) {
  return {{"label", e.label},
          {"kind", e.kind_text()},
          {"properties", e.property_type},
          {"tail", participations_to_json(e.tail)},
          {"head", participations_to_json(e.head)}};
}

EdgeType edge_type_from_json(const json& j) {
  EdgeType et;
  et.label = need_string(j, "label", "edge entry");
  std::string where = "edge '" + et.label + "'";
  if (j.contains("kind"))
    et.kind =
        edge_kind_from_text(need_string(j, "kind", where), et.user_tag, where);
  if (j.contains("properties"))
    et.property_type = need_string(j, "properties", where);
  et.tail = participations_from_json(need(j, "tail", where), where);
  et.head = participations_from_json(need(j, "head", where), where);
  return et;
}

json constraint_to_json(const Constraint& c) {
  return {{"label", c.label}, {"scope", c.scope}, {"expression", c.expression}};
}

Constraint constraint_from_json(const json& j) {
  return {need_string(j, "label", "constraint entry"),
          need_string(j, "scope", "constraint entry"),
          need_string(j, "expression", "constraint entry")};
}

}  // namespace

nlohmann::json schema_to_json(const TypedGraphSchema& s) {
  json j;

  json types = json::array();
  for (const auto& [label, t] : s.registry.types())
    if (!TypeRegistry::is_builtin(label)) types.push_back(datatype_to_json(t));
  j["types"] = std::move(types);  // registry map is already label-sorted

  std::vector<const NodeType*> nodes;
  for (const auto& n : s.node_types) nodes.push_back(&n);
  std::sort(nodes.begin(), nodes.end(),
            [](const NodeType* a, const NodeType* b) { return a->label < b->label; });
  json jnodes = json::array();
  for (const NodeType* n : nodes) {
    json entry = {{"label", n->label}, {"properties", n->property_type}};
    if (n->nested) entry["nested"] = schema_to_json(*n->nested);
    jnodes.push_back(std::move(entry));
  }
  j["nodes"] = std::move(jnodes);

  std::vector<const EdgeType*> edges;
  for (const auto& e : s.edge_types) edges.push_back(&e);
  std::sort(edges.begin(), edges.end(),
            [](const EdgeType* a, const EdgeType* b) { return a->label < b->label; });
  json jedges = json::array();
  for (const EdgeType* e : edges) jedges.push_back(edge_type_to_json(*e));
  j["edges"] = std::move(jedges);

  std::vector<const Constraint*> constraints;
  for (const auto& c : s.constraints) constraints.push_back(&c);
  std::sort(constraints.begin(), constraints.end(),
            [](const Constraint* a, const Constraint* b) {
              return a->label < b->label;
            });
  json jcons = json::array();
  for (const Constraint* c : constraints) jcons.push_back(constraint_to_json(*c));
  j["constraints"] = std::move(jcons);

  return j;
}

TypedGraphSchema schema_from_json(const nlohmann::json& j) {
  if (!j.is_object()) parse_fail("schema must be a JSON object");
  TypedGraphSchema s;

  if (j.contains("types")) {
    if (!j["types"].is_array()) parse_fail("schema: types must be an array");
    for (const auto& t : j["types"]) s.registry.add(datatype_from_json(t));
  }

  if (j.contains("nodes")) {
    if (!j["nodes"].is_array()) parse_fail("schema: nodes must be an array");
    for (const auto& n : j["nodes"]) {
      NodeType nt;
      nt.label = need_string(n, "label", "node entry");
      if (n.contains("properties"))
        nt.property_type = need_string(n, "properties", "node '" + nt.label + "'");
      if (n.contains("nested"))
        nt.nested = std::make_shared<const TypedGraphSchema>(
            schema_from_json(n["nested"]));
      s.node_types.push_back(std::move(nt));
    }
  }

  if (j.contains("edges")) {
    if (!j["edges"].is_array()) parse_fail("schema: edges must be an array");
    for (const auto& e : j["edges"])
      s.edge_types.push_back(edge_type_from_json(e));
  }

  if (j.contains("constraints")) {
    if (!j["constraints"].is_array())
      parse_fail("schema: constraints must be an array");
    for (const auto& c : j["constraints"])
      s.constraints.push_back(constraint_from_json(c));
  }

  return s;
}

nlohmann::json verdict_to_json(const Verdict& v) {
  json j;
  j["ok"] = v.ok();
  json violations = json::array();
  for (const auto& viol : v.violations())
    violations.push_back({{"rule", viol.rule},
                          {"element", viol.element},
                          {"message", viol.message}});
  j["violations"] = std::move(violations);
  if (!v.warnings().empty()) {
    json warnings = json::array();
    for (const auto& w : v.warnings())
      warnings.push_back({{"rule", w.rule},
                          {"element", w.element},
                          {"message", w.message}});
    j["warnings"] = std::move(warnings);
  }
  return j;
}

nlohmann::json grouping_to_json(const GroupingSpec& spec) {
  json groups = json::object();
  for (const auto& [group, members] : spec.groups) groups[group] = members;
  json j = {{"groups", std::move(groups)}};
  if (!spec.aggregates.empty()) {
    json aggs = json::array();
    for (const auto& a : spec.aggregates)
      aggs.push_back({{"group", a.group},
                      {"name", a.name},
                      {"count_of", a.count_of},
                      {"type", a.type}});
    j["aggregates"] = std::move(aggs);
  }
  return j;
}

GroupingSpec grouping_from_json(const nlohmann::json& j) {
  if (!j.is_object()) parse_fail("grouping must be a JSON object");
  GroupingSpec spec;
  const json& groups = need(j, "groups", "grouping");
  if (!groups.is_object())
    parse_fail("grouping: groups must map labels to member lists");
  for (const auto& [group, members] : groups.items()) {
    if (!members.is_array())
      parse_fail("group '" + group + "': members must be an array");
    std::vector<std::string> list;
    for (const auto& m : members) {
      if (!m.is_string())
        parse_fail("group '" + group + "': members must be strings");
      list.push_back(m.get<std::string>());
    }
    spec.groups.emplace(group, std::move(list));
  }
  if (j.contains("aggregates")) {
    if (!j["aggregates"].is_array())
      parse_fail("grouping: aggregates must be an array");
    for (const auto& a : j["aggregates"])
      spec.aggregates.push_back({need_string(a, "group", "aggregate entry"),
                                 need_string(a, "name", "aggregate entry"),
                                 need_string(a, "count_of", "aggregate entry"),
                                 need_string(a, "type", "aggregate entry")});
  }
  return spec;
}

nlohmann::json fold_report_to_json(const FoldReport& r) {
  json merged = json::array();
  for (const auto& m : r.merged_edges) {
    json sources = json::array();
    for (const auto& e : m.source_edges) sources.push_back(edge_type_to_json(e));
    merged.push_back({{"label", m.label},
                      {"sources", m.sources},
                      {"source_edges", std::move(sources)}});
  }
  json displaced = json::array();
  for (const auto& c : r.displaced) displaced.push_back(constraint_to_json(c));
  return {{"groups", r.groups},
          {"merged_edges", std::move(merged)},
          {"displaced", std::move(displaced)},
          {"added_types", r.added_types}};
}

FoldReport fold_report_from_json(const nlohmann::json& j) {
  if (!j.is_object()) parse_fail("fold report must be a JSON object");
  FoldReport r;
  auto string_array = [&](const char* key) {
    std::vector<std::string> out;
    if (!j.contains(key)) return out;
    const std::string where = std::string("fold report: ") + key;
    if (!j[key].is_array()) parse_fail(where + " must be an array");
    for (const auto& v : j[key]) {
      if (!v.is_string()) parse_fail(where + " entries must be strings");
      out.push_back(v.get<std::string>());
    }
    return out;
  };
  r.groups = string_array("groups");
  r.added_types = string_array("added_types");
  if (j.contains("merged_edges")) {
    if (!j["merged_edges"].is_array())
      parse_fail("fold report: merged_edges must be an array");
    for (const auto& m : j["merged_edges"]) {
      MergedEdge entry;
      entry.label = need_string(m, "label", "merged edge entry");
      const std::string where = "merged edge '" + entry.label + "'";
      const json& sources = need(m, "sources", where);
      if (!sources.is_array()) parse_fail(where + ": sources must be an array");
      for (const auto& s : sources) {
        if (!s.is_string()) parse_fail(where + ": sources must be strings");
        entry.sources.push_back(s.get<std::string>());
      }
      const json& defs = need(m, "source_edges", where);
      if (!defs.is_array())
        parse_fail(where + ": source_edges must be an array");
      for (const auto& e : defs)
        entry.source_edges.push_back(edge_type_from_json(e));
      r.merged_edges.push_back(std::move(entry));
    }
  }
  if (j.contains("displaced")) {
    if (!j["displaced"].is_array())
      parse_fail("fold report: displaced must be an array");
    for (const auto& c : j["displaced"])
      r.displaced.push_back(constraint_from_json(c));
  }
  return r;
}

namespace {

json instance_body_to_json(const TypedGraphInstance& g) {
  json j;
  json nodes = json::array();
  for (const auto& [id, n] : g.nodes) {
    json entry = {{"id", n.id}, {"type", n.type}, {"properties", n.properties}};
    if (n.nested) entry["nested"] = instance_body_to_json(*n.nested);
    nodes.push_back(std::move(entry));
  }
  j["nodes"] = std::move(nodes);
  json edges = json::array();
  for (const auto& [id, e] : g.edges)
    edges.push_back({{"id", e.id},
                     {"type", e.type},
                     {"tails", e.tails},
                     {"heads", e.heads},
                     {"properties", e.properties}});
  j["edges"] = std::move(edges);
  return j;
}

std::vector<std::string> string_list(const json& j, const char* key,
                                     const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_array()) parse_fail(where + ": '" + std::string(key) +
                                "' must be an array");
  std::vector<std::string> out;
  for (const auto& s : v) {
    if (!s.is_string())
      parse_fail(where + ": '" + std::string(key) + "' entries must be strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

TypedGraphInstance instance_body_from_json(
    const json& j, std::shared_ptr<const TypedGraphSchema> schema) {
  TypedGraphInstance g;
  g.schema = std::move(schema);
  if (j.contains("nodes")) {
    if (!j["nodes"].is_array()) parse_fail("instance: nodes must be an array");
    for (const auto& n : j["nodes"]) {
      InstanceNode node;
      node.id = need_string(n, "id", "node entry");
      node.type = need_string(n, "type", "node '" + node.id + "'");
      if (n.contains("properties")) node.properties = n["properties"];
      if (n.contains("nested")) {
        std::shared_ptr<const TypedGraphSchema> nested_schema;
        if (g.schema)
          if (const NodeType* nt = g.schema->find_node(node.type))
            nested_schema = nt->nested;
        node.nested = std::make_shared<const TypedGraphInstance>(
            instance_body_from_json(n["nested"], nested_schema));
      }
      if (g.nodes.count(node.id))
        parse_fail("instance: node id '" + node.id + "' repeats");
      g.nodes.emplace(node.id, std::move(node));
    }
  }
  if (j.contains("edges")) {
    if (!j["edges"].is_array()) parse_fail("instance: edges must be an array");
    for (const auto& e : j["edges"]) {
      InstanceEdge edge;
      edge.id = need_string(e, "id", "edge entry");
      std::string where = "edge '" + edge.id + "'";
      edge.type = need_string(e, "type", where);
      edge.tails = string_list(e, "tails", where);
      edge.heads = string_list(e, "heads", where);
      if (e.contains("properties")) edge.properties = e["properties"];
      if (g.edges.count(edge.id))
        parse_fail("instance: edge id '" + edge.id + "' repeats");
      g.edges.emplace(edge.id, std::move(edge));
    }
  }
  return g;
}

}  // namespace

nlohmann::json instance_to_json(const TypedGraphInstance& g) {
  if (!g.schema)
    throw TgmError("InvalidSchema", "instance carries no schema to embed");
  json j = instance_body_to_json(g);
  j["schema"] = schema_to_json(*g.schema);
  return j;
}

nlohmann::json instance_to_json(const TypedGraphInstance& g,
                                const std::string& schema_ref) {
  json j = instance_body_to_json(g);
  j["schema"] = schema_ref;
  return j;
}

TypedGraphInstance instance_from_json(const nlohmann::json& j,
                                      const std::string& base_dir) {
  if (!j.is_object()) parse_fail("instance must be a JSON object");
  const json& ref = need(j, "schema", "instance");
  std::shared_ptr<const TypedGraphSchema> schema;
  if (ref.is_string()) {
    std::string path = ref.get<std::string>();
    if (!base_dir.empty() && !path.empty() && path[0] != '/')
      path = base_dir + "/" + path;
    schema = std::make_shared<const TypedGraphSchema>(load_schema_file(path));
  } else if (ref.is_object()) {
    schema = std::make_shared<const TypedGraphSchema>(schema_from_json(ref));
  } else {
    parse_fail("instance: schema must be a path or an inline object");
  }
  return instance_body_from_json(j, std::move(schema));
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TgmError("FileError", "cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    parse_fail("'" + path + "': " + e.what());
  }
  return j;
}

void save_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw TgmError("FileError", "cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

TypedGraphSchema load_schema_file(const std::string& path) {
  return schema_from_json(load_json_file(path));
}

TypedGraphInstance load_instance_file(const std::string& path) {
  std::string base_dir;
  auto slash = path.find_last_of('/');
  if (slash != std::string::npos) base_dir = path.substr(0, slash);
  return instance_from_json(load_json_file(path), base_dir);
}

}  // namespace tgm
