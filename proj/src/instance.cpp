#include "tgm/instance.hpp"

#include <algorithm>
#include <array>

#include "tgm/constraint_expr.hpp"

namespace tgm {

InstanceNode& TypedGraphInstance::add_node(std::string id, std::string type,
                                           Value properties) {
  if (nodes.count(id))
    throw TgmError("DuplicateId", "node id '" + id + "' already in use");
  InstanceNode n;
  n.id = id;
  n.type = std::move(type);
  n.properties = std::move(properties);
  return nodes.emplace(std::move(id), std::move(n)).first->second;
}

InstanceEdge& TypedGraphInstance::add_edge(std::string id, std::string type,
                                           std::vector<std::string> tails,
                                           std::vector<std::string> heads,
                                           Value properties) {
  if (edges.count(id))
    throw TgmError("DuplicateId", "edge id '" + id + "' already in use");
  InstanceEdge e;
  e.id = id;
  e.type = std::move(type);
  e.tails = std::move(tails);
  e.heads = std::move(heads);
  e.properties = std::move(properties);
  return edges.emplace(std::move(id), std::move(e)).first->second;
}

namespace {

constexpr int kTail = 0;
constexpr int kHead = 1;

const char* side_name(int side) { return side == kTail ? "tail" : "head"; }

/// Occurrences of each node id per edge type and side, counted over all
/// edges of the instance.
struct OccurrenceTable {
  std::map<std::string, std::array<std::map<std::string, std::uint32_t>, 2>>
      by_edge;

  explicit OccurrenceTable(const TypedGraphInstance& g) {
    for (const auto& [id, e] : g.edges) {
      for (const auto& t : e.tails) ++by_edge[e.type][kTail][t];
      for (const auto& h : e.heads) ++by_edge[e.type][kHead][h];
    }
  }

  std::uint32_t get(const std::string& edge_label, int side,
                    const std::string& node_id) const {
    auto it = by_edge.find(edge_label);
    if (it == by_edge.end()) return 0;
    auto nit = it->second[side].find(node_id);
    return nit == it->second[side].end() ? 0 : nit->second;
  }
};

struct Validator {
  const TypedGraphInstance& g;
  const TypedGraphSchema& s;
  std::string prefix;
  Verdict& out;

  std::string at(const std::string& element) const {
    return prefix.empty() ? element : prefix + "/" + element;
  }

  void property_checks(const std::string& id, const std::string& record_label,
                       const Value& props) {
    Verdict pv = check_value(s.registry, record_label, props);
    for (const auto& v : pv.violations())
      out.add("InvalidProperty", at(id), v.element + ": " + v.message);
  }

  void node_checks(const InstanceNode& n) {
    const NodeType* nt = s.find_node(n.type);
    if (!nt) {
      out.add("UnknownNodeType", at(n.id),
              "node type '" + n.type + "' is not declared");
      return;
    }
    property_checks(n.id, nt->property_type, n.properties);
    if (nt->nested && !n.nested) {
      out.add("MissingNested", at(n.id),
              "hyper-node of type '" + n.type + "' carries no sub-instance");
    } else if (!nt->nested && n.nested) {
      out.add("UnexpectedNested", at(n.id),
              "node type '" + n.type + "' is not a hyper-node");
    } else if (nt->nested && n.nested) {
      if (n.nested->schema) {
        bool same = false;
        std::string why;
        try {
          same = schema_equals(*n.nested->schema, *nt->nested);
        } catch (const TgmError& e) {
          why = std::string(": ") + e.what();
        }
        if (!same)
          out.add("NestedSchemaMismatch", at(n.id),
                  "sub-instance schema differs from the nested schema of '" +
                      n.type + "'" + why);
      }
      Validator inner{*n.nested, *nt->nested, at(n.id), out};
      inner.run_all();
    }
  }

  void edge_checks(const InstanceEdge& e) {
    const EdgeType* et = s.find_edge(e.type);
    if (!et) {
      out.add("UnknownEdgeType", at(e.id),
              "edge type '" + e.type + "' is not declared");
      return;
    }
    for (int side : {kTail, kHead}) {
      const auto& ids = side == kTail ? e.tails : e.heads;
      const auto& roles = side == kTail ? et->tail : et->head;
      if (ids.empty())
        out.add("EmptyEndpointSet", at(e.id),
                std::string(side_name(side)) + " set is empty");
      std::set<std::string> seen;
      for (const auto& endpoint : ids) {
        if (!seen.insert(endpoint).second)
          out.add("DuplicateEndpoint", at(e.id),
                  "node '" + endpoint + "' repeats in the " + side_name(side) +
                      " set");
        auto nit = g.nodes.find(endpoint);
        if (nit == g.nodes.end()) {
          out.add("UnknownEndpoint", at(e.id),
                  std::string(side_name(side)) + " '" + endpoint +
                      "' names no node");
          continue;
        }
        bool fits = std::any_of(roles.begin(), roles.end(),
                                [&](const Participation& p) {
                                  return p.node_type == nit->second.type;
                                });
        if (!fits)
          out.add("EndpointTypeMismatch", at(e.id),
                  "node '" + endpoint + "' of type '" + nit->second.type +
                      "' cannot be a " + side_name(side) + " of '" + e.type +
                      "'");
      }
    }
    property_checks(e.id, et->property_type, e.properties);
  }

  void occurrence_checks(const InstanceNode& n, const OccurrenceTable& occ) {
    for (const auto& et : s.edge_types) {
      for (int side : {kTail, kHead}) {
        const auto& roles = side == kTail ? et.tail : et.head;
        for (const auto& p : roles) {
          if (p.node_type != n.type) continue;
          std::uint32_t count = occ.get(et.label, side, n.id);
          if (!p.multiplicity.admits(count))
            out.add("MultiplicityViolation", at(n.id),
                    "participation " + n.type + " (" + side_name(side) +
                        " of " + et.label + "): " + std::to_string(count) +
                        " outside " + p.multiplicity.to_string());
        }
      }
    }
  }

  ConstraintContext context_for(const std::string& id, const Value& props,
                                bool is_node, const std::string& scope) {
    ConstraintContext ctx;
    ctx.properties = &props;
    if (is_node) {
      ctx.count_incident = [this, id](const std::string& label) {
        std::int64_t n = 0;
        for (const auto& [eid, e] : g.edges) {
          if (e.type != label) continue;
          bool incident =
              std::find(e.tails.begin(), e.tails.end(), id) != e.tails.end() ||
              std::find(e.heads.begin(), e.heads.end(), id) != e.heads.end();
          if (incident) ++n;
        }
        return n;
      };
    }
    ctx.scope_values = [this, is_node,
                        scope](const std::vector<std::string>& path) {
      std::vector<Value> values;
      auto collect = [&](const std::string& type, const Value& props_) {
        if (type != scope) return;
        if (auto v = lookup_path(props_, path)) values.push_back(*v);
      };
      if (is_node)
        for (const auto& [nid, n] : g.nodes) collect(n.type, n.properties);
      else
        for (const auto& [eid, e] : g.edges) collect(e.type, e.properties);
      return values;
    };
    return ctx;
  }

  void constraint_on(const Constraint& c, const ConstraintExpr& expr,
                     const std::string& id, const Value& props, bool is_node) {
    ConstraintContext ctx = context_for(id, props, is_node, c.scope);
    try {
      if (!evaluate_expression(expr, ctx))
        out.add("ConstraintViolated", at(id),
                "constraint '" + c.label + "' (" + c.expression + ") is false");
    } catch (const TgmError& e) {
      out.add("EvaluationError", at(id),
              "constraint '" + c.label + "': " + e.what());
    }
  }

  /// `filter` limits evaluation to certain element ids; nullptr means all.
  void constraint_checks(const std::set<std::string>* node_filter,
                         const std::set<std::string>* edge_filter,
                         const std::set<std::string>* full_scopes) {
    for (const auto& c : s.constraints) {
      ConstraintExpr expr;
      try {
        expr = parse_constraint_expression(c.expression);
      } catch (const TgmError&) {
        continue;  // schema validation already rejected it
      }
      bool everything = full_scopes && full_scopes->count(c.scope);
      if (s.find_node(c.scope)) {
        for (const auto& [id, n] : g.nodes) {
          if (n.type != c.scope) continue;
          if (!everything && node_filter && !node_filter->count(id)) continue;
          constraint_on(c, expr, id, n.properties, true);
        }
      } else if (s.find_edge(c.scope)) {
        for (const auto& [id, e] : g.edges) {
          if (e.type != c.scope) continue;
          if (!everything && edge_filter && !edge_filter->count(id)) continue;
          constraint_on(c, expr, id, e.properties, false);
        }
      }
    }
  }

  void run_all() {
    OccurrenceTable occ(g);
    for (const auto& [id, n] : g.nodes) {
      node_checks(n);
      occurrence_checks(n, occ);
    }
    for (const auto& [id, e] : g.edges) edge_checks(e);
    constraint_checks(nullptr, nullptr, nullptr);
  }
};

void require_valid_schema(const TypedGraphInstance& g) {
  if (!g.schema)
    throw TgmError("InvalidSchema", "instance carries no schema");
  Verdict v = validate_schema(*g.schema);
  if (!v.ok()) {
    const Violation& first = v.violations().front();
    throw TgmError("InvalidSchema", first.rule + " on " + first.element +
                                        ": " + first.message);
  }
}

}  // namespace

Verdict validate_instance(const TypedGraphInstance& g) {
  require_valid_schema(g);
  Verdict out;
  Validator v{g, *g.schema, "", out};
  v.run_all();
  out.finalize();
  return out;
}

bool evaluate_constraint(const TypedGraphInstance& g, const Constraint& c,
                         const std::string& element_id) {
  require_valid_schema(g);
  Verdict scratch;
  Validator v{g, *g.schema, "", scratch};
  ConstraintExpr expr = parse_constraint_expression(c.expression);

  auto nit = g.nodes.find(element_id);
  if (nit != g.nodes.end()) {
    if (nit->second.type != c.scope)
      throw TgmError("ScopeMismatch", "node '" + element_id + "' has type '" +
                                          nit->second.type + "', not '" +
                                          c.scope + "'");
    return evaluate_expression(
        expr, v.context_for(element_id, nit->second.properties, true, c.scope));
  }
  auto eit = g.edges.find(element_id);
  if (eit != g.edges.end()) {
    if (eit->second.type != c.scope)
      throw TgmError("ScopeMismatch", "edge '" + element_id + "' has type '" +
                                          eit->second.type + "', not '" +
                                          c.scope + "'");
    return evaluate_expression(
        expr,
        v.context_for(element_id, eit->second.properties, false, c.scope));
  }
  throw TgmError("UnknownId", "'" + element_id + "' names no element");
}

Mutation Mutation::insert_node(std::string id, std::string type,
                               Value properties) {
  Mutation m;
  m.op = Op::InsertNode;
  m.id = std::move(id);
  m.type = std::move(type);
  m.properties = std::move(properties);
  return m;
}

Mutation Mutation::update_node(std::string id, Value properties) {
  Mutation m;
  m.op = Op::UpdateNode;
  m.id = std::move(id);
  m.properties = std::move(properties);
  return m;
}

Mutation Mutation::delete_node(std::string id) {
  Mutation m;
  m.op = Op::DeleteNode;
  m.id = std::move(id);
  return m;
}

Mutation Mutation::insert_edge(std::string id, std::string type,
                               std::vector<std::string> tails,
                               std::vector<std::string> heads,
                               Value properties) {
  Mutation m;
  m.op = Op::InsertEdge;
  m.id = std::move(id);
  m.type = std::move(type);
  m.tails = std::move(tails);
  m.heads = std::move(heads);
  m.properties = std::move(properties);
  return m;
}

Mutation Mutation::update_edge(std::string id, std::optional<Value> properties,
                               std::optional<std::vector<std::string>> tails,
                               std::optional<std::vector<std::string>> heads) {
  Mutation m;
  m.op = Op::UpdateEdge;
  m.id = std::move(id);
  m.properties = std::move(properties);
  m.tails = std::move(tails);
  m.heads = std::move(heads);
  return m;
}

Mutation Mutation::delete_edge(std::string id) {
  Mutation m;
  m.op = Op::DeleteEdge;
  m.id = std::move(id);
  return m;
}

namespace {

struct ApplyCore {
  TypedGraphInstance post;
  Verdict structural;
  std::set<std::string> touched_nodes, touched_edges;
  std::set<std::string> pre_endpoints;   // endpoints of touched edges' pre images
  std::set<std::string> touched_types;   // node/edge types whose population changed
  std::vector<std::string> assigned;
};

std::uint64_t next_numeric_suffix(const std::map<std::string, InstanceNode>& ns,
                                  const std::map<std::string, InstanceEdge>& es,
                                  char lead) {
  std::uint64_t next = 1;
  auto scan = [&](const std::string& id) {
    if (id.size() < 2 || id[0] != lead) return;
    std::uint64_t n = 0;
    for (std::size_t i = 1; i < id.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(id[i]))) return;
      n = n * 10 + (id[i] - '0');
    }
    next = std::max(next, n + 1);
  };
  for (const auto& [id, n] : ns) scan(id);
  for (const auto& [id, e] : es) scan(id);
  return next;
}

ApplyCore apply_core(const TypedGraphInstance& g,
                     const std::vector<Mutation>& batch) {
  ApplyCore core;
  core.post = g;
  auto& post = core.post;
  std::uint64_t next_node = next_numeric_suffix(g.nodes, g.edges, 'n');
  std::uint64_t next_edge = next_numeric_suffix(g.nodes, g.edges, 'e');

  auto fresh_id = [&](char lead, std::uint64_t& counter) {
    std::string id;
    do {
      id = std::string(1, lead) + std::to_string(counter++);
    } while (post.nodes.count(id) || post.edges.count(id));
    core.assigned.push_back(id);
    return id;
  };

  for (const Mutation& m : batch) {
    switch (m.op) {
      case Mutation::Op::InsertNode: {
        std::string id = m.id.empty() ? fresh_id('n', next_node) : m.id;
        if (post.nodes.count(id) || post.edges.count(id)) {
          core.structural.add("DuplicateId", id, "id already in use");
          break;
        }
        InstanceNode n;
        n.id = id;
        n.type = m.type;
        if (m.properties) n.properties = *m.properties;
        n.nested = m.nested;
        post.nodes.emplace(id, std::move(n));
        core.touched_nodes.insert(id);
        core.touched_types.insert(m.type);
        break;
      }
      case Mutation::Op::UpdateNode:
      case Mutation::Op::DeleteNode: {
        auto it = post.nodes.find(m.id);
        if (it == post.nodes.end()) {
          core.structural.add(
              post.edges.count(m.id) ? "TypeMismatch" : "UnknownId", m.id,
              post.edges.count(m.id) ? "'" + m.id + "' is an edge, not a node"
                                     : "node '" + m.id + "' does not exist");
          break;
        }
        core.touched_nodes.insert(m.id);
        core.touched_types.insert(it->second.type);
        if (m.op == Mutation::Op::DeleteNode) {
          post.nodes.erase(it);
        } else {
          if (m.properties) it->second.properties = *m.properties;
          if (m.nested) it->second.nested = m.nested;
        }
        break;
      }
      case Mutation::Op::InsertEdge: {
        std::string id = m.id.empty() ? fresh_id('e', next_edge) : m.id;
        if (post.nodes.count(id) || post.edges.count(id)) {
          core.structural.add("DuplicateId", id, "id already in use");
          break;
        }
        InstanceEdge e;
        e.id = id;
        e.type = m.type;
        if (m.tails) e.tails = *m.tails;
        if (m.heads) e.heads = *m.heads;
        if (m.properties) e.properties = *m.properties;
        post.edges.emplace(id, std::move(e));
        core.touched_edges.insert(id);
        core.touched_types.insert(m.type);
        break;
      }
      case Mutation::Op::UpdateEdge:
      case Mutation::Op::DeleteEdge: {
        auto it = post.edges.find(m.id);
        if (it == post.edges.end()) {
          core.structural.add(
              post.nodes.count(m.id) ? "TypeMismatch" : "UnknownId", m.id,
              post.nodes.count(m.id) ? "'" + m.id + "' is a node, not an edge"
                                     : "edge '" + m.id + "' does not exist");
          break;
        }
        core.touched_edges.insert(m.id);
        core.touched_types.insert(it->second.type);
        core.pre_endpoints.insert(it->second.tails.begin(),
                                  it->second.tails.end());
        core.pre_endpoints.insert(it->second.heads.begin(),
                                  it->second.heads.end());
        if (m.op == Mutation::Op::DeleteEdge) {
          post.edges.erase(it);
        } else {
          if (m.tails) it->second.tails = *m.tails;
          if (m.heads) it->second.heads = *m.heads;
          if (m.properties) it->second.properties = *m.properties;
        }
        break;
      }
    }
  }
  core.structural.finalize();
  return core;
}

}  // namespace

TypedGraphInstance apply_structural(const TypedGraphInstance& g,
                                    const std::vector<Mutation>& batch,
                                    std::vector<std::string>* assigned_ids) {
  ApplyCore core = apply_core(g, batch);
  if (!core.structural.ok()) {
    const Violation& first = core.structural.violations().front();
    throw TgmError(first.rule, first.element + ": " + first.message);
  }
  if (assigned_ids) *assigned_ids = core.assigned;
  return std::move(core.post);
}

MutationResult apply_mutations(const TypedGraphInstance& g,
                               const std::vector<Mutation>& batch) {
  require_valid_schema(g);
  MutationResult result;
  ApplyCore core = apply_core(g, batch);
  result.assigned_ids = core.assigned;
  if (!core.structural.ok()) {
    result.accepted = false;
    result.instance = g;
    result.verdict = core.structural;
    return result;
  }

  const TypedGraphInstance& post = core.post;
  const TypedGraphSchema& s = *g.schema;

  // Close the dirty region: every edge around a touched node, every
  // endpoint an edge gained or lost.
  std::set<std::string> dirty_edges;
  for (const auto& id : core.touched_edges)
    if (post.edges.count(id)) dirty_edges.insert(id);
  for (const auto& [id, e] : post.edges) {
    auto touches = [&](const std::vector<std::string>& side) {
      return std::any_of(side.begin(), side.end(), [&](const std::string& n) {
        return core.touched_nodes.count(n) != 0;
      });
    };
    if (touches(e.tails) || touches(e.heads)) dirty_edges.insert(id);
  }

  std::set<std::string> dirty_nodes;
  auto mark_node = [&](const std::string& id) {
    if (post.nodes.count(id)) dirty_nodes.insert(id);
  };
  for (const auto& id : core.touched_nodes) mark_node(id);
  for (const auto& id : core.pre_endpoints) mark_node(id);
  for (const auto& id : dirty_edges) {
    const InstanceEdge& e = post.edges.at(id);
    for (const auto& n : e.tails) mark_node(n);
    for (const auto& n : e.heads) mark_node(n);
  }

  Verdict v;
  Validator validator{post, s, "", v};
  OccurrenceTable occ(post);
  for (const auto& id : dirty_nodes) {
    const InstanceNode& n = post.nodes.at(id);
    validator.node_checks(n);
    validator.occurrence_checks(n, occ);
  }
  for (const auto& id : dirty_edges) validator.edge_checks(post.edges.at(id));
  validator.constraint_checks(&dirty_nodes, &dirty_edges,
                              &core.touched_types);
  v.finalize();

  result.accepted = v.ok();
  result.verdict = std::move(v);
  result.instance = result.accepted ? std::move(core.post) : g;
  return result;
}

}  // namespace tgm
