#include "tgm/abstraction.hpp"

#include <algorithm>
#include <set>

namespace tgm {

namespace {

std::map<std::string, std::string> build_membership(
    const TypedGraphSchema& s, const GroupingSpec& spec) {
  std::map<std::string, std::string> member_of;
  for (const auto& [group, members] : spec.groups) {
    for (const auto& m : members) {
      if (!s.find_node(m))
        throw TgmError("DanglingLabel",
                       "group '" + group + "' lists unknown node type '" + m +
                           "'");
      auto [it, fresh] = member_of.emplace(m, group);
      if (!fresh)
        throw TgmError("OverlappingGroups",
                       "node type '" + m + "' is in groups '" + it->second +
                           "' and '" + group + "'");
    }
  }
  return member_of;
}

std::string map_label(const std::map<std::string, std::string>& member_of,
                      const std::string& node_type) {
  auto it = member_of.find(node_type);
  return it == member_of.end() ? node_type : it->second;
}

/// Role participations of a merged edge: one per distinct mapped label,
/// in first-appearance order over the sources, with the most general
/// multiplicity of everything that mapped there.
std::vector<Participation> merge_side(
    const std::vector<const EdgeType*>& sources, bool tail,
    const std::map<std::string, std::string>& member_of) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<Multiplicity>> gathered;
  for (const EdgeType* e : sources) {
    for (const Participation& p : tail ? e->tail : e->head) {
      std::string mapped = map_label(member_of, p.node_type);
      if (!gathered.count(mapped)) order.push_back(mapped);
      gathered[mapped].push_back(p.multiplicity);
    }
  }
  std::vector<Participation> out;
  for (const auto& label : order)
    out.push_back({label, most_general_multiplicity(gathered[label])});
  return out;
}

}  // namespace

FoldResult fold(const TypedGraphSchema& s, const GroupingSpec& spec) {
  {
    Verdict v = validate_schema(s);
    if (!v.ok()) {
      const Violation& first = v.violations().front();
      throw TgmError("InvalidSchema", "fold over invalid schema (" +
                                          first.rule + " on " + first.element +
                                          ": " + first.message + ")");
    }
  }
  auto member_of = build_membership(s, spec);

  // group labels must be fresh relative to everything that stays visible;
  // reusing the label of a node type that gets folded away is fine
  for (const auto& [group, members] : spec.groups) {
    bool node_stays = s.find_node(group) && !member_of.count(group);
    if (node_stays || s.find_edge(group))
      throw TgmError("DuplicateLabel", "group label '" + group +
                                           "' collides with an existing type");
  }
  for (const auto& agg : spec.aggregates) {
    if (!spec.groups.count(agg.group))
      throw TgmError("DanglingLabel",
                     "aggregate '" + agg.name + "' names unknown group '" +
                         agg.group + "'");
    if (!s.find_edge(agg.count_of))
      throw TgmError("DanglingLabel",
                     "aggregate '" + agg.name + "' counts unknown edge type '" +
                         agg.count_of + "'");
    if (!s.registry.contains(agg.type))
      throw TgmError("DanglingLabel", "aggregate '" + agg.name +
                                          "' uses unregistered type '" +
                                          agg.type + "'");
  }

  FoldResult result;
  TypedGraphSchema& out = result.schema;
  out.registry = s.registry;
  result.report.groups.reserve(spec.groups.size());
  for (const auto& [group, members] : spec.groups)
    result.report.groups.push_back(group);

  // partition edges: inside one group, untouched, or crossing into groups
  std::map<std::string, std::vector<EdgeType>> intra;
  std::vector<const EdgeType*> passthrough;
  using BucketKey = std::pair<std::vector<std::string>, std::vector<std::string>>;
  std::map<BucketKey, std::size_t> bucket_index;
  std::vector<std::vector<const EdgeType*>> buckets;

  for (const EdgeType& e : s.edge_types) {
    auto mapped_set = [&](const std::vector<Participation>& side) {
      std::set<std::string> labels;
      for (const auto& p : side) labels.insert(map_label(member_of, p.node_type));
      return std::vector<std::string>(labels.begin(), labels.end());
    };
    bool any_grouped = false, all_one_group = true;
    std::string the_group;
    for (const auto* side : {&e.tail, &e.head}) {
      for (const auto& p : *side) {
        auto it = member_of.find(p.node_type);
        if (it == member_of.end()) {
          all_one_group = false;
        } else {
          any_grouped = true;
          if (the_group.empty()) the_group = it->second;
          else if (the_group != it->second) all_one_group = false;
        }
      }
    }
    if (!any_grouped) {
      passthrough.push_back(&e);
    } else if (all_one_group) {
      intra[the_group].push_back(e);
    } else {
      BucketKey key{mapped_set(e.tail), mapped_set(e.head)};
      auto [it, fresh] = bucket_index.emplace(key, buckets.size());
      if (fresh) buckets.emplace_back();
      buckets[it->second].push_back(&e);
    }
  }

  // hyper-node per group, with an aggregate property record where declared
  for (const auto& [group, members] : spec.groups) {
    NodeType hyper;
    hyper.label = group;

    std::vector<RecordComponent> comps;
    for (const auto& agg : spec.aggregates)
      if (agg.group == group) comps.push_back({agg.name, agg.type});
    if (comps.empty()) {
      hyper.property_type = "empty_record";
    } else {
      std::string label = group + "_props";
      int salt = 2;
      while (out.registry.contains(label))
        label = group + "_props" + std::to_string(salt++);
      out.registry.add(make_record(label, comps));
      result.report.added_types.push_back(label);
      hyper.property_type = label;
    }

    auto nested = std::make_shared<TypedGraphSchema>();
    nested->registry = s.registry;
    for (const auto& m : members) nested->node_types.push_back(*s.find_node(m));
    if (auto it = intra.find(group); it != intra.end())
      nested->edge_types = it->second;
    for (const auto& c : s.constraints) {
      bool inner_scope =
          std::any_of(members.begin(), members.end(),
                      [&](const std::string& m) { return m == c.scope; }) ||
          std::any_of(nested->edge_types.begin(), nested->edge_types.end(),
                      [&](const EdgeType& e) { return e.label == c.scope; });
      if (inner_scope) nested->constraints.push_back(c);
    }
    hyper.nested = std::move(nested);
    out.node_types.push_back(std::move(hyper));
  }
  for (const NodeType& n : s.node_types)
    if (!member_of.count(n.label)) out.node_types.push_back(n);

  // merged edges, in first-appearance order
  std::set<std::string> merged_away;  // source labels that lost their edge
  for (const auto& bucket : buckets) {
    MergedEdge entry;
    EdgeType merged;
    for (const EdgeType* e : bucket) {
      entry.sources.push_back(e->label);
      entry.source_edges.push_back(*e);
    }
    std::string joined;
    for (const auto& l : entry.sources)
      joined += (joined.empty() ? "" : "/") + l;
    entry.label = joined;
    merged.label = joined;

    bool same_kind = std::all_of(bucket.begin(), bucket.end(),
                                 [&](const EdgeType* e) {
                                   return e->kind_text() ==
                                          bucket.front()->kind_text();
                                 });
    if (same_kind) {
      merged.kind = bucket.front()->kind;
      merged.user_tag = bucket.front()->user_tag;
    } else {
      merged.kind = EdgeKind::Plain;
      result.verdict.warn("MixedKinds", merged.label,
                          "sources disagree on the edge kind; merged as plain");
    }
    bool same_props = std::all_of(bucket.begin(), bucket.end(),
                                  [&](const EdgeType* e) {
                                    return e->property_type ==
                                           bucket.front()->property_type;
                                  });
    if (same_props) {
      merged.property_type = bucket.front()->property_type;
    } else {
      merged.property_type = "empty_record";
      result.verdict.warn("DroppedProperties", merged.label,
                          "sources disagree on properties; merged without");
    }
    merged.tail = merge_side(bucket, true, member_of);
    merged.head = merge_side(bucket, false, member_of);

    bool collides = out.find_node(merged.label) || out.find_edge(merged.label);
    if (bucket.size() > 1 && s.find_edge(merged.label)) collides = true;
    if (collides)
      throw TgmError("DuplicateLabel", "merged edge label '" + merged.label +
                                           "' collides with an existing type");
    for (const auto& l : entry.sources)
      if (l != merged.label) merged_away.insert(l);
    result.report.merged_edges.push_back(std::move(entry));
    out.edge_types.push_back(std::move(merged));
  }
  for (const EdgeType* e : passthrough) out.edge_types.push_back(*e);

  // constraints: keep what still resolves at the top, move the inner ones
  // into the hyper-nodes (done above), park the merged-away ones
  for (const auto& c : s.constraints) {
    if (member_of.count(c.scope)) continue;  // lives inside a hyper-node now
    bool inner_edge = false;
    for (const auto& [group, edges] : intra)
      for (const auto& e : edges)
        if (e.label == c.scope) inner_edge = true;
    if (inner_edge) continue;
    if (merged_away.count(c.scope)) {
      result.report.displaced.push_back(c);
      continue;
    }
    out.constraints.push_back(c);
  }

  result.verdict.finalize();
  return result;
}

namespace {

const MergedEdge* find_entry(const FoldReport* report,
                             const std::string& label) {
  if (!report) return nullptr;
  for (const auto& e : report->merged_edges)
    if (e.label == label) return &e;
  return nullptr;
}

bool touches(const EdgeType& e, const std::string& label) {
  auto on = [&](const std::vector<Participation>& side) {
    return std::any_of(side.begin(), side.end(), [&](const Participation& p) {
      return p.node_type == label;
    });
  };
  return on(e.tail) || on(e.head);
}

}  // namespace

UnfoldResult unfold(const TypedGraphSchema& s, const std::string& group_label,
                    const FoldReport* report) {
  const NodeType* hyper = s.find_node(group_label);
  if (!hyper || !hyper->nested)
    throw TgmError("NotAHyperNode",
                   "'" + group_label + "' is not a hyper-node of this schema");

  UnfoldResult result;
  TypedGraphSchema& out = result.schema;
  const TypedGraphSchema& nested = *hyper->nested;

  out.registry = s.registry;
  for (const auto& [label, t] : nested.registry.types())
    out.registry.add(t);  // identical entries are no-ops
  if (report) {
    for (const auto& added : report->added_types)
      if (added == hyper->property_type) {
        auto types = out.registry.types();  // copy-out, rebuild without it
        TypeRegistry pruned;
        for (const auto& [label, t] : types)
          if (label != added && !TypeRegistry::is_builtin(label))
            pruned.add(t);
        out.registry = std::move(pruned);
      }
  }

  std::set<std::string> visible;  // node labels after the splice
  for (const NodeType& n : s.node_types) {
    if (n.label == group_label) continue;
    out.node_types.push_back(n);
    visible.insert(n.label);
  }
  for (const NodeType& n : nested.node_types) {
    if (visible.count(n.label))
      throw TgmError("DuplicateLabel", "unfolding '" + group_label +
                                           "' re-introduces label '" + n.label +
                                           "'");
    out.node_types.push_back(n);
    visible.insert(n.label);
  }

  std::set<std::string> restored_sources;
  for (const EdgeType& e : s.edge_types) {
    if (!touches(e, group_label)) {
      out.edge_types.push_back(e);
      continue;
    }
    const MergedEdge* entry = find_entry(report, e.label);
    bool resolvable = entry != nullptr;
    if (entry) {
      for (const EdgeType& src : entry->source_edges)
        for (const auto* side : {&src.tail, &src.head})
          for (const Participation& p : *side)
            if (!visible.count(p.node_type)) resolvable = false;
    }
    if (resolvable) {
      for (const EdgeType& src : entry->source_edges) {
        out.edge_types.push_back(src);
        restored_sources.insert(src.label);
      }
      continue;
    }
    // reroute the hyper-node's roles to every member type
    EdgeType rerouted = e;
    for (auto* side : {&rerouted.tail, &rerouted.head}) {
      std::vector<Participation> next;
      for (const Participation& p : *side) {
        if (p.node_type != group_label) {
          next.push_back(p);
          continue;
        }
        for (const NodeType& member : nested.node_types)
          next.push_back({member.label, p.multiplicity});
      }
      *side = std::move(next);
    }
    result.verdict.warn(
        report ? "PartialUnfold" : "LossyUnfold", e.label,
        "rerouted '" + group_label +
            "' roles to its member types; source roles are approximated");
    out.edge_types.push_back(std::move(rerouted));
  }
  for (const EdgeType& e : nested.edge_types) out.edge_types.push_back(e);

  out.constraints = s.constraints;
  for (const Constraint& c : nested.constraints) out.constraints.push_back(c);
  if (report)
    for (const Constraint& c : report->displaced)
      if (restored_sources.count(c.scope)) out.constraints.push_back(c);

  result.verdict.finalize();
  return result;
}

TypedGraphSchema unfold_all(const TypedGraphSchema& s,
                            const FoldReport& report) {
  TypedGraphSchema out;
  std::set<std::string> hyper_labels(report.groups.begin(),
                                     report.groups.end());
  std::set<std::string> merged_labels;
  for (const auto& e : report.merged_edges) merged_labels.insert(e.label);

  {
    TypeRegistry pruned;
    std::set<std::string> dropped(report.added_types.begin(),
                                  report.added_types.end());
    for (const auto& [label, t] : s.registry.types())
      if (!dropped.count(label) && !TypeRegistry::is_builtin(label))
        pruned.add(t);
    out.registry = std::move(pruned);
  }

  for (const NodeType& n : s.node_types) {
    if (!hyper_labels.count(n.label)) {
      out.node_types.push_back(n);
      continue;
    }
    if (!n.nested)
      throw TgmError("NotAHyperNode", "report group '" + n.label +
                                          "' is not a hyper-node here");
    for (const NodeType& inner : n.nested->node_types)
      out.node_types.push_back(inner);
    for (const EdgeType& inner : n.nested->edge_types)
      out.edge_types.push_back(inner);
    for (const Constraint& inner : n.nested->constraints)
      out.constraints.push_back(inner);
  }
  for (const EdgeType& e : s.edge_types)
    if (!merged_labels.count(e.label)) out.edge_types.push_back(e);
  for (const auto& entry : report.merged_edges)
    for (const EdgeType& src : entry.source_edges)
      out.edge_types.push_back(src);
  for (const Constraint& c : s.constraints) out.constraints.push_back(c);
  for (const Constraint& c : report.displaced) out.constraints.push_back(c);
  return out;
}

}  // namespace tgm
