#pragma once

#include <map>
#include <string>
#include <vector>

#include "tgm/schema.hpp"

namespace tgm {

/// Declares one derived component on a folded hyper-node's property
/// record, e.g. an "#orders" counter fed by the count of `count_of` edges.
struct AggregateSpec {
  std::string group;
  std::string name;
  std::string count_of;  // an edge type of the source schema
  std::string type;      // a registered type label
};

/// Disjoint groups of node types to fold into hyper-nodes.
struct GroupingSpec {
  std::map<std::string, std::vector<std::string>> groups;
  std::vector<AggregateSpec> aggregates;
};

/// One merged edge of the folded schema together with everything needed
/// to reconstruct its sources exactly.
struct MergedEdge {
  std::string label;                  // joined source labels
  std::vector<std::string> sources;   // in schema declaration order
  std::vector<EdgeType> source_edges; // full original definitions
};

struct FoldReport {
  std::vector<std::string> groups;
  std::vector<MergedEdge> merged_edges;
  std::vector<Constraint> displaced;     // were scoped to merged-away edges
  std::vector<std::string> added_types;  // property records fold registered
};

struct FoldResult {
  TypedGraphSchema schema;
  FoldReport report;
  Verdict verdict;  // warnings only: MixedKinds, DroppedProperties
};

/// Folds each group into a hyper-node carrying the group's node types,
/// inner edges, and member constraints as its nested schema. Edges that
/// leave a group are rerouted to the hyper-node; edges sharing the same
/// mapped endpoint sets merge into one (label = source labels joined with
/// "/" in declaration order, role multiplicity = most general over the
/// sources). Throws InvalidSchema, OverlappingGroups, DanglingLabel,
/// DuplicateLabel.
FoldResult fold(const TypedGraphSchema& s, const GroupingSpec& spec);

struct UnfoldResult {
  TypedGraphSchema schema;
  Verdict verdict;  // LossyUnfold / PartialUnfold warnings
};

/// Replaces one hyper-node with its nested contents. With a FoldReport
/// the merged edges whose source definitions resolve again are restored
/// exactly; everything else is retargeted from the hyper-node to all of
/// its member types under the merged multiplicity (lossy, warned).
/// Unfolding every group of a fold this way reproduces the original
/// schema. Throws NotAHyperNode, DuplicateLabel.
UnfoldResult unfold(const TypedGraphSchema& s, const std::string& group_label,
                    const FoldReport* report = nullptr);

/// Exact inverse of fold: reconstructs the original schema from the folded
/// one and the report in a single step.
TypedGraphSchema unfold_all(const TypedGraphSchema& s, const FoldReport& report);

}  // namespace tgm
