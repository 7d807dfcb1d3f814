#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tgm/datatype.hpp"
#include "tgm/verdict.hpp"

namespace tgm {

/// Closed interval of occurrence counts. max == kUnbounded renders as "*".
struct Multiplicity {
  static constexpr std::uint32_t kUnbounded = 0xffffffffu;

  std::uint32_t min = 0;
  std::uint32_t max = kUnbounded;

  bool unbounded() const { return max == kUnbounded; }
  bool admits(std::uint32_t n) const { return n >= min && n <= max; }
  bool covers(const Multiplicity& o) const {
    return min <= o.min && max >= o.max;
  }
  std::string to_string() const;

  friend bool operator==(const Multiplicity&, const Multiplicity&) = default;
};

/// Tightest multiplicity covering every input: (min of mins, max of maxes).
/// Throws EmptyInput for an empty list.
Multiplicity most_general_multiplicity(const std::vector<Multiplicity>& ms);

/// One role end of an edge type: which node type participates and how many
/// times each instance node of that type must take this role, counted over
/// all edges of the type.
struct Participation {
  std::string node_type;
  Multiplicity multiplicity;

  friend bool operator==(const Participation&, const Participation&) = default;
};

enum class EdgeKind { Plain, Aggregation, Generalization, Composition, User };

const char* edge_kind_name(EdgeKind k);

struct TypedGraphSchema;

/// Node type. `nested` makes it a hyper-node: instances of it carry a whole
/// sub-instance conforming to the nested schema.
struct NodeType {
  std::string label;
  std::string property_type = "empty_record";  // must resolve to a record
  std::shared_ptr<const TypedGraphSchema> nested;
};

/// Edge type over sets of tail and set of head roles; |tail| + |head| > 2
/// makes it a hyper-edge. Generalization edges are structural: exactly one
/// (1,1) role per side and no properties.
struct EdgeType {
  std::string label;
  std::string property_type = "empty_record";
  EdgeKind kind = EdgeKind::Plain;
  std::string user_tag;  // set iff kind == User
  std::vector<Participation> tail;
  std::vector<Participation> head;

  std::string kind_text() const;  // "plain", ..., "user:<tag>"
};

/// Named boolean expression over one node or edge type's instances.
struct Constraint {
  std::string label;
  std::string scope;  // a node type or edge type label
  std::string expression;

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

struct TypedGraphSchema {
  TypeRegistry registry;
  std::vector<NodeType> node_types;
  std::vector<EdgeType> edge_types;
  std::vector<Constraint> constraints;

  const NodeType* find_node(const std::string& label) const;
  const EdgeType* find_edge(const std::string& label) const;

  /// Edge types in which `node_label` takes part on either side.
  std::vector<const EdgeType*> edges_touching(const std::string& node_label) const;
};

/// Structural well-formedness of a schema: registered property records,
/// resolvable participations, multiplicity sanity, label uniqueness,
/// parseable and type-correct constraints, generalization edge shape,
/// acyclic hyper-node containment. anyType reachability is a warning.
Verdict validate_schema(const TypedGraphSchema& s);

/// Equality as canonical serialization byte equality; declaration order of
/// node/edge types never matters, component and role order does. Throws
/// InvalidSchema when either side fails validate_schema.
bool schema_equals(const TypedGraphSchema& a, const TypedGraphSchema& b);

}  // namespace tgm
