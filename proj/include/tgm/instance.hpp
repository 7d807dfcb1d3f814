#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tgm/schema.hpp"

namespace tgm {

struct TypedGraphInstance;

struct InstanceNode {
  std::string id;
  std::string type;
  Value properties = Value::object();
  std::shared_ptr<const TypedGraphInstance> nested;  // hyper-node content
};

/// Edge endpoints are node ids; tails and heads may each hold several
/// (hyper-edge). An id may appear once per side at most.
struct InstanceEdge {
  std::string id;
  std::string type;
  std::vector<std::string> tails;
  std::vector<std::string> heads;
  Value properties = Value::object();
};

struct TypedGraphInstance {
  std::shared_ptr<const TypedGraphSchema> schema;
  std::map<std::string, InstanceNode> nodes;
  std::map<std::string, InstanceEdge> edges;

  InstanceNode& add_node(std::string id, std::string type,
                         Value properties = Value::object());
  InstanceEdge& add_edge(std::string id, std::string type,
                         std::vector<std::string> tails,
                         std::vector<std::string> heads,
                         Value properties = Value::object());
};

/// Checks that the instance maps homomorphically onto its schema: every
/// node and edge types correctly, endpoints exist and match a declared
/// participation, every node satisfies the occurrence multiplicities of
/// each participation of its type, properties satisfy their records, and
/// scoped constraints hold. Hyper-node contents are validated recursively
/// against the node type's nested schema (violations prefixed "outer/").
/// Throws InvalidSchema when the schema itself does not validate.
Verdict validate_instance(const TypedGraphInstance& g);

/// Evaluates one constraint for one element of its scope. Throws
/// EvaluationError (absent compared path, operand mismatch), UnknownId,
/// and ScopeMismatch when the element is not of the scoped type.
bool evaluate_constraint(const TypedGraphInstance& g, const Constraint& c,
                         const std::string& element_id);

struct Mutation {
  enum class Op {
    InsertNode,
    UpdateNode,
    DeleteNode,
    InsertEdge,
    UpdateEdge,
    DeleteEdge,
  };

  Op op;
  std::string id;  // empty on insert: the engine assigns one
  std::string type;
  std::optional<Value> properties;
  std::optional<std::vector<std::string>> tails;
  std::optional<std::vector<std::string>> heads;
  std::shared_ptr<const TypedGraphInstance> nested;

  static Mutation insert_node(std::string id, std::string type,
                              Value properties = Value::object());
  static Mutation update_node(std::string id, Value properties);
  static Mutation delete_node(std::string id);
  static Mutation insert_edge(std::string id, std::string type,
                              std::vector<std::string> tails,
                              std::vector<std::string> heads,
                              Value properties = Value::object());
  static Mutation update_edge(std::string id,
                              std::optional<Value> properties,
                              std::optional<std::vector<std::string>> tails,
                              std::optional<std::vector<std::string>> heads);
  static Mutation delete_edge(std::string id);
};

struct MutationResult {
  bool accepted = false;
  TypedGraphInstance instance;  // post state when accepted, input otherwise
  Verdict verdict;
  std::vector<std::string> assigned_ids;  // for inserts without an id
};

/// Applies the whole batch to a copy, then revalidates the parts the batch
/// could have affected (touched elements, edges around touched nodes,
/// endpoints of touched edges; unique() scopes repopulate whenever one of
/// their elements was touched). All-or-nothing: any violation rejects the
/// batch and returns the input unchanged. Assumes the input validates; on
/// a dirty input only the touched region is (re)checked.
///
/// Structural defects in the batch itself (UnknownId, DuplicateId,
/// TypeMismatch between node and edge ids) also reject it.
MutationResult apply_mutations(const TypedGraphInstance& g,
                               const std::vector<Mutation>& batch);

/// The structural half of apply_mutations without any validation: applies
/// the batch or throws on the first structural defect. Exposed so tests
/// can diff incremental revalidation against validate_instance on the
/// same post state.
TypedGraphInstance apply_structural(const TypedGraphInstance& g,
                                    const std::vector<Mutation>& batch,
                                    std::vector<std::string>* assigned_ids = nullptr);

}  // namespace tgm
