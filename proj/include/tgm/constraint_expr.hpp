#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tgm/schema.hpp"

namespace tgm {

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

/// Parsed constraint expression.
///
///   expr    := or_expr
///   or_expr := and_expr {"or" and_expr}
///   and_expr:= cmp {"and" cmp}
///   cmp     := term (("="|"!="|"<"|"<="|">"|">=") term)?
///   term    := literal | path | "count" "(" edge_label ")"
///            | "unique" "(" path ")" | "xor" "(" path {"," path} ")"
///   path    := ident {"." ident}
///
/// Literals are integers, decimals, quoted strings (single or double), and
/// true/false. xor over a single path that names a fixed-length array
/// counts the array's non-null elements instead of the path list.
struct ConstraintExpr {
  enum class Kind { Or, And, Cmp, Literal, Path, Count, Unique, Xor };

  Kind kind = Kind::Literal;
  std::vector<ConstraintExpr> children;             // Or, And, Cmp
  CmpOp op = CmpOp::Eq;                             // Cmp
  Value literal;                                    // Literal
  std::vector<std::string> path;                    // Path
  std::string edge_label;                           // Count
  std::vector<std::vector<std::string>> paths;      // Xor, Unique (paths[0])
};

/// Throws ConstraintParseError with the offending position.
ConstraintExpr parse_constraint_expression(const std::string& text);

/// True if any node of the expression is a unique() term. Such constraints
/// depend on the whole scope population, not just one element.
bool uses_unique(const ConstraintExpr& e);

/// Parses and type-checks one constraint against its scope's property
/// record and incident edge types. Violation rules: UnknownScope,
/// ConstraintParseError, ConstraintTypeError.
Verdict check_constraint(const TypedGraphSchema& s, const Constraint& c);

/// Value lookup result for a property path: nullopt when a segment is
/// missing or explicitly null (an absent optional).
std::optional<Value> lookup_path(const Value& properties,
                                 const std::vector<std::string>& path);

/// Everything evaluation needs from the surrounding instance. `properties`
/// is the scoped element's property tree; the callbacks are only invoked
/// for count() and unique() terms.
struct ConstraintContext {
  const Value* properties = nullptr;
  std::function<std::int64_t(const std::string& edge_label)> count_incident;
  std::function<std::vector<Value>(const std::vector<std::string>& path)>
      scope_values;
};

/// Evaluates a type-checked expression. Throws EvaluationError when a
/// compared path has no value or operand kinds do not match; absent paths
/// in bare-boolean or xor position count as false/not present.
bool evaluate_expression(const ConstraintExpr& e, const ConstraintContext& ctx);

}  // namespace tgm
