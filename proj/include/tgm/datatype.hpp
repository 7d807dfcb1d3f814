#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tgm/verdict.hpp"

namespace tgm {

/// Property values travel as JSON: records are objects, collections are
/// arrays, absent optionals are null.
using Value = nlohmann::json;

enum class TypeKind {
  Integer,
  Decimal,
  Text,
  Boolean,
  Date,
  Range,
  Enum,
  Record,
  Array,
  List,
  Set,
  Bag,
  Optional,
  Union,
};

bool is_primitive(TypeKind k);
bool is_collection(TypeKind k);  // Array, List, Set, Bag
const char* kind_name(TypeKind k);
std::optional<TypeKind> kind_from_name(std::string_view name);

struct RecordComponent {
  std::string name;
  std::string type;  // label of a registered type

  friend bool operator==(const RecordComponent&,
                         const RecordComponent&) = default;
};

/// A named data type. Which fields matter depends on `kind`:
///   Range            base (Integer|Decimal), lo, hi (inclusive)
///   Enum             literals
///   Record           components (declaration order is significant)
///   Array            element, length (fixed)
///   List, Set, Bag   element, occurs_min, occurs_max (nullopt = unbounded)
///   Optional         element
///   Union            variants (match order is declaration order)
struct DataType {
  std::string label;
  TypeKind kind = TypeKind::Text;

  TypeKind base = TypeKind::Integer;
  double lo = 0;
  double hi = 0;

  std::vector<std::string> literals;
  std::vector<RecordComponent> components;

  std::string element;
  std::uint32_t length = 0;
  std::uint32_t occurs_min = 0;
  std::optional<std::uint32_t> occurs_max;

  std::vector<std::string> variants;

  friend bool operator==(const DataType&, const DataType&) = default;
};

DataType make_range(std::string label, TypeKind base, double lo, double hi);
DataType make_enum(std::string label, std::vector<std::string> literals);
DataType make_record(std::string label, std::vector<RecordComponent> comps);
DataType make_array(std::string label, std::string element,
                    std::uint32_t length);
DataType make_collection(std::string label, TypeKind kind, std::string element,
                         std::uint32_t occurs_min = 0,
                         std::optional<std::uint32_t> occurs_max = {});
DataType make_optional(std::string label, std::string element);
DataType make_union(std::string label, std::vector<std::string> variants);

/// Type labels referenced by `t`, with a flag per reference telling whether
/// the reference can be "cut" when checking for finite expansion (an absent
/// optional or an empty collection stops the recursion).
std::vector<std::pair<std::string, bool>> type_references(const DataType& t);

/// Registry of named types. Construction seeds the builtins: the five
/// primitives (integer, decimal, text, boolean, date), empty_record, and
/// anyType (a union over the primitives; schemas using it validate with a
/// warning).
class TypeRegistry {
 public:
  TypeRegistry();

  /// Registers a type. Re-adding an identical definition is a no-op, so
  /// registration order never matters; a conflicting redefinition throws
  /// DuplicateLabel. References may dangle until check().
  void add(DataType t);

  bool contains(const std::string& label) const;
  const DataType* find(const std::string& label) const;
  const DataType& at(const std::string& label) const;  // throws UnknownType

  /// Registry-wide well-formedness: per-type shape rules, resolvable
  /// references, and finite expansion (every reference cycle must pass
  /// through an optional or a collection whose minimum occurrence is 0).
  Verdict check() const;

  /// All registered types, including builtins, keyed by label.
  const std::map<std::string, DataType>& types() const { return types_; }

  static bool is_builtin(const std::string& label);
  static const std::vector<std::string>& builtin_labels();

 private:
  std::map<std::string, DataType> types_;
};

/// Copies the registry, adds `t`, and re-checks the result; throws on any
/// violation. The one-step variant of add() + check() used by callers that
/// want registration to be all-or-nothing.
TypeRegistry register_type(const TypeRegistry& registry, const DataType& t);

/// Validates a value against a registered type. Violation elements are
/// value paths rooted at "$" ("$.day", "$[2].profit"). Throws UnknownType
/// if `type_label` is not registered.
Verdict check_value(const TypeRegistry& registry,
                    const std::string& type_label, const Value& value);

/// Smallest value accepted by the type: lower bounds of ranges, first enum
/// literal / union variant, empty or minimally filled collections, null
/// for optionals. Terminates for every registry that passes check().
Value witness_value(const TypeRegistry& registry,
                    const std::string& type_label);

/// True for a "YYYY-MM-DD" string naming a real calendar date (leap years
/// included); one-digit month or day is accepted.
bool is_valid_date(std::string_view text);

}  // namespace tgm
