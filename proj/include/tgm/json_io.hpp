#pragma once

#include <string>

#include "json.hpp"
#include "tgm/abstraction.hpp"
#include "tgm/instance.hpp"
#include "tgm/schema.hpp"

namespace tgm {

/// All readers throw ParseError with enough context to locate the problem;
/// they check shape, not semantics (run validate_schema and friends for
/// that). All writers emit canonical form: object keys alphabetical (the
/// json library's default), types/nodes/edges/constraints sorted by label,
/// record components and edge roles in declaration order.

nlohmann::json datatype_to_json(const DataType& t);
DataType datatype_from_json(const nlohmann::json& j);

nlohmann::json multiplicity_to_json(const Multiplicity& m);  // {"min","max"}
Multiplicity multiplicity_from_json(const nlohmann::json& j);

nlohmann::json schema_to_json(const TypedGraphSchema& s);
TypedGraphSchema schema_from_json(const nlohmann::json& j);

nlohmann::json verdict_to_json(const Verdict& v);

nlohmann::json grouping_to_json(const GroupingSpec& spec);
GroupingSpec grouping_from_json(const nlohmann::json& j);

nlohmann::json fold_report_to_json(const FoldReport& r);
FoldReport fold_report_from_json(const nlohmann::json& j);

/// Instance files reference their schema by relative path or carry it
/// inline; pass `schema_ref` to emit the reference form. Nested
/// sub-instances never repeat the schema (it is fixed by the node type,
/// and the loader attaches it from there).
nlohmann::json instance_to_json(const TypedGraphInstance& g);
nlohmann::json instance_to_json(const TypedGraphInstance& g,
                                const std::string& schema_ref);
TypedGraphInstance instance_from_json(const nlohmann::json& j,
                                      const std::string& base_dir = "");

nlohmann::json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const nlohmann::json& j);

TypedGraphSchema load_schema_file(const std::string& path);
TypedGraphInstance load_instance_file(const std::string& path);

}  // namespace tgm
