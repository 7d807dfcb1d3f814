#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tgm/instance.hpp"
#include "tgm/supermodel.hpp"

namespace tgm {

struct RelationalColumn {
  std::string name;
  std::string type;  // registered scalar type label
  bool nullable = true;
};

struct RelationalForeignKey {
  std::vector<std::string> columns;
  std::string references;  // table name
};

struct RelationalTable {
  std::string name;
  std::vector<RelationalColumn> columns;
  std::vector<std::string> primary_key;
  std::vector<RelationalForeignKey> foreign_keys;

  const RelationalColumn* find_column(const std::string& name) const;
  bool in_primary_key(const std::string& column) const;
  bool in_foreign_key(const std::string& column) const;
};

struct RelationalSchema {
  std::vector<RelationalTable> tables;

  const RelationalTable* find_table(const std::string& name) const;
};

/// Parses the supported DDL subset: CREATE TABLE statements with column
/// types INT/INTEGER, DECIMAL(p,s), VARCHAR(n), DATE, BOOLEAN, optional
/// NOT NULL, and table-level PRIMARY KEY / FOREIGN KEY ... REFERENCES
/// clauses. Keywords are case-insensitive; "--" starts a line comment.
/// Primary key columns are implicitly NOT NULL.
/// Throws SyntaxError with line:column, UnsupportedFeature for recognized
/// but unsupported clauses (CHECK, UNIQUE, DEFAULT, ...), DanglingReference
/// for unknown key columns or referenced tables, DuplicateLabel for
/// repeated table or column names.
RelationalSchema parse_relational(const std::string& ddl);

/// A join table's primary key equals the union of its foreign key columns
/// and it holds at least two foreign keys.
bool is_join_table(const RelationalTable& t);

/// Tables become abstracts; a join table becomes an aggregation over the
/// tables it references, in foreign key order. Every other foreign key
/// becomes a function element (single-valued edge, optional when any of
/// its columns is nullable). Remaining columns become lexicals placed by
/// functions, optional when nullable outside the primary key; foreign key
/// columns never surface as properties. Throws AmbiguousJoinTable when a
/// primary key overlaps the foreign key columns without matching them.
SupermodelSchema lift_relational(const RelationalSchema& r);

/// RFC-4180 records: comma-separated fields, optional double-quoting,
/// doubled quotes inside quoted fields, embedded newlines. Returns one
/// vector per record; the caller treats the first as the header.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// Maps per-table CSV text onto the translated schema. Rows of ordinary
/// tables become nodes identified by table name and primary key values;
/// foreign key values become edges; join-table rows become hyper-edges.
/// Missing tables in `csv_by_table` contribute no rows. Throws
/// SourceIntegrityViolation (unknown header column, duplicate key,
/// dangling reference, unparsable value) with a table/row locus.
TypedGraphInstance map_relational_instance(
    const RelationalSchema& r,
    const std::map<std::string, std::string>& csv_by_table,
    const std::shared_ptr<const TypedGraphSchema>& schema);

}  // namespace tgm
