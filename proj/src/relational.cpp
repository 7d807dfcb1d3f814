#include "tgm/relational.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace tgm {

namespace {

struct Token {
  std::string text;
  std::string upper;
  int line = 0;
  int column = 0;
};

[[noreturn]] void syntax_error(const Token& at, const std::string& what) {
  throw TgmError("SyntaxError", std::to_string(at.line) + ":" +
                                    std::to_string(at.column) + ": " + what);
}

std::vector<Token> tokenize_ddl(const std::string& text) {
  std::vector<Token> out;
  int line = 1, column = 1;
  std::size_t i = 0;
  auto advance = [&](char c) {
    if (c == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
      while (i < text.size() && text[i] != '\n') advance(text[i++]);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(c);
      ++i;
      continue;
    }
    Token t;
    t.line = line;
    t.column = column;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[i])) ||
              text[i] == '_')) {
        t.text += text[i];
        advance(text[i++]);
      }
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[i]))) {
        t.text += text[i];
        advance(text[i++]);
      }
    } else if (c == '(' || c == ')' || c == ',' || c == ';') {
      t.text = c;
      advance(c);
      ++i;
    } else {
      t.text = c;
      syntax_error(t, std::string("unexpected character '") + c + "'");
    }
    t.upper = t.text;
    std::transform(t.upper.begin(), t.upper.end(), t.upper.begin(),
                   [](unsigned char u) { return std::toupper(u); });
    out.push_back(std::move(t));
  }
  Token eof;
  eof.line = line;
  eof.column = column;
  eof.upper = "<EOF>";
  eof.text = "<end of input>";
  out.push_back(std::move(eof));
  return out;
}

class DdlParser {
 public:
  explicit DdlParser(const std::string& text) : tokens_(tokenize_ddl(text)) {}

  RelationalSchema parse() {
    RelationalSchema schema;
    while (peek().upper != "<EOF>") {
      expect("CREATE");
      expect("TABLE");
      schema.tables.push_back(parse_table());
    }
    resolve(schema);
    return schema;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& take() { return tokens_[pos_++]; }

  bool accept(const std::string& upper) {
    if (peek().upper != upper) return false;
    ++pos_;
    return true;
  }

  const Token& expect(const std::string& upper) {
    if (peek().upper != upper)
      syntax_error(peek(), "expected " + upper + ", got '" + peek().text + "'");
    return take();
  }

  std::string identifier(const std::string& what) {
    const Token& t = peek();
    if (t.text.empty() ||
        !(std::isalpha(static_cast<unsigned char>(t.text[0])) ||
          t.text[0] == '_'))
      syntax_error(t, "expected " + what + ", got '" + t.text + "'");
    return take().text;
  }

  int integer(const std::string& what) {
    const Token& t = peek();
    if (t.text.empty() || !std::isdigit(static_cast<unsigned char>(t.text[0])))
      syntax_error(t, "expected " + what + ", got '" + t.text + "'");
    return std::stoi(take().text);
  }

  std::vector<std::string> column_list() {
    expect("(");
    std::vector<std::string> cols;
    cols.push_back(identifier("column name"));
    while (accept(",")) cols.push_back(identifier("column name"));
    expect(")");
    return cols;
  }

  RelationalTable parse_table() {
    RelationalTable table;
    table.name = identifier("table name");
    expect("(");
    bool more = true;
    while (more) {
      const Token& t = peek();
      if (t.upper == "PRIMARY") {
        take();
        expect("KEY");
        if (!table.primary_key.empty())
          syntax_error(t, "table '" + table.name +
                              "' declares two primary keys");
        table.primary_key = column_list();
      } else if (t.upper == "FOREIGN") {
        take();
        expect("KEY");
        RelationalForeignKey fk;
        fk.columns = column_list();
        expect("REFERENCES");
        fk.references = identifier("referenced table");
        table.foreign_keys.push_back(std::move(fk));
      } else if (t.upper == "CHECK" || t.upper == "UNIQUE" ||
                 t.upper == "CONSTRAINT" || t.upper == "INDEX" ||
                 t.upper == "KEY") {
        throw TgmError("UnsupportedFeature",
                       std::to_string(t.line) + ":" + std::to_string(t.column) +
                           ": " + t.upper + " clauses are not supported");
      } else {
        table.columns.push_back(parse_column());
      }
      more = accept(",");
    }
    expect(")");
    expect(";");
    for (const auto& c : table.primary_key) {
      auto it = std::find_if(table.columns.begin(), table.columns.end(),
                             [&](const RelationalColumn& col) {
                               return col.name == c;
                             });
      if (it != table.columns.end()) it->nullable = false;
    }
    return table;
  }

  RelationalColumn parse_column() {
    RelationalColumn col;
    col.name = identifier("column name");
    const Token& t = peek();
    if (t.upper == "INT" || t.upper == "INTEGER") {
      take();
      col.type = "integer";
    } else if (t.upper == "DECIMAL") {
      take();
      expect("(");
      integer("precision");
      expect(",");
      integer("scale");
      expect(")");
      col.type = "decimal";
    } else if (t.upper == "VARCHAR") {
      take();
      expect("(");
      integer("length");
      expect(")");
      col.type = "text";
    } else if (t.upper == "DATE") {
      take();
      col.type = "date";
    } else if (t.upper == "BOOLEAN") {
      take();
      col.type = "boolean";
    } else {
      syntax_error(t, "unknown column type '" + t.text + "'");
    }
    while (true) {
      const Token& mod = peek();
      if (mod.upper == "NOT") {
        take();
        expect("NULL");
        col.nullable = false;
      } else if (mod.upper == "NULL") {
        take();
        col.nullable = true;
      } else if (mod.upper == "DEFAULT" || mod.upper == "CHECK" ||
                 mod.upper == "UNIQUE" || mod.upper == "AUTO_INCREMENT") {
        throw TgmError("UnsupportedFeature",
                       std::to_string(mod.line) + ":" +
                           std::to_string(mod.column) + ": " + mod.upper +
                           " modifiers are not supported");
      } else {
        break;
      }
    }
    return col;
  }

  void resolve(const RelationalSchema& schema) {
    std::set<std::string> names;
    for (const auto& t : schema.tables)
      if (!names.insert(t.name).second)
        throw TgmError("DuplicateLabel",
                       "table '" + t.name + "' is declared twice");
    for (const auto& t : schema.tables) {
      std::set<std::string> cols;
      for (const auto& c : t.columns)
        if (!cols.insert(c.name).second)
          throw TgmError("DuplicateLabel", "table '" + t.name +
                                               "' declares column '" + c.name +
                                               "' twice");
      for (const auto& c : t.primary_key)
        if (!cols.count(c))
          throw TgmError("DanglingReference",
                         "primary key of '" + t.name +
                             "' names unknown column '" + c + "'");
      for (const auto& fk : t.foreign_keys) {
        for (const auto& c : fk.columns)
          if (!cols.count(c))
            throw TgmError("DanglingReference",
                           "foreign key of '" + t.name +
                               "' names unknown column '" + c + "'");
        if (!schema.find_table(fk.references))
          throw TgmError("DanglingReference",
                         "foreign key of '" + t.name +
                             "' references unknown table '" + fk.references +
                             "'");
      }
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

std::string fk_edge_label(const RelationalTable& t,
                          const RelationalForeignKey& fk) {
  std::string label = t.name;
  for (const auto& c : fk.columns) label += "_" + c;
  return label;
}

}  // namespace

const RelationalColumn* RelationalTable::find_column(
    const std::string& column) const {
  for (const auto& c : columns)
    if (c.name == column) return &c;
  return nullptr;
}

bool RelationalTable::in_primary_key(const std::string& column) const {
  return std::find(primary_key.begin(), primary_key.end(), column) !=
         primary_key.end();
}

bool RelationalTable::in_foreign_key(const std::string& column) const {
  for (const auto& fk : foreign_keys)
    if (std::find(fk.columns.begin(), fk.columns.end(), column) !=
        fk.columns.end())
      return true;
  return false;
}

const RelationalTable* RelationalSchema::find_table(
    const std::string& name) const {
  for (const auto& t : tables)
    if (t.name == name) return &t;
  return nullptr;
}

RelationalSchema parse_relational(const std::string& ddl) {
  return DdlParser(ddl).parse();
}

bool is_join_table(const RelationalTable& t) {
  if (t.foreign_keys.size() < 2 || t.primary_key.empty()) return false;
  std::set<std::string> pk(t.primary_key.begin(), t.primary_key.end());
  std::set<std::string> fk;
  for (const auto& f : t.foreign_keys)
    fk.insert(f.columns.begin(), f.columns.end());
  return pk == fk;
}

SupermodelSchema lift_relational(const RelationalSchema& r) {
  SupermodelSchema sm;
  sm.source_model = "relational";

  for (const auto& t : r.tables) {
    if (is_join_table(t)) continue;
    std::set<std::string> pk(t.primary_key.begin(), t.primary_key.end());
    std::set<std::string> fk;
    for (const auto& f : t.foreign_keys)
      fk.insert(f.columns.begin(), f.columns.end());
    std::set<std::string> overlap;
    std::set_intersection(pk.begin(), pk.end(), fk.begin(), fk.end(),
                          std::inserter(overlap, overlap.begin()));
    if (!overlap.empty() && pk != fk)
      throw TgmError("AmbiguousJoinTable",
                     "primary key of '" + t.name +
                         "' partially overlaps its foreign keys; split the "
                         "table or align the key");
    MetaElement e;
    e.id = t.name;
    e.kind = MetaKind::Abstract;
    e.label = t.name;
    sm.elements.push_back(std::move(e));
  }

  for (const auto& t : r.tables) {
    if (!is_join_table(t)) continue;
    MetaElement e;
    e.id = t.name;
    e.kind = MetaKind::Aggregation;
    e.label = t.name;
    for (const auto& fk : t.foreign_keys) {
      if (is_join_table(*r.find_table(fk.references)))
        throw TgmError("AmbiguousJoinTable",
                       "join table '" + t.name +
                           "' references another join table '" +
                           fk.references + "'");
      e.members.push_back(
          {fk.references, {0, Multiplicity::kUnbounded}});
    }
    sm.elements.push_back(std::move(e));
  }

  for (const auto& t : r.tables) {
    if (is_join_table(t)) continue;
    for (const auto& fk : t.foreign_keys) {
      bool optional = false;
      for (const auto& c : fk.columns)
        if (t.find_column(c)->nullable) optional = true;
      MetaElement e;
      e.id = "fk#" + fk_edge_label(t, fk);
      e.kind = MetaKind::Function;
      e.label = fk_edge_label(t, fk);
      e.source = t.name;
      e.target = fk.references;
      e.optional = optional;
      sm.elements.push_back(std::move(e));
    }
  }

  for (const auto& t : r.tables) {
    for (const auto& col : t.columns) {
      if (t.in_foreign_key(col.name)) continue;
      MetaElement lex;
      lex.id = t.name + "." + col.name;
      lex.kind = MetaKind::Lexical;
      lex.label = col.name;
      lex.datatype = col.type;
      sm.elements.push_back(std::move(lex));
      MetaElement fn;
      fn.id = t.name + "." + col.name + "#place";
      fn.kind = MetaKind::Function;
      fn.label = col.name;
      fn.source = t.name;
      fn.target = t.name + "." + col.name;
      fn.optional = col.nullable && !t.in_primary_key(col.name);
      sm.elements.push_back(std::move(fn));
    }
  }
  return sm;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  std::size_t i = 0;
  auto end_field = [&]() {
    record.push_back(std::move(field));
    field.clear();
  };
  auto end_record = [&]() {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };
  while (i < text.size()) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          i += 2;
        } else {
          quoted = false;
          ++i;
        }
      } else {
        field += c;
        ++i;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        ++i;
        break;
      case ',':
        end_field();
        any = true;
        ++i;
        break;
      case '\r':
        ++i;
        break;
      case '\n':
        if (any || !field.empty() || !record.empty()) end_record();
        any = false;
        ++i;
        break;
      default:
        field += c;
        any = true;
        ++i;
        break;
    }
  }
  if (quoted)
    throw TgmError("SyntaxError", "unterminated quoted CSV field");
  if (any || !field.empty() || !record.empty()) end_record();
  return records;
}

namespace {

struct TableRows {
  const RelationalTable* table = nullptr;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // without the header
};

[[noreturn]] void integrity(const std::string& locus,
                            const std::string& what) {
  throw TgmError("SourceIntegrityViolation", locus + ": " + what);
}

Value convert_cell(const RelationalColumn& col, const std::string& raw,
                   const std::string& locus) {
  if (raw.empty()) {
    if (col.nullable) return Value();
    if (col.type == "text") return "";
    integrity(locus, "column '" + col.name + "' must not be empty");
  }
  try {
    std::size_t used = 0;
    if (col.type == "integer") {
      long long v = std::stoll(raw, &used);
      if (used != raw.size()) throw std::invalid_argument(raw);
      return v;
    }
    if (col.type == "decimal") {
      double v = std::stod(raw, &used);
      if (used != raw.size()) throw std::invalid_argument(raw);
      return v;
    }
  } catch (const std::exception&) {
    integrity(locus, "column '" + col.name + "' holds unparsable value '" +
                         raw + "'");
  }
  if (col.type == "boolean") {
    if (raw == "true" || raw == "1") return true;
    if (raw == "false" || raw == "0") return false;
    integrity(locus, "column '" + col.name + "' holds non-boolean '" + raw +
                         "'");
  }
  return raw;  // text, date
}

std::string cell(const TableRows& data, const std::vector<std::string>& row,
                 const std::string& column, const std::string& locus) {
  for (std::size_t i = 0; i < data.header.size(); ++i)
    if (data.header[i] == column) return i < row.size() ? row[i] : "";
  integrity(locus, "column '" + column + "' is missing from the CSV header");
}

std::string key_of(const TableRows& data, const std::vector<std::string>& row,
                   const std::vector<std::string>& columns,
                   const std::string& locus) {
  std::string key;
  for (const auto& c : columns) {
    std::string v = cell(data, row, c, locus);
    if (v.empty()) return "";
    if (!key.empty()) key += "|";
    key += v;
  }
  return key;
}

std::string node_id(const std::string& table, const std::string& key) {
  return table + ":" + key;
}

}  // namespace

TypedGraphInstance map_relational_instance(
    const RelationalSchema& r,
    const std::map<std::string, std::string>& csv_by_table,
    const std::shared_ptr<const TypedGraphSchema>& schema) {
  TypedGraphInstance g;
  g.schema = schema;

  std::map<std::string, TableRows> data;
  for (const auto& t : r.tables) {
    TableRows rows;
    rows.table = &t;
    auto it = csv_by_table.find(t.name);
    if (it != csv_by_table.end()) {
      auto records = parse_csv(it->second);
      if (!records.empty()) {
        rows.header = records.front();
        for (const auto& h : rows.header)
          if (!t.find_column(h))
            integrity("table '" + t.name + "'",
                      "CSV header names unknown column '" + h + "'");
        rows.rows.assign(records.begin() + 1, records.end());
      }
    }
    data.emplace(t.name, std::move(rows));
  }
  for (const auto& [name, rows] : csv_by_table) {
    (void)rows;
    if (!r.find_table(name))
      integrity("table '" + name + "'", "no such table in the schema");
  }

  auto row_key = [&](const TableRows& d, const std::vector<std::string>& row,
                     std::size_t index, const std::string& locus) {
    if (d.table->primary_key.empty()) return std::to_string(index + 1);
    std::string key = key_of(d, row, d.table->primary_key, locus);
    if (key.empty()) integrity(locus, "primary key value is missing");
    return key;
  };

  // nodes first, so edge endpoints can be checked as they appear
  for (const auto& t : r.tables) {
    if (is_join_table(t)) continue;
    const TableRows& d = data.at(t.name);
    for (std::size_t i = 0; i < d.rows.size(); ++i) {
      std::string locus = "table '" + t.name + "' row " + std::to_string(i + 1);
      std::string key = row_key(d, d.rows[i], i, locus);
      std::string id = node_id(t.name, key);
      if (g.nodes.count(id)) integrity(locus, "duplicate key '" + key + "'");
      Value props = Value::object();
      for (const auto& col : t.columns) {
        if (t.in_foreign_key(col.name)) continue;
        props[col.name] = convert_cell(col, cell(d, d.rows[i], col.name, locus),
                                       locus);
      }
      g.add_node(id, t.name, std::move(props));
    }
  }

  auto require_node = [&](const std::string& table, const std::string& key,
                          const std::string& locus) {
    std::string id = node_id(table, key);
    if (!g.nodes.count(id))
      integrity(locus, "references missing " + table + " row '" + key + "'");
    return id;
  };

  for (const auto& t : r.tables) {
    const TableRows& d = data.at(t.name);
    if (is_join_table(t)) {
      for (std::size_t i = 0; i < d.rows.size(); ++i) {
        std::string locus =
            "table '" + t.name + "' row " + std::to_string(i + 1);
        InstanceEdge e;
        e.id = t.name + ":" + std::to_string(i + 1);
        e.type = t.name;
        for (std::size_t k = 0; k < t.foreign_keys.size(); ++k) {
          const auto& fk = t.foreign_keys[k];
          std::string key = key_of(d, d.rows[i], fk.columns, locus);
          if (key.empty()) integrity(locus, "join key value is missing");
          std::string endpoint = require_node(fk.references, key, locus);
          if (k == 0)
            e.tails.push_back(endpoint);
          else
            e.heads.push_back(endpoint);
        }
        e.properties = Value::object();
        for (const auto& col : t.columns) {
          if (t.in_foreign_key(col.name)) continue;
          e.properties[col.name] =
              convert_cell(col, cell(d, d.rows[i], col.name, locus), locus);
        }
        g.edges.emplace(e.id, std::move(e));
      }
      continue;
    }
    for (std::size_t i = 0; i < d.rows.size(); ++i) {
      std::string locus = "table '" + t.name + "' row " + std::to_string(i + 1);
      std::string source = node_id(t.name, row_key(d, d.rows[i], i, locus));
      for (const auto& fk : t.foreign_keys) {
        std::string key = key_of(d, d.rows[i], fk.columns, locus);
        if (key.empty()) {
          bool nullable = true;
          for (const auto& c : fk.columns)
            if (!t.find_column(c)->nullable) nullable = false;
          if (nullable) continue;
          integrity(locus, "foreign key to '" + fk.references +
                               "' must not be empty");
        }
        std::string target = require_node(fk.references, key, locus);
        std::string label = fk_edge_label(t, fk);
        g.add_edge(source + "#" + label, label, {source}, {target});
      }
    }
  }
  return g;
}

}  // namespace tgm
