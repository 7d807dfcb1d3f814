#include "tgm/constraint_expr.hpp"

#include <algorithm>
#include <cctype>

namespace tgm {

namespace {

struct Token {
  enum class Kind { Ident, Number, String, Op, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  Value number;
  std::size_t pos = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }

  Token take() {
    Token t = current_;
    advance();
    return t;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw TgmError("ConstraintParseError",
                   what + " at offset " + std::to_string(current_.pos) +
                       " in '" + text_ + "'");
  }

 private:
  void advance() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    current_ = Token{};
    current_.pos = pos_;
    if (pos_ >= text_.size()) return;

    char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_'))
        ++pos_;
      current_.kind = Token::Kind::Ident;
      current_.text = text_.substr(start, pos_ - start);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos_ + 1 < text_.size() &&
         std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
      std::size_t start = pos_;
      ++pos_;
      bool is_decimal = false;
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '.')) {
        // a '.' followed by a non-digit belongs to a path, not this number
        if (text_[pos_] == '.') {
          if (pos_ + 1 >= text_.size() ||
              !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))
            break;
          is_decimal = true;
        }
        ++pos_;
      }
      current_.kind = Token::Kind::Number;
      current_.text = text_.substr(start, pos_ - start);
      current_.number = is_decimal ? Value(std::stod(current_.text))
                                   : Value(std::stoll(current_.text));
      return;
    }
    if (c == '\'' || c == '"') {
      char quote = c;
      std::size_t start = ++pos_;
      while (pos_ < text_.size() && text_[pos_] != quote) ++pos_;
      if (pos_ >= text_.size())
        throw TgmError("ConstraintParseError",
                       "unterminated string at offset " +
                           std::to_string(start - 1) + " in '" + text_ + "'");
      current_.kind = Token::Kind::String;
      current_.text = text_.substr(start, pos_ - start);
      ++pos_;
      return;
    }
    if (c == '=' || c == '<' || c == '>' || c == '!') {
      current_.kind = Token::Kind::Op;
      current_.text = c;
      ++pos_;
      if ((c == '<' || c == '>' || c == '!') && pos_ < text_.size() &&
          text_[pos_] == '=') {
        current_.text += '=';
        ++pos_;
      }
      if (current_.text == "!")
        throw TgmError("ConstraintParseError",
                       "stray '!' at offset " + std::to_string(current_.pos) +
                           " in '" + text_ + "'");
      return;
    }
    if (c == '(' || c == ')' || c == ',' || c == '.') {
      current_.kind = Token::Kind::Punct;
      current_.text = c;
      ++pos_;
      return;
    }
    throw TgmError("ConstraintParseError",
                   std::string("unexpected character '") + c + "' at offset " +
                       std::to_string(pos_) + " in '" + text_ + "'");
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  Token current_;
};

bool is_keyword(const std::string& s) {
  return s == "or" || s == "and" || s == "count" || s == "unique" ||
         s == "xor" || s == "true" || s == "false";
}

class Parser {
 public:
  explicit Parser(const std::string& text) : lex_(text) {}

  ConstraintExpr parse() {
    ConstraintExpr e = or_expr();
    if (lex_.peek().kind != Token::Kind::End)
      lex_.fail("trailing input after expression");
    return e;
  }

 private:
  ConstraintExpr or_expr() {
    ConstraintExpr first = and_expr();
    if (!at_keyword("or")) return first;
    ConstraintExpr e;
    e.kind = ConstraintExpr::Kind::Or;
    e.children.push_back(std::move(first));
    while (at_keyword("or")) {
      lex_.take();
      e.children.push_back(and_expr());
    }
    return e;
  }

  ConstraintExpr and_expr() {
    ConstraintExpr first = cmp();
    if (!at_keyword("and")) return first;
    ConstraintExpr e;
    e.kind = ConstraintExpr::Kind::And;
    e.children.push_back(std::move(first));
    while (at_keyword("and")) {
      lex_.take();
      e.children.push_back(cmp());
    }
    return e;
  }

  ConstraintExpr cmp() {
    ConstraintExpr lhs = term();
    if (lex_.peek().kind != Token::Kind::Op) return lhs;
    std::string op = lex_.take().text;
    ConstraintExpr e;
    e.kind = ConstraintExpr::Kind::Cmp;
    if (op == "=") e.op = CmpOp::Eq;
    else if (op == "!=") e.op = CmpOp::Ne;
    else if (op == "<") e.op = CmpOp::Lt;
    else if (op == "<=") e.op = CmpOp::Le;
    else if (op == ">") e.op = CmpOp::Gt;
    else if (op == ">=") e.op = CmpOp::Ge;
    else lex_.fail("unknown operator '" + op + "'");
    e.children.push_back(std::move(lhs));
    e.children.push_back(term());
    return e;
  }

  ConstraintExpr term() {
    const Token& t = lex_.peek();
    if (t.kind == Token::Kind::Number) {
      ConstraintExpr e;
      e.kind = ConstraintExpr::Kind::Literal;
      e.literal = lex_.take().number;
      return e;
    }
    if (t.kind == Token::Kind::String) {
      ConstraintExpr e;
      e.kind = ConstraintExpr::Kind::Literal;
      e.literal = lex_.take().text;
      return e;
    }
    if (t.kind != Token::Kind::Ident) lex_.fail("expected a term");

    if (t.text == "true" || t.text == "false") {
      ConstraintExpr e;
      e.kind = ConstraintExpr::Kind::Literal;
      e.literal = lex_.take().text == "true";
      return e;
    }
    if (t.text == "count") {
      lex_.take();
      expect_punct("(");
      ConstraintExpr e;
      e.kind = ConstraintExpr::Kind::Count;
      e.edge_label = ident("edge label");
      expect_punct(")");
      return e;
    }
    if (t.text == "unique") {
      lex_.take();
      expect_punct("(");
      ConstraintExpr e;
      e.kind = ConstraintExpr::Kind::Unique;
      e.paths.push_back(path());
      expect_punct(")");
      return e;
    }
    if (t.text == "xor") {
      lex_.take();
      expect_punct("(");
      ConstraintExpr e;
      e.kind = ConstraintExpr::Kind::Xor;
      e.paths.push_back(path());
      while (at_punct(",")) {
        lex_.take();
        e.paths.push_back(path());
      }
      expect_punct(")");
      return e;
    }
    if (t.text == "or" || t.text == "and") lex_.fail("expected a term");

    ConstraintExpr e;
    e.kind = ConstraintExpr::Kind::Path;
    e.path = path();
    return e;
  }

  std::vector<std::string> path() {
    std::vector<std::string> segments;
    segments.push_back(ident("path segment"));
    while (at_punct(".")) {
      lex_.take();
      segments.push_back(ident("path segment"));
    }
    return segments;
  }

  std::string ident(const char* what) {
    if (lex_.peek().kind != Token::Kind::Ident || is_keyword(lex_.peek().text))
      lex_.fail(std::string("expected ") + what);
    return lex_.take().text;
  }

  bool at_keyword(const char* kw) const {
    return lex_.peek().kind == Token::Kind::Ident && lex_.peek().text == kw;
  }
  bool at_punct(const char* p) const {
    return lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == p;
  }
  void expect_punct(const char* p) {
    if (!at_punct(p)) lex_.fail(std::string("expected '") + p + "'");
    lex_.take();
  }

  Lexer lex_;
};

}  // namespace

ConstraintExpr parse_constraint_expression(const std::string& text) {
  return Parser(text).parse();
}

bool uses_unique(const ConstraintExpr& e) {
  if (e.kind == ConstraintExpr::Kind::Unique) return true;
  return std::any_of(e.children.begin(), e.children.end(),
                     [](const ConstraintExpr& c) { return uses_unique(c); });
}

namespace {

enum class Category { Boolean, Number, Text, Opaque };

const char* category_name(Category c) {
  switch (c) {
    case Category::Boolean: return "boolean";
    case Category::Number: return "number";
    case Category::Text: return "text";
    case Category::Opaque: return "structured";
  }
  return "?";
}

Category category_of(const TypeRegistry& reg, const DataType& t) {
  switch (t.kind) {
    case TypeKind::Integer:
    case TypeKind::Decimal:
    case TypeKind::Range:
      return Category::Number;
    case TypeKind::Text:
    case TypeKind::Date:
    case TypeKind::Enum:
      return Category::Text;
    case TypeKind::Boolean:
      return Category::Boolean;
    case TypeKind::Optional: {
      const DataType* inner = reg.find(t.element);
      return inner ? category_of(reg, *inner) : Category::Opaque;
    }
    default:
      return Category::Opaque;
  }
}

std::string path_text(const std::vector<std::string>& path) {
  std::string s;
  for (const auto& seg : path) s += (s.empty() ? "" : ".") + seg;
  return s;
}

/// Follows a property path through record components, looking through
/// optionals. Returns nullptr and fills `error` when a segment is missing.
const DataType* resolve_path(const TypeRegistry& reg,
                             const std::string& record_label,
                             const std::vector<std::string>& path,
                             std::string& error) {
  const DataType* current = reg.find(record_label);
  if (!current) {
    error = "property record '" + record_label + "' is not registered";
    return nullptr;
  }
  for (const auto& seg : path) {
    while (current && current->kind == TypeKind::Optional)
      current = reg.find(current->element);
    if (!current || current->kind != TypeKind::Record) {
      error = "path '" + path_text(path) + "' leaves the property record at '" +
              seg + "'";
      return nullptr;
    }
    auto it = std::find_if(
        current->components.begin(), current->components.end(),
        [&](const RecordComponent& c) { return c.name == seg; });
    if (it == current->components.end()) {
      error = "path '" + path_text(path) + "' has no component '" + seg + "'";
      return nullptr;
    }
    current = reg.find(it->type);
    if (!current) {
      error = "path '" + path_text(path) + "' hits unregistered type '" +
              it->type + "'";
      return nullptr;
    }
  }
  return current;
}

struct CheckEnv {
  const TypedGraphSchema* schema;
  const TypeRegistry* reg;
  std::string property_record;
  std::string scope;
  bool scope_is_node;
};

Category typecheck(const ConstraintExpr& e, const CheckEnv& env, Verdict& out);

Category typecheck_path(const std::vector<std::string>& path,
                        const CheckEnv& env, Verdict& out) {
  std::string error;
  const DataType* t = resolve_path(*env.reg, env.property_record, path, error);
  if (!t) {
    out.add("ConstraintTypeError", env.scope, error);
    return Category::Opaque;
  }
  return category_of(*env.reg, *t);
}

Category typecheck(const ConstraintExpr& e, const CheckEnv& env,
                   Verdict& out) {
  using Kind = ConstraintExpr::Kind;
  switch (e.kind) {
    case Kind::Literal:
      if (e.literal.is_boolean()) return Category::Boolean;
      if (e.literal.is_number()) return Category::Number;
      return Category::Text;
    case Kind::Path:
      return typecheck_path(e.path, env, out);
    case Kind::Count: {
      if (!env.scope_is_node) {
        out.add("ConstraintTypeError", env.scope,
                "count() needs a node-type scope");
        return Category::Number;
      }
      auto touching = env.schema->edges_touching(env.scope);
      bool known = std::any_of(
          touching.begin(), touching.end(),
          [&](const EdgeType* et) { return et->label == e.edge_label; });
      if (!known)
        out.add("ConstraintTypeError", env.scope,
                "count(" + e.edge_label + "): no such edge type touches '" +
                    env.scope + "'");
      return Category::Number;
    }
    case Kind::Unique: {
      Category c = typecheck_path(e.paths[0], env, out);
      if (c == Category::Opaque)
        out.add("ConstraintTypeError", env.scope,
                "unique(" + path_text(e.paths[0]) +
                    ") needs a comparable property");
      return Category::Boolean;
    }
    case Kind::Xor:
      for (const auto& p : e.paths) typecheck_path(p, env, out);
      return Category::Boolean;
    case Kind::Cmp: {
      Category l = typecheck(e.children[0], env, out);
      Category r = typecheck(e.children[1], env, out);
      if (l != r)
        out.add("ConstraintTypeError", env.scope,
                std::string("comparison mixes ") + category_name(l) + " and " +
                    category_name(r));
      else if (l == Category::Opaque)
        out.add("ConstraintTypeError", env.scope,
                "comparison over structured values");
      else if (l == Category::Boolean &&
               (e.op != CmpOp::Eq && e.op != CmpOp::Ne))
        out.add("ConstraintTypeError", env.scope,
                "ordering comparison over booleans");
      return Category::Boolean;
    }
    case Kind::Or:
    case Kind::And: {
      for (const auto& c : e.children)
        if (typecheck(c, env, out) != Category::Boolean)
          out.add("ConstraintTypeError", env.scope,
                  std::string(e.kind == Kind::Or ? "or" : "and") +
                      " operand is not boolean");
      return Category::Boolean;
    }
  }
  return Category::Opaque;
}

}  // namespace

Verdict check_constraint(const TypedGraphSchema& s, const Constraint& c) {
  Verdict out;
  std::string property_record;
  bool is_node = false;
  if (const NodeType* nt = s.find_node(c.scope)) {
    property_record = nt->property_type;
    is_node = true;
  } else if (const EdgeType* et = s.find_edge(c.scope)) {
    property_record = et->property_type;
  } else {
    out.add("UnknownScope", c.label,
            "scope '" + c.scope + "' names no node or edge type");
    out.finalize();
    return out;
  }

  ConstraintExpr expr;
  try {
    expr = parse_constraint_expression(c.expression);
  } catch (const TgmError& e) {
    out.add("ConstraintParseError", c.label, e.what());
    out.finalize();
    return out;
  }

  CheckEnv env{&s, &s.registry, property_record, c.scope, is_node};
  Verdict types;
  Category top = typecheck(expr, env, types);
  for (const auto& v : types.violations())
    out.add(v.rule, c.label, v.message);
  if (types.ok() && top != Category::Boolean)
    out.add("ConstraintTypeError", c.label,
            "expression is not boolean-valued");
  out.finalize();
  return out;
}

std::optional<Value> lookup_path(const Value& properties,
                                 const std::vector<std::string>& path) {
  const Value* current = &properties;
  for (const auto& seg : path) {
    if (!current->is_object()) return std::nullopt;
    auto it = current->find(seg);
    if (it == current->end()) return std::nullopt;
    current = &*it;
  }
  if (current->is_null()) return std::nullopt;
  return *current;
}

namespace {

[[noreturn]] void eval_fail(const std::string& what) {
  throw TgmError("EvaluationError", what);
}

Value eval_operand(const ConstraintExpr& e, const ConstraintContext& ctx) {
  using Kind = ConstraintExpr::Kind;
  switch (e.kind) {
    case Kind::Literal:
      return e.literal;
    case Kind::Path: {
      auto v = lookup_path(*ctx.properties, e.path);
      if (!v) eval_fail("path '" + path_text(e.path) + "' has no value");
      return *v;
    }
    case Kind::Count:
      if (!ctx.count_incident)
        eval_fail("count() is not available in this scope");
      return ctx.count_incident(e.edge_label);
    default:
      eval_fail("operand is not a value");
  }
}

bool truthy(const ConstraintExpr& e, const ConstraintContext& ctx) {
  using Kind = ConstraintExpr::Kind;
  if (e.kind == Kind::Path) {
    auto v = lookup_path(*ctx.properties, e.path);
    if (!v) return false;  // absent reads as false
    if (!v->is_boolean())
      eval_fail("path '" + path_text(e.path) + "' is not boolean");
    return v->get<bool>();
  }
  if (e.kind == Kind::Literal) {
    if (!e.literal.is_boolean()) eval_fail("literal is not boolean");
    return e.literal.get<bool>();
  }
  return evaluate_expression(e, ctx);
}

int compare_values(const Value& a, const Value& b) {
  if (a.is_number() && b.is_number()) {
    double x = a.get<double>(), y = b.get<double>();
    return x < y ? -1 : x > y ? 1 : 0;
  }
  if (a.is_string() && b.is_string()) {
    const auto& x = a.get_ref<const std::string&>();
    const auto& y = b.get_ref<const std::string&>();
    return x < y ? -1 : x > y ? 1 : 0;
  }
  eval_fail(std::string("cannot order ") + a.type_name() + " against " +
            b.type_name());
}

}  // namespace

bool evaluate_expression(const ConstraintExpr& e,
                         const ConstraintContext& ctx) {
  using Kind = ConstraintExpr::Kind;
  switch (e.kind) {
    case Kind::Or:
      return std::any_of(
          e.children.begin(), e.children.end(),
          [&](const ConstraintExpr& c) { return truthy(c, ctx); });
    case Kind::And:
      return std::all_of(
          e.children.begin(), e.children.end(),
          [&](const ConstraintExpr& c) { return truthy(c, ctx); });
    case Kind::Cmp: {
      Value l = eval_operand(e.children[0], ctx);
      Value r = eval_operand(e.children[1], ctx);
      switch (e.op) {
        case CmpOp::Eq: return l == r;
        case CmpOp::Ne: return l != r;
        case CmpOp::Lt: return compare_values(l, r) < 0;
        case CmpOp::Le: return compare_values(l, r) <= 0;
        case CmpOp::Gt: return compare_values(l, r) > 0;
        case CmpOp::Ge: return compare_values(l, r) >= 0;
      }
      return false;
    }
    case Kind::Xor: {
      int present = 0;
      if (e.paths.size() == 1) {
        auto v = lookup_path(*ctx.properties, e.paths[0]);
        if (v && v->is_array()) {
          for (const auto& el : *v)
            if (!el.is_null()) ++present;
          return present == 1;
        }
      }
      for (const auto& p : e.paths) {
        auto v = lookup_path(*ctx.properties, p);
        if (!v) continue;
        if (v->is_boolean() && !v->get<bool>()) continue;
        ++present;
      }
      return present == 1;
    }
    case Kind::Unique: {
      if (!ctx.scope_values)
        eval_fail("unique() is not available in this scope");
      auto mine = lookup_path(*ctx.properties, e.paths[0]);
      if (!mine) return true;  // nothing to collide with
      std::vector<Value> all = ctx.scope_values(e.paths[0]);
      int hits = 0;
      for (const auto& v : all)
        if (v == *mine) ++hits;
      return hits <= 1;
    }
    case Kind::Path:
    case Kind::Literal:
      return truthy(e, ctx);
    case Kind::Count:
      eval_fail("count() is not boolean-valued");
  }
  return false;
}

}  // namespace tgm
