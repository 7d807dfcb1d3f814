#include "tgm/er.hpp"

#include <cctype>
#include <set>

namespace tgm {

namespace {

struct ErToken {
  std::string text;
  int line = 0;
  int column = 0;
};

[[noreturn]] void syntax_error(const ErToken& at, const std::string& what) {
  throw TgmError("SyntaxError", std::to_string(at.line) + ":" +
                                    std::to_string(at.column) + ": " + what);
}

std::vector<ErToken> tokenize_er(const std::string& text) {
  std::vector<ErToken> out;
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
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(text[i++]);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(c);
      ++i;
      continue;
    }
    ErToken t;
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
    } else if (std::string("{}(),:<*").find(c) != std::string::npos) {
      t.text = c;
      advance(c);
      ++i;
    } else {
      t.text = c;
      syntax_error(t, std::string("unexpected character '") + c + "'");
    }
    out.push_back(std::move(t));
  }
  ErToken eof;
  eof.line = line;
  eof.column = column;
  eof.text = "<end of input>";
  out.push_back(std::move(eof));
  return out;
}

std::string canonical_type(const ErToken& t) {
  const std::string& n = t.text;
  if (n == "int" || n == "integer") return "integer";
  if (n == "decimal" || n == "float") return "decimal";
  if (n == "string" || n == "text") return "text";
  if (n == "bool" || n == "boolean") return "boolean";
  if (n == "date") return "date";
  syntax_error(t, "unknown attribute type '" + n + "'");
}

class ErParser {
 public:
  explicit ErParser(const std::string& text) : tokens_(tokenize_er(text)) {}

  ErSchema parse() {
    ErSchema schema;
    while (!at_end()) {
      const ErToken& t = peek();
      if (t.text == "entity") {
        take();
        schema.entities.push_back(parse_entity());
      } else if (t.text == "rel") {
        take();
        schema.relationships.push_back(parse_relationship());
      } else if (t.text == "isa") {
        take();
        ErIsa isa;
        isa.sub = identifier("subtype name");
        expect("<");
        isa.super = identifier("supertype name");
        schema.isa_links.push_back(std::move(isa));
      } else if (t.text == "weak") {
        throw TgmError("UnsupportedFeature",
                       std::to_string(t.line) + ":" + std::to_string(t.column) +
                           ": weak entities are not supported");
      } else {
        syntax_error(t, "expected entity, rel, or isa, got '" + t.text + "'");
      }
    }
    resolve(schema);
    return schema;
  }

 private:
  bool at_end() const { return pos_ + 1 >= tokens_.size(); }
  const ErToken& peek() const { return tokens_[pos_]; }
  const ErToken& take() { return tokens_[pos_++]; }

  void expect(const std::string& text) {
    if (peek().text != text)
      syntax_error(peek(),
                   "expected '" + text + "', got '" + peek().text + "'");
    take();
  }

  bool is_identifier(const ErToken& t) const {
    return !t.text.empty() &&
           (std::isalpha(static_cast<unsigned char>(t.text[0])) ||
            t.text[0] == '_');
  }

  std::string identifier(const std::string& what) {
    if (!is_identifier(peek()))
      syntax_error(peek(), "expected " + what + ", got '" + peek().text + "'");
    return take().text;
  }

  std::vector<ErAttribute> attribute_block(const std::string& owner) {
    expect("{");
    std::vector<ErAttribute> attrs;
    std::set<std::string> names;
    while (peek().text != "}") {
      ErAttribute a;
      a.name = identifier("attribute name");
      expect(":");
      a.type = canonical_type(take());
      if (peek().text == "key") {
        take();
        a.key = true;
      }
      if (!names.insert(a.name).second)
        throw TgmError("DuplicateLabel", "attribute '" + a.name + "' of '" +
                                             owner + "' is declared twice");
      attrs.push_back(std::move(a));
    }
    expect("}");
    return attrs;
  }

  ErEntity parse_entity() {
    ErEntity e;
    e.name = identifier("entity name");
    e.attributes = attribute_block(e.name);
    return e;
  }

  Multiplicity parse_card() {
    expect("(");
    const ErToken& min_token = peek();
    if (min_token.text.empty() ||
        !std::isdigit(static_cast<unsigned char>(min_token.text[0])))
      syntax_error(min_token, "expected a minimum, got '" + min_token.text +
                                  "'");
    std::uint32_t min = static_cast<std::uint32_t>(std::stoul(take().text));
    expect(",");
    const ErToken& max_token = take();
    std::uint32_t max;
    if (max_token.text == "*") {
      max = Multiplicity::kUnbounded;
    } else if (!max_token.text.empty() &&
               std::isdigit(static_cast<unsigned char>(max_token.text[0]))) {
      max = static_cast<std::uint32_t>(std::stoul(max_token.text));
    } else {
      syntax_error(max_token,
                   "expected a maximum or *, got '" + max_token.text + "'");
    }
    expect(")");
    return {min, max};
  }

  ErRelationship parse_relationship() {
    ErRelationship r;
    r.name = identifier("relationship name");
    expect("(");
    while (true) {
      ErParticipant p;
      p.entity = identifier("participant entity");
      if (is_identifier(peek())) p.role = take().text;
      p.multiplicity = parse_card();
      r.participants.push_back(std::move(p));
      if (peek().text == ",") {
        take();
        continue;
      }
      break;
    }
    expect(")");
    r.attributes = attribute_block(r.name);
    return r;
  }

  void resolve(const ErSchema& schema) {
    std::set<std::string> names;
    for (const auto& e : schema.entities)
      if (!names.insert(e.name).second)
        throw TgmError("DuplicateLabel",
                       "entity '" + e.name + "' is declared twice");
    for (const auto& r : schema.relationships) {
      if (!names.insert(r.name).second)
        throw TgmError("DuplicateLabel",
                       "relationship '" + r.name + "' is declared twice");
      for (const auto& p : r.participants)
        if (!schema.find_entity(p.entity))
          throw TgmError("DanglingReference",
                         "relationship '" + r.name +
                             "' involves unknown entity '" + p.entity + "'");
    }
    for (const auto& isa : schema.isa_links)
      if (!schema.find_entity(isa.sub) || !schema.find_entity(isa.super))
        throw TgmError("DanglingReference", "isa link '" + isa.sub + " < " +
                                                isa.super +
                                                "' names an unknown entity");
  }

  std::vector<ErToken> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

const ErEntity* ErSchema::find_entity(const std::string& name) const {
  for (const auto& e : entities)
    if (e.name == name) return &e;
  return nullptr;
}

ErSchema parse_er(const std::string& text) { return ErParser(text).parse(); }

namespace {

/// Emits the elements one attribute stands for and returns the id of the
/// property-like element carrying it. Date attributes expand to a
/// day/month/year record aggregation named after the attribute.
std::string lift_attribute(SupermodelSchema& sm, const std::string& owner,
                           const ErAttribute& a) {
  std::string base = owner + "." + a.name;
  if (a.type == "date") {
    MetaElement agg;
    agg.id = base;
    agg.kind = MetaKind::Aggregation;
    agg.label = a.name;
    for (const char* part : {"day", "month", "year"}) {
      MetaElement lex;
      lex.id = base + "." + part;
      lex.kind = MetaKind::Lexical;
      lex.label = part;
      lex.datatype = "integer";
      sm.elements.push_back(std::move(lex));
      agg.members.push_back({base + "." + part, {1, 1}});
    }
    sm.elements.push_back(std::move(agg));
    return base;
  }
  MetaElement lex;
  lex.id = base;
  lex.kind = MetaKind::Lexical;
  lex.label = a.name;
  lex.datatype = a.type;
  sm.elements.push_back(std::move(lex));
  return base;
}

void lift_key(SupermodelSchema& sm, const std::string& owner,
              const ErAttribute& a) {
  if (!a.key) return;
  sm.constraints.push_back(
      {owner + "_" + a.name + "_key", owner, "unique(" + a.name + ")"});
}

}  // namespace

SupermodelSchema lift_er(const ErSchema& e) {
  SupermodelSchema sm;
  sm.source_model = "er";

  for (const auto& entity : e.entities) {
    MetaElement abs;
    abs.id = entity.name;
    abs.kind = MetaKind::Abstract;
    abs.label = entity.name;
    sm.elements.push_back(std::move(abs));
  }
  for (const auto& entity : e.entities) {
    for (const auto& a : entity.attributes) {
      std::string target = lift_attribute(sm, entity.name, a);
      MetaElement fn;
      fn.id = target + "#place";
      fn.kind = MetaKind::Function;
      fn.label = a.name;
      fn.source = entity.name;
      fn.target = target;
      sm.elements.push_back(std::move(fn));
      lift_key(sm, entity.name, a);
    }
  }
  for (const auto& rel : e.relationships) {
    MetaElement agg;
    agg.id = rel.name;
    agg.kind = MetaKind::Aggregation;
    agg.label = rel.name;
    for (const auto& p : rel.participants)
      agg.members.push_back({p.entity, p.multiplicity});
    for (const auto& a : rel.attributes)
      agg.attachments.push_back(lift_attribute(sm, rel.name, a));
    sm.elements.push_back(std::move(agg));
    for (const auto& a : rel.attributes) lift_key(sm, rel.name, a);
  }
  for (const auto& isa : e.isa_links) {
    MetaElement gen;
    gen.id = isa.sub + "_isa_" + isa.super;
    gen.kind = MetaKind::Generalization;
    gen.label = isa.sub + "_isa_" + isa.super;
    gen.sub = isa.sub;
    gen.super = isa.super;
    sm.elements.push_back(std::move(gen));
  }
  return sm;
}

}  // namespace tgm
