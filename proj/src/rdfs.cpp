#include "tgm/rdfs.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace tgm {

namespace {

const std::string kRdfNs = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
const std::string kRdfsNs = "http://www.w3.org/2000/01/rdf-schema#";
const std::string kXsdNs = "http://www.w3.org/2001/XMLSchema#";

bool in_namespace(const std::string& iri, const std::string& ns) {
  return iri.size() > ns.size() && iri.compare(0, ns.size(), ns) == 0;
}

class TurtleParser {
 public:
  explicit TurtleParser(const std::string& text) : text_(text) {
    doc_.prefixes = {
        {"rdf", kRdfNs},
        {"rdfs", kRdfsNs},
        {"xsd", kXsdNs},
        {"foaf", "http://xmlns.com/foaf/0.1/"},
        {"voc", "http://example.org/voc#"},
    };
  }

  RdfDocument parse() {
    skip_trivia();
    while (pos_ < text_.size()) {
      if (peek() == '@')
        directive();
      else
        statement();
      skip_trivia();
    }
    return std::move(doc_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw TgmError("SyntaxError", std::to_string(line_) + ":" +
                                      std::to_string(column_) + ": " + what);
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  char take() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  void skip_trivia() {
    while (pos_ < text_.size()) {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        take();
      } else if (c == '#') {
        while (pos_ < text_.size() && peek() != '\n') take();
      } else {
        break;
      }
    }
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    take();
  }

  static bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string name_token() {
    std::string out;
    while (pos_ < text_.size() && name_char(peek())) out += take();
    return out;
  }

  std::string iri_ref() {
    expect('<');
    std::string out;
    while (pos_ < text_.size() && peek() != '>') {
      if (std::isspace(static_cast<unsigned char>(peek())))
        fail("whitespace inside an IRI");
      out += take();
    }
    expect('>');
    return out;
  }

  std::string expand(const std::string& prefix, const std::string& local) {
    auto it = doc_.prefixes.find(prefix);
    if (it == doc_.prefixes.end())
      fail("prefix '" + prefix + ":' is not declared");
    return it->second + local;
  }

  void directive() {
    expect('@');
    std::string keyword = name_token();
    if (keyword != "prefix") fail("unknown directive '@" + keyword + "'");
    skip_trivia();
    std::string prefix = name_token();
    expect(':');
    skip_trivia();
    std::string expansion = iri_ref();
    skip_trivia();
    expect('.');
    doc_.prefixes[prefix] = expansion;
  }

  RdfTerm iri_term(std::string iri) {
    RdfTerm t;
    t.kind = RdfTerm::Kind::Iri;
    t.value = std::move(iri);
    return t;
  }

  RdfTerm term() {
    char c = peek();
    if (c == '<') return iri_term(iri_ref());
    if (c == '_') {
      take();
      expect(':');
      std::string label = name_token();
      if (label.empty()) fail("blank node needs a label");
      RdfTerm t;
      t.kind = RdfTerm::Kind::Bnode;
      t.value = std::move(label);
      return t;
    }
    if (c == '"') return literal();
    std::string prefix = name_token();
    if (peek() != ':')
      fail(prefix.empty() ? std::string("expected a term")
                          : "expected ':' after '" + prefix + "'");
    take();
    return iri_term(expand(prefix, name_token()));
  }

  RdfTerm literal() {
    expect('"');
    RdfTerm t;
    t.kind = RdfTerm::Kind::Literal;
    while (pos_ < text_.size() && peek() != '"') {
      char c = take();
      if (c == '\\') {
        char e = take();
        if (e == 'n') t.value += '\n';
        else if (e == 't') t.value += '\t';
        else if (e == 'r') t.value += '\r';
        else if (e == '"' || e == '\\') t.value += e;
        else fail(std::string("unknown escape '\\") + e + "'");
      } else {
        t.value += c;
      }
    }
    expect('"');
    if (peek() == '@')
      throw TgmError("UnsupportedFeature",
                     std::to_string(line_) + ":" + std::to_string(column_) +
                         ": language tags");
    if (peek() == '^') {
      take();
      expect('^');
      RdfTerm dt = term();
      if (dt.kind != RdfTerm::Kind::Iri) fail("datatype must be an IRI");
      t.datatype = std::move(dt.value);
    }
    return t;
  }

  RdfTerm verb() {
    if (peek() == 'a') {
      std::size_t next = pos_ + 1;
      bool bare = next >= text_.size() ||
                  (!name_char(text_[next]) && text_[next] != ':');
      if (bare) {
        take();
        return iri_term(kRdfNs + "type");
      }
    }
    RdfTerm t = term();
    if (t.kind != RdfTerm::Kind::Iri) fail("predicate must be an IRI");
    return t;
  }

  void statement() {
    RdfTerm subject = term();
    if (subject.kind == RdfTerm::Kind::Literal)
      fail("a literal cannot be a subject");
    while (true) {
      skip_trivia();
      RdfTerm predicate = verb();
      while (true) {
        skip_trivia();
        doc_.triples.push_back({subject, predicate, term()});
        skip_trivia();
        if (peek() != ',') break;
        take();
      }
      if (peek() == ';') {
        take();
        skip_trivia();
        if (peek() == '.') break;
        continue;
      }
      break;
    }
    expect('.');
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
  RdfDocument doc_;
};

}  // namespace

std::string RdfDocument::shorten(const std::string& iri) const {
  const std::string* best_prefix = nullptr;
  std::size_t best_length = 0;
  for (const auto& [prefix, expansion] : prefixes) {
    if (expansion.size() <= best_length || iri.size() <= expansion.size())
      continue;
    if (iri.compare(0, expansion.size(), expansion) == 0) {
      best_prefix = &prefix;
      best_length = expansion.size();
    }
  }
  if (!best_prefix) return iri;
  return *best_prefix + ":" + iri.substr(best_length);
}

std::string rdf_local_name(const std::string& iri) {
  auto hash = iri.rfind('#');
  if (hash != std::string::npos) return iri.substr(hash + 1);
  auto slash = iri.rfind('/');
  if (slash != std::string::npos) return iri.substr(slash + 1);
  return iri;
}

RdfDocument parse_rdf(const std::string& text) {
  return TurtleParser(text).parse();
}

namespace {

[[noreturn]] void unresolvable(const std::string& what) {
  throw TgmError("UnresolvableBnode", what);
}

double facet_value(const RdfTerm& object, const std::string& facet,
                   const std::string& owner) {
  if (object.kind != RdfTerm::Kind::Literal)
    throw TgmError("SyntaxError",
                   facet + " of '" + owner + "' needs a literal value");
  try {
    std::size_t used = 0;
    double v = std::stod(object.value, &used);
    if (used != object.value.size()) throw std::invalid_argument(object.value);
    return v;
  } catch (const std::exception&) {
    throw TgmError("SyntaxError", facet + " of '" + owner +
                                      "' is not a number: '" + object.value +
                                      "'");
  }
}

}  // namespace

RdfsSchema extract_rdfs(const RdfDocument& doc) {
  const std::string kType = kRdfNs + "type";
  const std::string kClass = kRdfsNs + "Class";
  const std::string kProperty = kRdfNs + "Property";
  const std::string kAlt = kRdfNs + "Alt";
  const std::string kDomain = kRdfsNs + "domain";
  const std::string kRange = kRdfsNs + "range";
  const std::string kSubClass = kRdfsNs + "subClassOf";
  const std::string kSubProperty = kRdfsNs + "subPropertyOf";
  const std::string kMinInclusive = kXsdNs + "minInclusive";
  const std::string kMaxInclusive = kXsdNs + "maxInclusive";

  RdfsSchema s;
  std::set<std::string> class_set;
  std::set<std::string> alt_bnodes;
  std::vector<std::string> property_order;
  std::set<std::string> property_set;

  auto note_property = [&](const RdfTerm& subject) {
    if (subject.kind != RdfTerm::Kind::Iri) return;
    if (property_set.insert(subject.value).second)
      property_order.push_back(subject.value);
  };

  for (const auto& t : doc.triples) {
    if (t.predicate.value == kType && t.object.kind == RdfTerm::Kind::Iri) {
      if (t.object.value == kClass && t.subject.kind == RdfTerm::Kind::Iri) {
        if (class_set.insert(t.subject.value).second)
          s.classes.push_back(t.subject.value);
      } else if (t.object.value == kAlt &&
                 t.subject.kind == RdfTerm::Kind::Bnode) {
        alt_bnodes.insert(t.subject.value);
      } else if (t.object.value == kProperty) {
        note_property(t.subject);
      }
    } else if (t.predicate.value == kDomain || t.predicate.value == kRange) {
      if (t.subject.kind == RdfTerm::Kind::Bnode)
        unresolvable("bnode '_:" + t.subject.value +
                     "' cannot declare a domain or range");
      note_property(t.subject);
    }
  }

  for (const auto& iri : property_order) {
    RdfsProperty p;
    p.iri = iri;
    bool has_domain = false, has_range = false;
    for (const auto& t : doc.triples) {
      if (t.subject.kind != RdfTerm::Kind::Iri || t.subject.value != iri)
        continue;
      if (t.predicate.value == kDomain) {
        if (has_domain)
          throw TgmError("UnsupportedFeature", "property '" +
                                                   rdf_local_name(iri) +
                                                   "' has several domains");
        if (t.object.kind == RdfTerm::Kind::Bnode)
          unresolvable("domain of '" + rdf_local_name(iri) + "' is a bnode");
        p.domain = t.object.value;
        has_domain = true;
      } else if (t.predicate.value == kRange) {
        if (has_range)
          throw TgmError("UnsupportedFeature", "property '" +
                                                   rdf_local_name(iri) +
                                                   "' has several ranges");
        if (t.object.kind == RdfTerm::Kind::Bnode) {
          if (!alt_bnodes.count(t.object.value))
            unresolvable("range bnode '_:" + t.object.value +
                         "' is not an rdf:Alt group");
          p.range = t.object.value;
          p.range_is_bnode = true;
        } else {
          p.range = t.object.value;
        }
        has_range = true;
      }
    }
    if (!has_domain)
      throw TgmError("DanglingReference",
                     "property '" + rdf_local_name(iri) + "' has no domain");
    if (!has_range)
      throw TgmError("DanglingReference",
                     "property '" + rdf_local_name(iri) + "' has no range");
    s.properties.push_back(std::move(p));
  }

  std::set<std::string> derived_set;
  for (const auto& t : doc.triples) {
    if (t.predicate.value == kSubClass) {
      if (t.subject.kind != RdfTerm::Kind::Iri ||
          t.object.kind != RdfTerm::Kind::Iri)
        unresolvable("rdfs:subClassOf between bnodes");
      if (in_namespace(t.object.value, kXsdNs)) {
        if (!derived_set.insert(t.subject.value).second) continue;
        RdfsDerivedType d;
        d.iri = t.subject.value;
        d.base = t.object.value;
        bool has_lo = false, has_hi = false;
        for (const auto& f : doc.triples) {
          if (f.subject.kind != RdfTerm::Kind::Iri ||
              f.subject.value != d.iri)
            continue;
          if (f.predicate.value == kMinInclusive) {
            d.lo = facet_value(f.object, "xsd:minInclusive",
                               rdf_local_name(d.iri));
            has_lo = true;
          } else if (f.predicate.value == kMaxInclusive) {
            d.hi = facet_value(f.object, "xsd:maxInclusive",
                               rdf_local_name(d.iri));
            has_hi = true;
          }
        }
        if (!has_lo || !has_hi)
          throw TgmError("UnsupportedFeature",
                         "derived type '" + rdf_local_name(d.iri) +
                             "' needs both xsd:minInclusive and "
                             "xsd:maxInclusive");
        s.derived.push_back(std::move(d));
      } else {
        if (!class_set.count(t.subject.value) ||
            !class_set.count(t.object.value))
          throw TgmError("DanglingReference",
                         "rdfs:subClassOf links undeclared classes ('" +
                             rdf_local_name(t.subject.value) + "' under '" +
                             rdf_local_name(t.object.value) + "')");
        s.subclasses.push_back({t.subject.value, t.object.value});
      }
    } else if (t.predicate.value == kSubProperty) {
      s.subproperties.push_back({t.subject.value, t.object.value});
    }
  }

  std::set<std::string> accounted = alt_bnodes;
  for (const auto& group : alt_bnodes) {
    std::vector<std::pair<int, std::string>> members;
    for (const auto& t : doc.triples) {
      if (t.subject.kind != RdfTerm::Kind::Bnode || t.subject.value != group)
        continue;
      if (!in_namespace(t.predicate.value, kRdfNs)) continue;
      std::string local = rdf_local_name(t.predicate.value);
      if (local.size() < 2 || local[0] != '_') continue;
      int n = 0;
      try {
        n = std::stoi(local.substr(1));
      } catch (const std::exception&) {
        continue;
      }
      if (t.object.kind != RdfTerm::Kind::Bnode)
        unresolvable("rdf:" + local + " member of '_:" + group +
                     "' must be a bnode");
      members.emplace_back(n, t.object.value);
    }
    if (members.empty())
      unresolvable("alt group '_:" + group + "' has no rdf:_n members");
    std::sort(members.begin(), members.end());
    std::vector<std::vector<RdfsAltField>> alternatives;
    for (const auto& [n, member] : members) {
      accounted.insert(member);
      std::vector<RdfsAltField> fields;
      for (const auto& t : doc.triples) {
        if (t.subject.kind != RdfTerm::Kind::Bnode ||
            t.subject.value != member)
          continue;
        if (in_namespace(t.predicate.value, kRdfNs) ||
            in_namespace(t.predicate.value, kRdfsNs))
          continue;
        if (t.object.kind != RdfTerm::Kind::Iri)
          unresolvable("field '" + rdf_local_name(t.predicate.value) +
                       "' of alt member '_:" + member +
                       "' must name a datatype");
        fields.push_back({rdf_local_name(t.predicate.value), t.object.value});
      }
      if (fields.empty())
        unresolvable("alt member '_:" + member + "' describes no fields");
      alternatives.push_back(std::move(fields));
    }
    s.alt_groups[group] = std::move(alternatives);
  }

  for (const auto& t : doc.triples) {
    if (t.subject.kind == RdfTerm::Kind::Bnode &&
        !accounted.count(t.subject.value))
      unresolvable("bnode '_:" + t.subject.value +
                   "' fits no supported pattern");
    if (t.object.kind == RdfTerm::Kind::Bnode &&
        !accounted.count(t.object.value))
      unresolvable("bnode '_:" + t.object.value +
                   "' fits no supported pattern");
  }

  return s;
}

namespace {

std::string scalar_label(const std::string& iri, const RdfsSchema& s) {
  if (in_namespace(iri, kXsdNs)) {
    std::string local = rdf_local_name(iri);
    if (local == "string") return "text";
    if (local == "integer" || local == "int" || local == "long" ||
        local == "short")
      return "integer";
    if (local == "decimal" || local == "double" || local == "float")
      return "decimal";
    if (local == "date") return "date";
    if (local == "boolean") return "boolean";
    throw TgmError("UnsupportedFeature",
                   "datatype '" + iri + "' is outside the subset");
  }
  for (const auto& d : s.derived)
    if (d.iri == iri) return rdf_local_name(iri);
  throw TgmError("UnsupportedFeature",
                 "'" + iri + "' does not name a datatype");
}

TypeKind range_base(const RdfsDerivedType& d) {
  std::string local = rdf_local_name(d.base);
  if (local == "integer" || local == "int" || local == "long" ||
      local == "short")
    return TypeKind::Integer;
  if (local == "decimal" || local == "double" || local == "float")
    return TypeKind::Decimal;
  throw TgmError("UnsupportedFeature", "derived type '" +
                                           rdf_local_name(d.iri) +
                                           "' must narrow a numeric type");
}

}  // namespace

SupermodelSchema lift_rdfs(const RdfsSchema& s) {
  if (!s.subproperties.empty()) {
    const auto& link = s.subproperties.front();
    throw TgmError("UnsupportedFeature",
                   "rdfs:subPropertyOf ('" + rdf_local_name(link.sub) +
                       "' under '" + rdf_local_name(link.super) +
                       "') has no mapping rule");
  }

  SupermodelSchema sm;
  sm.source_model = "rdfs";
  for (const auto& d : s.derived)
    sm.types.push_back(
        make_range(rdf_local_name(d.iri), range_base(d), d.lo, d.hi));

  std::set<std::string> class_iris(s.classes.begin(), s.classes.end());
  std::set<std::string> edge_iris;

  for (const auto& c : s.classes) {
    MetaElement abs;
    abs.id = rdf_local_name(c);
    abs.kind = MetaKind::Abstract;
    abs.label = abs.id;
    sm.elements.push_back(std::move(abs));
  }

  for (const auto& p : s.properties) {
    if (p.range_is_bnode || !class_iris.count(p.range)) continue;
    std::string prop = rdf_local_name(p.iri);
    if (!class_iris.count(p.domain))
      throw TgmError("DanglingReference", "domain of predicate '" + prop +
                                              "' is not a declared class");
    MetaElement agg;
    agg.id = prop;
    agg.kind = MetaKind::Aggregation;
    agg.label = prop;
    agg.members.push_back(
        {rdf_local_name(p.domain), {0, Multiplicity::kUnbounded}});
    agg.members.push_back(
        {rdf_local_name(p.range), {0, Multiplicity::kUnbounded}});
    sm.elements.push_back(std::move(agg));
    edge_iris.insert(p.iri);
  }

  for (const auto& p : s.properties) {
    if (edge_iris.count(p.iri)) continue;
    std::string prop = rdf_local_name(p.iri);
    std::string owner;
    if (class_iris.count(p.domain) || edge_iris.count(p.domain)) {
      owner = rdf_local_name(p.domain);
    } else {
      throw TgmError("DanglingReference",
                     "domain of '" + prop +
                         "' is neither a class nor a lifted predicate");
    }

    MetaElement lex;
    lex.id = owner + "." + prop;
    lex.kind = MetaKind::Lexical;
    lex.label = prop;
    bool optional = true;

    if (p.range_is_bnode) {
      const auto& alternatives = s.alt_groups.at(p.range);
      const auto& shape = alternatives.front();
      for (const auto& alt : alternatives)
        if (alt.size() != shape.size() ||
            !std::equal(alt.begin(), alt.end(), shape.begin(),
                        [](const RdfsAltField& a, const RdfsAltField& b) {
                          return a.name == b.name && a.range == b.range;
                        }))
          unresolvable("alternatives of '" + prop +
                       "' disagree on their fields");
      std::vector<RecordComponent> components;
      for (const auto& field : shape)
        components.push_back({field.name, scalar_label(field.range, s)});
      sm.types.push_back(make_record(prop + "_choice", components));
      sm.types.push_back(make_optional(prop + "_slot", prop + "_choice"));
      sm.types.push_back(
          make_array(prop + "_choices", prop + "_slot",
                     static_cast<std::uint32_t>(alternatives.size())));
      lex.datatype = prop + "_choices";
      optional = false;
      sm.constraints.push_back({prop + "_xor", owner, "xor(" + prop + ")"});
    } else {
      lex.datatype = scalar_label(p.range, s);
    }

    MetaElement fn;
    fn.id = lex.id + "#place";
    fn.kind = MetaKind::Function;
    fn.label = prop;
    fn.source = owner;
    fn.target = lex.id;
    fn.optional = optional;
    sm.elements.push_back(std::move(lex));
    sm.elements.push_back(std::move(fn));
  }

  for (const auto& link : s.subclasses) {
    MetaElement gen;
    gen.id =
        rdf_local_name(link.sub) + "_isa_" + rdf_local_name(link.super);
    gen.kind = MetaKind::Generalization;
    gen.label = gen.id;
    gen.sub = rdf_local_name(link.sub);
    gen.super = rdf_local_name(link.super);
    sm.elements.push_back(std::move(gen));
  }

  return sm;
}

namespace {

[[noreturn]] void integrity(const std::string& what) {
  throw TgmError("SourceIntegrityViolation", what);
}

Value literal_value(const RdfTerm& lit) {
  std::string local =
      lit.datatype.empty() ? std::string() : rdf_local_name(lit.datatype);
  try {
    std::size_t used = 0;
    if (local == "int" || local == "integer" || local == "long" ||
        local == "short") {
      long long v = std::stoll(lit.value, &used);
      if (used != lit.value.size()) throw std::invalid_argument(lit.value);
      return Value(v);
    }
    if (local == "decimal" || local == "double" || local == "float") {
      double v = std::stod(lit.value, &used);
      if (used != lit.value.size()) throw std::invalid_argument(lit.value);
      return Value(v);
    }
  } catch (const std::exception&) {
    integrity("literal '" + lit.value + "' is not a valid " + local);
  }
  if (local == "boolean") {
    if (lit.value == "true" || lit.value == "1") return Value(true);
    if (lit.value == "false" || lit.value == "0") return Value(false);
    integrity("literal '" + lit.value + "' is not a valid boolean");
  }
  return Value(lit.value);
}

}  // namespace

TypedGraphInstance map_rdf_instance(
    const RdfDocument& data, std::shared_ptr<const TypedGraphSchema> schema) {
  const std::string kType = kRdfNs + "type";
  TypedGraphInstance g;
  g.schema = schema;

  auto term_id = [&](const RdfTerm& t) {
    return t.kind == RdfTerm::Kind::Bnode ? "_:" + t.value
                                          : data.shorten(t.value);
  };

  for (const auto& t : data.triples) {
    if (t.predicate.value != kType) continue;
    if (t.object.kind != RdfTerm::Kind::Iri)
      integrity("rdf:type needs an IRI object");
    std::string label = rdf_local_name(t.object.value);
    if (!schema->find_node(label))
      integrity("no node type '" + label + "' in the schema");
    std::string id = term_id(t.subject);
    if (g.nodes.count(id))
      integrity("resource '" + id + "' is typed more than once");
    g.add_node(id, label);
  }

  for (const auto& t : data.triples) {
    if (t.predicate.value == kType) continue;
    std::string pred = rdf_local_name(t.predicate.value);
    std::string sid = term_id(t.subject);
    auto node = g.nodes.find(sid);
    if (t.object.kind == RdfTerm::Kind::Literal) {
      if (node == g.nodes.end())
        integrity("property '" + pred + "' on untyped resource '" + sid +
                  "'");
      const NodeType* nt = g.schema->find_node(node->second.type);
      const DataType* record = g.schema->registry.find(nt->property_type);
      bool known = false;
      if (record)
        for (const auto& c : record->components) known |= c.name == pred;
      if (!known)
        integrity("predicate '" + pred + "' is not a property of '" +
                  nt->label + "'");
      if (node->second.properties.contains(pred))
        integrity("resource '" + sid + "' has several '" + pred +
                  "' values");
      node->second.properties[pred] = literal_value(t.object);
    } else {
      if (!g.schema->find_edge(pred))
        integrity("predicate '" + pred + "' is not in the schema");
      std::string oid = term_id(t.object);
      if (node == g.nodes.end())
        integrity("edge '" + pred + "' leaves untyped resource '" + sid +
                  "'");
      if (!g.nodes.count(oid))
        integrity("edge '" + pred + "' reaches untyped resource '" + oid +
                  "'");
      std::string eid = sid + "#" + pred + "#" + oid;
      if (!g.edges.count(eid)) g.add_edge(eid, pred, {sid}, {oid});
    }
  }

  return g;
}

}  // namespace tgm
