#include "tgm/xsd.hpp"

#include <cctype>

namespace tgm {

namespace {

struct XmlNode {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<XmlNode> children;
  int line = 0;
  int column = 0;

  const std::string* attribute(const std::string& key) const {
    for (const auto& [k, v] : attributes)
      if (k == key) return &v;
    return nullptr;
  }
};

class XmlParser {
 public:
  explicit XmlParser(const std::string& text) : text_(text) {}

  XmlNode parse_document() {
    skip_misc();
    XmlNode root = parse_element();
    skip_misc();
    if (pos_ < text_.size()) fail("content after the document element");
    return root;
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

  bool take_if(const std::string& s) {
    if (text_.compare(pos_, s.size(), s) != 0) return false;
    for (std::size_t i = 0; i < s.size(); ++i) take();
    return true;
  }

  void skip_whitespace() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(peek())))
      take();
  }

  /// Whitespace, the XML declaration, comments, and stray text. Character
  /// data carries no schema information in the supported subset.
  void skip_misc() {
    while (pos_ < text_.size()) {
      if (std::isspace(static_cast<unsigned char>(peek()))) {
        take();
      } else if (take_if("<?")) {
        while (pos_ < text_.size() && !take_if("?>")) take();
      } else if (take_if("<!--")) {
        while (pos_ < text_.size() && !take_if("-->")) take();
      } else if (peek() != '<') {
        take();
      } else {
        break;
      }
    }
  }

  std::string name_token() {
    std::string out;
    while (pos_ < text_.size()) {
      char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == ':' ||
          c == '_' || c == '-' || c == '.')
        out += take();
      else
        break;
    }
    if (out.empty()) fail("expected a name");
    return out;
  }

  std::string quoted_value() {
    char quote = peek();
    if (quote != '"' && quote != '\'') fail("expected a quoted value");
    take();
    std::string out;
    while (pos_ < text_.size() && peek() != quote) {
      if (peek() == '&') {
        if (take_if("&lt;")) out += '<';
        else if (take_if("&gt;")) out += '>';
        else if (take_if("&amp;")) out += '&';
        else if (take_if("&quot;")) out += '"';
        else if (take_if("&apos;")) out += '\'';
        else fail("unknown entity reference");
      } else {
        out += take();
      }
    }
    if (pos_ >= text_.size()) fail("unterminated attribute value");
    take();
    return out;
  }

  XmlNode parse_element() {
    if (peek() != '<') fail("expected an element");
    XmlNode node;
    node.line = line_;
    node.column = column_;
    take();
    node.name = name_token();
    while (true) {
      skip_whitespace();
      char c = peek();
      if (c == '\0') fail("unterminated tag '" + node.name + "'");
      if (c == '/') {
        take();
        if (take() != '>') fail("malformed self-closing tag");
        return node;
      }
      if (c == '>') {
        take();
        break;
      }
      std::string key = name_token();
      skip_whitespace();
      if (take() != '=') fail("expected '=' after attribute '" + key + "'");
      skip_whitespace();
      node.attributes.emplace_back(key, quoted_value());
    }
    while (true) {
      skip_misc();
      if (pos_ >= text_.size())
        fail("missing closing tag for '" + node.name + "'");
      if (take_if("</")) {
        std::string closing = name_token();
        if (closing != node.name)
          fail("closing tag '" + closing + "' does not match '" + node.name +
               "'");
        skip_whitespace();
        if (take() != '>') fail("malformed closing tag");
        return node;
      }
      node.children.push_back(parse_element());
    }
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

std::string local_name(const std::string& name) {
  auto pos = name.rfind(':');
  return pos == std::string::npos ? name : name.substr(pos + 1);
}

[[noreturn]] void unsupported(const XmlNode& node, const std::string& what) {
  throw TgmError("UnsupportedFeature", std::to_string(node.line) + ":" +
                                           std::to_string(node.column) + ": " +
                                           what);
}

[[noreturn]] void malformed(const XmlNode& node, const std::string& what) {
  throw TgmError("SyntaxError", std::to_string(node.line) + ":" +
                                    std::to_string(node.column) + ": " + what);
}

std::string scalar_type(const XmlNode& at, const std::string& xsd_type) {
  std::string t = local_name(xsd_type);
  if (t == "string") return "text";
  if (t == "integer" || t == "int" || t == "long" || t == "short")
    return "integer";
  if (t == "decimal" || t == "double" || t == "float") return "decimal";
  if (t == "date") return "date";
  if (t == "boolean") return "boolean";
  unsupported(at, "type '" + xsd_type + "' is outside the subset");
}

Multiplicity occurs_of(const XmlNode& node) {
  Multiplicity m{1, 1};
  if (const std::string* v = node.attribute("minOccurs"))
    m.min = static_cast<std::uint32_t>(std::stoul(*v));
  if (const std::string* v = node.attribute("maxOccurs"))
    m.max = *v == "unbounded"
                ? Multiplicity::kUnbounded
                : static_cast<std::uint32_t>(std::stoul(*v));
  return m;
}

Multiplicity scale_occurs(const Multiplicity& outer, const Multiplicity& m) {
  Multiplicity out;
  out.min = outer.min * m.min;
  out.max = (outer.max == Multiplicity::kUnbounded ||
             m.max == Multiplicity::kUnbounded)
                ? Multiplicity::kUnbounded
                : outer.max * m.max;
  return out;
}

XsdAttribute parse_attribute(const XmlNode& node) {
  XsdAttribute a;
  const std::string* name = node.attribute("name");
  const std::string* type = node.attribute("type");
  if (!name || !type) malformed(node, "attribute needs name and type");
  a.name = *name;
  a.type = scalar_type(node, *type);
  const std::string* use = node.attribute("use");
  a.required = use && *use == "required";
  return a;
}

XsdElement parse_element_decl(const XmlNode& node);

void parse_complex_type(const XmlNode& node, XsdElement& out) {
  for (const auto& child : node.children) {
    std::string kind = local_name(child.name);
    if (kind == "annotation") continue;
    if (kind == "sequence") {
      Multiplicity outer = occurs_of(child);
      for (const auto& item : child.children) {
        std::string item_kind = local_name(item.name);
        if (item_kind == "annotation") continue;
        if (item_kind != "element")
          unsupported(item, item.name + " inside a sequence");
        XsdElement e = parse_element_decl(item);
        e.occurs = scale_occurs(outer, e.occurs);
        out.children.push_back(std::move(e));
      }
    } else if (kind == "simpleContent") {
      out.simple_content = true;
      for (const auto& ext : child.children) {
        if (local_name(ext.name) == "annotation") continue;
        if (local_name(ext.name) != "extension")
          unsupported(ext, ext.name + " inside simpleContent");
        const std::string* base = ext.attribute("base");
        if (!base) malformed(ext, "extension needs a base");
        out.content_base = scalar_type(ext, *base);
        for (const auto& attr : ext.children) {
          if (local_name(attr.name) == "annotation") continue;
          if (local_name(attr.name) != "attribute")
            unsupported(attr, attr.name + " inside an extension");
          out.attributes.push_back(parse_attribute(attr));
        }
      }
    } else if (kind == "attribute") {
      out.attributes.push_back(parse_attribute(child));
    } else if (kind == "choice" || kind == "all" || kind == "any" ||
               kind == "group" || kind == "restriction") {
      unsupported(child, "xs:" + kind);
    } else {
      malformed(child, "unexpected " + child.name + " in a complexType");
    }
  }
}

XsdElement parse_element_decl(const XmlNode& node) {
  if (node.attribute("ref")) unsupported(node, "element references");
  if (node.attribute("substitutionGroup"))
    unsupported(node, "substitution groups");
  const std::string* name = node.attribute("name");
  if (!name) malformed(node, "element needs a name");
  XsdElement e;
  e.name = *name;
  e.occurs = occurs_of(node);
  if (const std::string* type = node.attribute("type"))
    e.type = scalar_type(node, *type);
  for (const auto& child : node.children) {
    std::string kind = local_name(child.name);
    if (kind == "annotation") continue;
    if (kind != "complexType")
      unsupported(child, child.name + " inside an element");
    if (!e.type.empty())
      malformed(child, "element '" + e.name +
                           "' has both a type and a complexType");
    parse_complex_type(child, e);
  }
  if (e.type.empty() && !e.complex())
    malformed(node, "element '" + e.name + "' declares no type");
  return e;
}

}  // namespace

XsdSubsetSchema parse_xsd(const std::string& text) {
  XmlNode root = XmlParser(text).parse_document();
  if (local_name(root.name) != "schema")
    malformed(root, "document element must be a schema, got '" + root.name +
                        "'");
  XsdSubsetSchema schema;
  for (const auto& child : root.children) {
    std::string kind = local_name(child.name);
    if (kind == "annotation") continue;
    if (kind != "element")
      unsupported(child, child.name + " at the top level");
    schema.roots.push_back(parse_element_decl(child));
  }
  return schema;
}

namespace {

struct XsdLift {
  SupermodelSchema sm;
  const XsdTypeOverrides& overrides;
  std::set<std::string> added_types;

  explicit XsdLift(const XsdTypeOverrides& o) : overrides(o) {}

  /// Applies a --type-overrides entry: the element keeps its structure but
  /// its values take the named type, registered on first use with the
  /// original scalar kind.
  std::string leaf_type(const std::string& element_name,
                        const std::string& fallback) {
    auto it = overrides.find(element_name);
    if (it == overrides.end()) return fallback;
    const std::string& label = it->second;
    if (!TypeRegistry::is_builtin(label) && added_types.insert(label).second) {
      DataType t;
      t.label = label;
      t.kind = *kind_from_name(fallback);
      sm.types.push_back(std::move(t));
    }
    return label;
  }

  std::string lexical(const std::string& id, const std::string& label,
                      const std::string& datatype) {
    MetaElement lex;
    lex.id = id;
    lex.kind = MetaKind::Lexical;
    lex.label = label;
    lex.datatype = datatype;
    sm.elements.push_back(std::move(lex));
    return id;
  }

  /// Property-like element for a single-valued piece of structure.
  /// Returns its id; `optional` reports a minOccurs of 0.
  std::string property_of(const std::string& scope, const XsdElement& e,
                          bool* optional) {
    *optional = e.occurs.min == 0;
    std::string id = scope + "." + e.name;
    if (!e.complex()) {
      if (e.occurs.max > 1) {
        std::string list_label = scope + "_" + e.name + "_list";
        sm.types.push_back(make_collection(list_label, TypeKind::List,
                                           leaf_type(e.name, e.type),
                                           e.occurs.min, collection_max(e)));
        *optional = false;
        return lexical(id, e.name, list_label);
      }
      return lexical(id, e.name, leaf_type(e.name, e.type));
    }
    if (e.occurs.max != 1)
      throw TgmError("UnsupportedFeature",
                     "structured element '" + e.name +
                         "' repeats inside a single-valued element");
    MetaElement rec;
    rec.id = id;
    rec.kind = MetaKind::Aggregation;
    rec.label = e.name;
    if (e.simple_content)
      rec.members.push_back(
          {lexical(id + ".value", "value", leaf_type(e.name, e.content_base)),
           {1, 1}});
    for (const auto& child : e.children) {
      bool child_optional = false;
      std::string member = property_of(id, child, &child_optional);
      rec.members.push_back({member, child_optional ? Multiplicity{0, 1}
                                                    : Multiplicity{1, 1}});
    }
    for (const auto& attr : e.attributes)
      rec.members.push_back(
          {lexical(id + "." + attr.name, attr.name,
                   leaf_type(attr.name, attr.type)),
           attr.required ? Multiplicity{1, 1} : Multiplicity{0, 1}});
    sm.elements.push_back(std::move(rec));
    return id;
  }

  static std::optional<std::uint32_t> collection_max(const XsdElement& e) {
    if (e.occurs.max == Multiplicity::kUnbounded) return std::nullopt;
    return e.occurs.max;
  }

  void place(const std::string& owner, const std::string& target,
             const std::string& label, bool optional) {
    MetaElement fn;
    fn.id = target + "#place";
    fn.kind = MetaKind::Function;
    fn.label = label;
    fn.source = owner;
    fn.target = target;
    fn.optional = optional;
    sm.elements.push_back(std::move(fn));
  }

  /// An element worth a node of its own: the document root or any
  /// structured element that repeats under its parent.
  void abstract_of(const XsdElement& e) {
    MetaElement abs;
    abs.id = e.name;
    abs.kind = MetaKind::Abstract;
    abs.label = e.name;
    sm.elements.push_back(std::move(abs));

    for (const auto& child : e.children) {
      if (child.complex() && child.occurs.max != 1) {
        abstract_of(child);
        MetaElement contain;
        contain.id = e.name + "#" + child.name;
        contain.kind = MetaKind::Aggregation;
        contain.label = e.name + "_" + child.name;
        contain.members.push_back({e.name, child.occurs});
        contain.members.push_back({child.name, {1, 1}});
        sm.elements.push_back(std::move(contain));
      } else {
        bool optional = false;
        std::string target = property_of(e.name, child, &optional);
        place(e.name, target, child.name, optional);
      }
    }
    for (const auto& attr : e.attributes) {
      std::string target = lexical(e.name + "." + attr.name, attr.name,
                                   leaf_type(attr.name, attr.type));
      place(e.name, target, attr.name, !attr.required);
    }
  }
};

}  // namespace

SupermodelSchema lift_xsd(const XsdSubsetSchema& x,
                          const XsdTypeOverrides& overrides) {
  XsdLift lift(overrides);
  lift.sm.source_model = "xsd";
  for (const auto& root : x.roots) lift.abstract_of(root);
  return lift.sm;
}

}  // namespace tgm
