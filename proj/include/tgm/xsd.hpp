#pragma once

#include <map>
#include <string>
#include <vector>

#include "tgm/supermodel.hpp"

namespace tgm {

struct XsdAttribute {
  std::string name;
  std::string type;  // registered scalar type label
  bool required = false;
};

/// One xs:element after parsing. Either `type` carries a scalar type label
/// (leaf element) or the element owns structure: child elements from an
/// inline sequence, attributes, or simple content extending a scalar base.
struct XsdElement {
  std::string name;
  std::string type;
  Multiplicity occurs{1, 1};
  bool simple_content = false;
  std::string content_base;  // extension base when simple_content
  std::vector<XsdAttribute> attributes;
  std::vector<XsdElement> children;

  bool complex() const {
    return simple_content || !attributes.empty() || !children.empty();
  }
};

struct XsdSubsetSchema {
  std::vector<XsdElement> roots;
};

/// Parses the supported XML-Schema subset: xs:schema with nested
/// xs:element, inline xs:complexType, xs:sequence (minOccurs/maxOccurs
/// multiply into the contained elements), xs:simpleContent with
/// xs:extension, and xs:attribute (use="required"|"optional").
/// xs:annotation subtrees are skipped. Scalar types: xs:string,
/// xs:integer/int/long/short, xs:decimal/double/float, xs:date,
/// xs:boolean. Throws SyntaxError with line:column and UnsupportedFeature
/// (choice, all, any, group, ref, restriction, substitution groups,
/// unknown xs: types).
XsdSubsetSchema parse_xsd(const std::string& text);

/// Maps a leaf element name to a replacement type label, e.g. price ->
/// euro. Unknown labels are registered as user types of the overridden
/// element's scalar kind.
using XsdTypeOverrides = std::map<std::string, std::string>;

/// Compact mapping: each root element and each repeating structured child
/// becomes an abstract; containment becomes an aggregation whose tail end
/// carries the child's occurrence bounds and whose head end is (1,1).
/// Everything else folds into the owning abstract's property record in
/// document order: leaf elements become lexicals (optional when minOccurs
/// is 0), structured single elements become record aggregations (simple
/// content contributes a leading "value" component, attributes follow),
/// repeating leaf elements become list-typed lexicals, and the owner's
/// attributes trail its elements.
SupermodelSchema lift_xsd(const XsdSubsetSchema& x,
                          const XsdTypeOverrides& overrides = {});

}  // namespace tgm
