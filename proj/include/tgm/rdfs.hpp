#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tgm/supermodel.hpp"

namespace tgm {

/// One RDF term. Literals keep their lexical form; `datatype` holds the
/// expanded datatype IRI when the literal was written with ^^.
struct RdfTerm {
  enum class Kind { Iri, Bnode, Literal };
  Kind kind = Kind::Iri;
  std::string value;
  std::string datatype;

  friend bool operator==(const RdfTerm&, const RdfTerm&) = default;
};

struct RdfTriple {
  RdfTerm subject, predicate, object;
};

/// Triples plus the prefix table in force after parsing. The table starts
/// out with rdf, rdfs, xsd, foaf, and voc (http://example.org/voc#);
/// @prefix directives extend or override it.
struct RdfDocument {
  std::vector<RdfTriple> triples;
  std::map<std::string, std::string> prefixes;

  /// Longest-expansion prefixed form of an IRI, or the IRI unchanged.
  std::string shorten(const std::string& iri) const;
};

/// Local part of an IRI: after '#' when present, else after the last '/'.
std::string rdf_local_name(const std::string& iri);

/// Parses N-Triples and the Turtle subset it embeds in: @prefix, prefixed
/// names, the 'a' keyword, ';' predicate lists, ',' object lists, _:bnode
/// labels, string literals with optional ^^datatype, '#' comments. Throws
/// SyntaxError with line:column; language tags are UnsupportedFeature.
RdfDocument parse_rdf(const std::string& text);

struct RdfsProperty {
  std::string iri;
  std::string domain;  // class IRI or, for edge metadata, a property IRI
  std::string range;   // class or datatype IRI, or alt-group bnode label
  bool range_is_bnode = false;
};

struct RdfsAltField {
  std::string name;   // local name of the member predicate
  std::string range;  // datatype IRI
};

struct RdfsDerivedType {
  std::string iri;
  std::string base;  // xsd datatype IRI
  double lo = 0;
  double hi = 0;
};

struct RdfsLink {
  std::string sub, super;
};

struct RdfsSchema {
  std::vector<std::string> classes;
  std::vector<RdfsProperty> properties;
  std::vector<RdfsLink> subclasses;  // both endpoints declared classes
  std::vector<RdfsLink> subproperties;
  std::vector<RdfsDerivedType> derived;  // rdfs:subClassOf an xsd type
  std::map<std::string, std::vector<std::vector<RdfsAltField>>> alt_groups;
};

/// Reads the schema level out of a document: rdfs:Class subjects,
/// properties declared by rdfs:domain and rdfs:range, rdfs:subClassOf
/// links (an xsd superclass plus xsd:minInclusive/xsd:maxInclusive facets
/// makes a derived range type), and rdf:Alt groups whose rdf:_n members
/// each spell out one record shape. A bnode in any other position throws
/// UnresolvableBnode; a derived type missing either facet throws
/// UnsupportedFeature.
RdfsSchema extract_rdfs(const RdfDocument& doc);

/// Classes become abstracts, class-to-class predicates edge aggregations
/// with (0,*) ends, datatype-ranged predicates lexicals placed by an
/// optional function, class-to-class rdfs:subClassOf generalizations. A
/// predicate domained on another predicate places its lexical on that
/// predicate's aggregation. An rdf:Alt range becomes a required
/// fixed-length array of optional record slots plus an xor() constraint
/// on the owning type. rdfs:subPropertyOf throws UnsupportedFeature.
/// Element labels are local names throughout.
SupermodelSchema lift_rdfs(const RdfsSchema& s);

/// rdf:type triples make nodes (id = shortened subject IRI), triples of
/// predicates lifted to edges make edges, literal triples fill node
/// properties under the predicate's local name. Literals convert by
/// their ^^ datatype: integer and decimal families to numbers, booleans
/// to booleans, everything else stays text. Unknown types or predicates,
/// endpoints never typed, repeated property values, and a resource typed
/// twice all throw SourceIntegrityViolation.
TypedGraphInstance map_rdf_instance(
    const RdfDocument& data, std::shared_ptr<const TypedGraphSchema> schema);

}  // namespace tgm
