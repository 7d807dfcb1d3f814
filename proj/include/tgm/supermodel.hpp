#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tgm/instance.hpp"
#include "tgm/schema.hpp"

namespace tgm {

/// The five meta-constructs every supported source model reduces to.
/// A schema expressed in these terms translates mechanically to a typed
/// graph schema and back.
enum class MetaKind { Lexical, Abstract, Aggregation, Generalization, Function };

std::string meta_kind_name(MetaKind k);
MetaKind meta_kind_from_name(const std::string& name);

struct AggregationMember {
  std::string element;
  Multiplicity multiplicity{0, Multiplicity::kUnbounded};

  friend bool operator==(const AggregationMember&,
                         const AggregationMember&) = default;
};

/// One element of a supermodel schema. Only the fields of its kind are
/// meaningful:
///   lexical        datatype (a registered type label)
///   abstract       nothing beyond the label
///   aggregation    members, attachments. All-lexical members make a
///                  record aggregation (a structured property type); all
///                  abstract members make an edge aggregation (first
///                  member = tail, the rest = heads). Attachments are
///                  property-like elements carried as edge properties.
///   generalization sub, super (abstract ids)
///   function       source, target, optional. An abstract target makes a
///                  single-valued edge; a property-like target becomes a
///                  component of the source's property record.
struct MetaElement {
  std::string id;
  MetaKind kind = MetaKind::Abstract;
  std::string label;

  std::string datatype;
  std::vector<AggregationMember> members;
  std::vector<std::string> attachments;
  std::string sub, super;
  std::string source, target;
  bool optional = false;
};

struct SupermodelSchema {
  std::string source_model;
  std::vector<DataType> types;  // user types lexicals may reference
  std::vector<MetaElement> elements;
  std::vector<Constraint> constraints;  // copied verbatim into the image

  const MetaElement* find(const std::string& id) const;
};

/// Shape and reference checks that make translate total and invertible on
/// the accepted inputs: unique ids, resolvable references, unambiguous
/// labels, every property-like element attached exactly once, record
/// members single-valued, acyclic membership and generalization.
Verdict check_supermodel(const SupermodelSchema& sm);

/// True for elements that end up as property record content rather than
/// as nodes or edges: lexicals and record aggregations.
bool is_property_like(const SupermodelSchema& sm, const MetaElement& e);

/// True when every member of the aggregation is property-like.
bool is_record_aggregation(const SupermodelSchema& sm, const MetaElement& e);

struct TranslationStep {
  std::string element;   // MetaElement id
  int rule = 0;          // 1 lexical, 2 abstract, 3 aggregation,
                         // 4 generalization, 5 function
  std::string produced;  // label of the schema element this step created
};

struct TranslationReport {
  std::string source_model;
  std::vector<TranslationStep> steps;
};

struct TranslationResult {
  TypedGraphSchema schema;
  TranslationReport report;
};

/// Maps each meta-element to its typed-graph counterpart, in dependency
/// order: abstracts to node types, edge aggregations to aggregation-kind
/// edges, generalizations to generalization edges, functions to plain
/// single-valued edges or record components, lexicals and record
/// aggregations to property types. One report step per element. Throws
/// InvalidSupermodel (first check_supermodel violation), CyclicDependency.
TranslationResult translate(const SupermodelSchema& sm);

/// Reverses a translation step by step using the report. Throws NotInImage
/// when the schema contains elements no step accounts for.
SupermodelSchema translate_inverse(const TypedGraphSchema& t,
                                   const TranslationReport& r);

/// Report-free structural inversion, defined only on schemas shaped like
/// translate output. Composition or user-kind edges have no counterpart
/// and throw NotInImage.
SupermodelSchema translate_inverse(const TypedGraphSchema& t);

nlohmann::json supermodel_to_json(const SupermodelSchema& sm);
SupermodelSchema supermodel_from_json(const nlohmann::json& j);
nlohmann::json translation_report_to_json(const TranslationReport& r);
TranslationReport translation_report_from_json(const nlohmann::json& j);

/// Byte equality of canonical serializations.
bool supermodel_equals(const SupermodelSchema& a, const SupermodelSchema& b);

/// Human-readable differences, empty iff supermodel_equals.
std::vector<std::string> supermodel_diff(const SupermodelSchema& a,
                                         const SupermodelSchema& b);

/// Round-trip check: translate, invert, compare. Violations carry the
/// diff; translation failures are reported rather than thrown.
Verdict check_information_preservation(const SupermodelSchema& sm);

/// Maps each source instance through `mapper` and validates it against
/// the translated schema. The mapper sees the instance index and the
/// schema; a null mapper yields a MapperUnavailable violation.
using InstanceMapper = std::function<TypedGraphInstance(
    std::size_t index, const std::shared_ptr<const TypedGraphSchema>&)>;
Verdict check_semantics_preservation(const SupermodelSchema& sm,
                                     std::size_t instance_count,
                                     const InstanceMapper& mapper);

}  // namespace tgm
