#pragma once

#include <string>
#include <vector>

#include "tgm/supermodel.hpp"

namespace tgm {

struct ErAttribute {
  std::string name;
  std::string type;  // integer, decimal, text, boolean, date
  bool key = false;
};

struct ErParticipant {
  std::string entity;
  std::string role;  // optional, documentation only
  Multiplicity multiplicity;
};

struct ErEntity {
  std::string name;
  std::vector<ErAttribute> attributes;
};

struct ErRelationship {
  std::string name;
  std::vector<ErParticipant> participants;
  std::vector<ErAttribute> attributes;
};

struct ErIsa {
  std::string sub, super;
};

struct ErSchema {
  std::vector<ErEntity> entities;
  std::vector<ErRelationship> relationships;
  std::vector<ErIsa> isa_links;

  const ErEntity* find_entity(const std::string& name) const;
};

/// Textual ER notation:
///
///   schema := {decl}
///   decl   := "entity" name "{" {attr} "}"
///           | "rel" name "(" part {"," part} ")" "{" {attr} "}"
///           | "isa" name "<" name
///   part   := name role? card
///   card   := "(" int "," (int|"*") ")"
///   attr   := name ":" typeName ("key")?
///
/// Type names: int/integer, decimal/float, string/text, bool/boolean,
/// date. "#" starts a line comment. Throws SyntaxError with line:column,
/// UnsupportedFeature ("weak" entities), DuplicateLabel (entity or
/// attribute declared twice per owner), DanglingReference (participant or
/// isa endpoint unknown).
ErSchema parse_er(const std::string& text);

/// Entities become abstracts and relationships aggregations carrying the
/// declared participant multiplicities. Plain attributes become lexicals:
/// entity attributes placed by functions, relationship attributes attached
/// to the aggregation. A date attribute expands to a day/month/year record
/// aggregation under the attribute's name. Key attributes add a unique()
/// constraint on the owner. IS-A links become generalizations.
SupermodelSchema lift_er(const ErSchema& e);

}  // namespace tgm
