#include <memory>
#include <string>

#include "doctest.h"
#include "fixture_io.hpp"
#include "tgm/er.hpp"

using namespace tgm;

namespace {

constexpr std::uint32_t kStar = Multiplicity::kUnbounded;

Value contract_props(int salary) {
  Value v = Value::object();
  v["salary"] = salary;
  v["begin_date"] = {{"day", 1}, {"month", 2}, {"year", 2020}};
  v["end_date"] = {{"day", 31}, {"month", 12}, {"year", 2024}};
  return v;
}

}  // namespace

TEST_CASE("er parser reads the contracts fixture") {
  ErSchema e = parse_er(read_fixture("hidders.er"));
  REQUIRE(e.entities.size() == 2);
  CHECK(e.find_entity("Employee"));
  CHECK(e.find_entity("Department"));
  REQUIRE(e.relationships.size() == 1);

  const ErRelationship& contract = e.relationships[0];
  CHECK(contract.name == "Contract");
  REQUIRE(contract.participants.size() == 2);
  CHECK(contract.participants[0].entity == "Employee");
  CHECK(contract.participants[0].multiplicity == Multiplicity{1, 1});
  CHECK(contract.participants[1].entity == "Department");
  CHECK(contract.participants[1].multiplicity == Multiplicity{0, kStar});
  REQUIRE(contract.attributes.size() == 3);
  CHECK(contract.attributes[0].name == "salary");
  CHECK(contract.attributes[0].type == "integer");
  CHECK(contract.attributes[1].type == "date");
  CHECK(e.isa_links.empty());
}

TEST_CASE("er parser details") {
  SUBCASE("type aliases and roles") {
    ErSchema e = parse_er(
        "entity A { x : float  y : string  z : bool }\n"
        "entity B {}\n"
        "rel R (A boss (1,1), B (0,*)) {}\n");
    CHECK(e.entities[0].attributes[0].type == "decimal");
    CHECK(e.entities[0].attributes[1].type == "text");
    CHECK(e.entities[0].attributes[2].type == "boolean");
    CHECK(e.relationships[0].participants[0].role == "boss");
  }
  SUBCASE("key attribute") {
    ErSchema e = parse_er("entity P { id : int key  name : string }");
    CHECK(e.entities[0].attributes[0].key);
    CHECK_FALSE(e.entities[0].attributes[1].key);
  }
  SUBCASE("syntax error carries line and column") {
    try {
      parse_er("entity A {\n  x ,\n}");
      FAIL("expected SyntaxError");
    } catch (const TgmError& e) {
      CHECK(e.code() == "SyntaxError");
      CHECK(std::string(e.what()).find("2:") != std::string::npos);
    }
  }
  SUBCASE("weak entities are unsupported") {
    try {
      parse_er("weak entity A {}");
      FAIL("expected UnsupportedFeature");
    } catch (const TgmError& e) {
      CHECK(e.code() == "UnsupportedFeature");
    }
  }
  SUBCASE("duplicate entity") {
    CHECK_THROWS_AS(parse_er("entity A {}\nentity A {}"), TgmError);
  }
  SUBCASE("unknown participant") {
    try {
      parse_er("entity A {}\nrel R (A (1,1), Ghost (0,*)) {}");
      FAIL("expected DanglingReference");
    } catch (const TgmError& e) {
      CHECK(e.code() == "DanglingReference");
    }
  }
  SUBCASE("unknown isa endpoint") {
    CHECK_THROWS_AS(parse_er("entity A {}\nisa A < Ghost"), TgmError);
  }
}

TEST_CASE("lifting the contracts schema") {
  SupermodelSchema sm = lift_er(parse_er(read_fixture("hidders.er")));
  CHECK(sm.source_model == "er");
  CHECK(sm.elements.size() == 12);
  CHECK(check_supermodel(sm).ok());

  const MetaElement* contract = sm.find("Contract");
  REQUIRE(contract);
  CHECK(contract->kind == MetaKind::Aggregation);
  REQUIRE(contract->members.size() == 2);
  CHECK(contract->members[0].element == "Employee");
  CHECK(contract->members[0].multiplicity == Multiplicity{1, 1});
  REQUIRE(contract->attachments.size() == 3);
  CHECK(contract->attachments[0] == "Contract.salary");
  CHECK(contract->attachments[1] == "Contract.begin_date");

  // a date attribute expands to a day/month/year record aggregation
  const MetaElement* begin = sm.find("Contract.begin_date");
  REQUIRE(begin);
  CHECK(begin->kind == MetaKind::Aggregation);
  REQUIRE(begin->members.size() == 3);
  CHECK(begin->members[0].element == "Contract.begin_date.day");
  CHECK(begin->members[0].multiplicity == Multiplicity{1, 1});
  CHECK(sm.find("Contract.begin_date.year")->datatype == "integer");

  CHECK(check_information_preservation(sm).ok());
}

TEST_CASE("lifting the isa variant adds a generalization") {
  SupermodelSchema sm = lift_er(parse_er(read_fixture("hidders_isa.er")));
  CHECK(sm.elements.size() == 14);

  const MetaElement* gen = sm.find("Clerk_isa_Employee");
  REQUIRE(gen);
  CHECK(gen->kind == MetaKind::Generalization);
  CHECK(gen->sub == "Clerk");
  CHECK(gen->super == "Employee");

  TranslationResult tr = translate(sm);
  CHECK(tr.schema.node_types.size() == 3);
  REQUIRE(tr.schema.edge_types.size() == 2);
  const EdgeType* isa = tr.schema.find_edge("Clerk_isa_Employee");
  REQUIRE(isa);
  CHECK(isa->kind == EdgeKind::Generalization);
  CHECK(isa->tail[0].node_type == "Clerk");
  CHECK(isa->head[0].node_type == "Employee");

  CHECK(check_information_preservation(sm).ok());
}

TEST_CASE("key attributes become unique constraints") {
  SupermodelSchema sm = lift_er(
      parse_er("entity P { id : int key  name : string }"));
  REQUIRE(sm.constraints.size() == 1);
  CHECK(sm.constraints[0].label == "P_id_key");
  CHECK(sm.constraints[0].scope == "P");
  CHECK(sm.constraints[0].expression == "unique(id)");

  auto schema = std::make_shared<TypedGraphSchema>(translate(sm).schema);
  TypedGraphInstance g;
  g.schema = schema;
  g.add_node("p1", "P", {{"id", 1}, {"name", "ada"}});
  g.add_node("p2", "P", {{"id", 2}, {"name", "bob"}});
  CHECK(validate_instance(g).ok());
  g.nodes.at("p2").properties["id"] = 1;
  CHECK_FALSE(validate_instance(g).ok());
}

TEST_CASE("contracts schema translates and admits instances") {
  SupermodelSchema sm = lift_er(parse_er(read_fixture("hidders.er")));
  TranslationResult tr = translate(sm);
  CHECK(validate_schema(tr.schema).ok());
  CHECK(tr.schema.node_types.size() == 2);
  REQUIRE(tr.schema.edge_types.size() == 1);

  const EdgeType& contract = tr.schema.edge_types[0];
  CHECK(contract.kind == EdgeKind::Aggregation);
  CHECK(contract.tail[0].node_type == "Employee");
  CHECK(contract.tail[0].multiplicity == Multiplicity{1, 1});
  CHECK(contract.head[0].node_type == "Department");

  const DataType& props = tr.schema.registry.at(contract.property_type);
  REQUIRE(props.components.size() == 3);
  CHECK(props.components[0].name == "salary");
  CHECK(props.components[0].type == "integer");
  CHECK(props.components[1].name == "begin_date");
  const DataType& begin = tr.schema.registry.at(props.components[1].type);
  CHECK(begin.kind == TypeKind::Record);
  REQUIRE(begin.components.size() == 3);
  CHECK(begin.components[0].name == "day");

  auto schema = std::make_shared<TypedGraphSchema>(std::move(tr.schema));
  TypedGraphInstance g;
  g.schema = schema;
  g.add_node("e1", "Employee");
  g.add_node("e2", "Employee");
  g.add_node("d1", "Department");
  g.add_edge("c1", "Contract", {"e1"}, {"d1"}, contract_props(50000));
  g.add_edge("c2", "Contract", {"e2"}, {"d1"}, contract_props(60000));
  CHECK(validate_instance(g).ok());

  SUBCASE("every employee holds exactly one contract") {
    g.edges.erase("c2");
    Verdict v = validate_instance(g);
    CHECK_FALSE(v.ok());
    bool anchored_at_e2 = false;
    for (const auto& violation : v.violations())
      if (violation.element == "e2") anchored_at_e2 = true;
    CHECK(anchored_at_e2);
  }
  SUBCASE("a second contract for one employee is as bad as none") {
    g.add_edge("c3", "Contract", {"e1"}, {"d1"}, contract_props(1));
    CHECK_FALSE(validate_instance(g).ok());
  }
  SUBCASE("edge properties must satisfy the record") {
    g.edges.at("c1").properties["salary"] = "lots";
    CHECK_FALSE(validate_instance(g).ok());
  }
}
