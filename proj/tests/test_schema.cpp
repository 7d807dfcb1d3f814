#include "doctest.h"
#include "tgm/json_io.hpp"
#include "tgm/schema.hpp"

#include <random>

using namespace tgm;

namespace {

constexpr std::uint32_t kStar = Multiplicity::kUnbounded;

TypedGraphSchema review_schema() {
  TypedGraphSchema s;
  s.registry.add(make_record("user_props", {{"name", "text"}}));
  s.registry.add(make_range("stars_range", TypeKind::Integer, 0, 5));
  s.registry.add(make_record("review_props", {{"stars", "stars_range"}}));
  s.registry.add(make_record("performance_props",
                             {{"title", "text"}, {"date", "date"}}));
  s.node_types.push_back({"User", "user_props", nullptr});
  s.node_types.push_back({"Review", "review_props", nullptr});
  s.node_types.push_back({"Performance", "performance_props", nullptr});

  EdgeType wrote;
  wrote.label = "wrote_review";
  wrote.tail = {{"User", {1, kStar}}};
  wrote.head = {{"Review", {0, 1}}};
  s.edge_types.push_back(wrote);

  EdgeType of;
  of.label = "review_of";
  of.tail = {{"Review", {1, 1}}};
  of.head = {{"Performance", {0, kStar}}};
  s.edge_types.push_back(of);
  return s;
}

}  // namespace

TEST_CASE("multiplicity rendering and membership") {
  CHECK(Multiplicity{0, kStar}.to_string() == "0..*");
  CHECK(Multiplicity{1, 1}.to_string() == "1..1");
  CHECK(Multiplicity{2, 5}.admits(2));
  CHECK(Multiplicity{2, 5}.admits(5));
  CHECK_FALSE(Multiplicity{2, 5}.admits(1));
  CHECK(Multiplicity{0, kStar}.admits(1000));
  CHECK(Multiplicity{0, kStar}.covers({2, 5}));
  CHECK_FALSE(Multiplicity{1, kStar}.covers({0, 2}));
}

TEST_CASE("most general multiplicity covers all inputs minimally") {
  CHECK(most_general_multiplicity({{0, 1}, {0, kStar}}) ==
        Multiplicity{0, kStar});
  CHECK(most_general_multiplicity({{2, 3}, {0, 5}}) == Multiplicity{0, 5});
  CHECK(most_general_multiplicity({{1, 1}}) == Multiplicity{1, 1});
  CHECK(most_general_multiplicity({{1, 2}, {3, 4}}) == Multiplicity{1, 4});
  CHECK_THROWS_AS(most_general_multiplicity({}), TgmError);

  // oracle: the result is a covering interval and every covering interval
  // covers it (least upper bound in the containment order)
  std::mt19937_64 rng(7);
  for (int round = 0; round < 200; ++round) {
    std::vector<Multiplicity> inputs;
    std::size_t n = 1 + rng() % 4;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t lo = rng() % 5;
      std::uint32_t hi = rng() % 3 == 0 ? kStar : lo + rng() % 5;
      inputs.push_back({lo, hi});
    }
    Multiplicity got = most_general_multiplicity(inputs);
    for (const auto& m : inputs) CHECK(got.covers(m));
    for (std::uint32_t lo = 0; lo <= 10; ++lo) {
      for (std::uint32_t hi : {lo, lo + 1, lo + 5, kStar}) {
        Multiplicity candidate{lo, hi};
        bool covers_all = true;
        for (const auto& m : inputs)
          covers_all = covers_all && candidate.covers(m);
        if (covers_all) CHECK(candidate.covers(got));
      }
    }
  }
}

TEST_CASE("a sound schema validates cleanly") {
  Verdict v = validate_schema(review_schema());
  CHECK(v.ok());
  CHECK(v.warnings().empty());
}

TEST_CASE("schema validation catches structural mistakes") {
  TypedGraphSchema s = review_schema();

  SUBCASE("participation of an undeclared node type") {
    s.edge_types[0].tail[0].node_type = "Visitor";
    CHECK(validate_schema(s).has("DanglingNodeType"));
  }
  SUBCASE("empty side") {
    s.edge_types[0].head.clear();
    CHECK(validate_schema(s).has("MissingParticipation"));
  }
  SUBCASE("min greater than max") {
    s.edge_types[0].tail[0].multiplicity = {3, 2};
    CHECK(validate_schema(s).has("MinExceedsMax"));
  }
  SUBCASE("max of zero admits nothing") {
    s.edge_types[0].head[0].multiplicity = {0, 0};
    CHECK(validate_schema(s).has("MaxNotPositive"));
  }
  SUBCASE("duplicate node type on one side") {
    s.edge_types[0].tail.push_back({"User", {0, 1}});
    CHECK(validate_schema(s).has("DuplicateParticipation"));
  }
  SUBCASE("labels are unique across node and edge types") {
    s.node_types.push_back({"wrote_review", "empty_record", nullptr});
    CHECK(validate_schema(s).has("DuplicateLabel"));
  }
  SUBCASE("property type must exist") {
    s.node_types[0].property_type = "missing_props";
    CHECK(validate_schema(s).has("DanglingPropertyType"));
  }
  SUBCASE("property type must be a record") {
    s.node_types[0].property_type = "text";
    CHECK(validate_schema(s).has("PropertyTypeNotRecord"));
  }
  SUBCASE("constraint scope must resolve") {
    s.constraints.push_back({"c1", "Ghost", "name = 'x'"});
    CHECK(validate_schema(s).has("UnknownScope"));
  }
  SUBCASE("constraints must parse") {
    s.constraints.push_back({"c1", "User", "name = = 3"});
    CHECK(validate_schema(s).has("ConstraintParseError"));
  }
  SUBCASE("constraints must type-check") {
    s.constraints.push_back({"c1", "User", "name > 3"});
    CHECK(validate_schema(s).has("ConstraintTypeError"));
  }
}

TEST_CASE("generalization edges are structural") {
  TypedGraphSchema s;
  s.node_types.push_back({"Clerk", "empty_record", nullptr});
  s.node_types.push_back({"Employee", "empty_record", nullptr});
  EdgeType isa;
  isa.label = "clerk_is_employee";
  isa.kind = EdgeKind::Generalization;
  isa.tail = {{"Clerk", {1, 1}}};
  isa.head = {{"Employee", {1, 1}}};
  s.edge_types.push_back(isa);
  CHECK(validate_schema(s).ok());

  SUBCASE("wrong multiplicity") {
    s.edge_types[0].head[0].multiplicity = {0, kStar};
    CHECK(validate_schema(s).has("GeneralizationShape"));
  }
  SUBCASE("carrying properties") {
    s.registry.add(make_record("p", {{"x", "text"}}));
    s.edge_types[0].property_type = "p";
    CHECK(validate_schema(s).has("GeneralizationShape"));
  }
}

TEST_CASE("anyType reachability is a warning, not a violation") {
  TypedGraphSchema s;
  s.registry.add(make_record("loose", {{"payload", "anyType"}}));
  s.node_types.push_back({"Thing", "loose", nullptr});
  Verdict v = validate_schema(s);
  CHECK(v.ok());
  REQUIRE(v.warnings().size() == 1);
  CHECK(v.warnings()[0].rule == "AnyType");
  CHECK(v.warnings()[0].element == "Thing");
}

TEST_CASE("hyper-node nesting validates recursively") {
  auto inner = std::make_shared<TypedGraphSchema>();
  inner->node_types.push_back({"Part", "no_such_record", nullptr});
  TypedGraphSchema outer;
  outer.node_types.push_back({"Stock", "empty_record", inner});
  Verdict v = validate_schema(outer);
  CHECK(v.has("DanglingPropertyType"));
  REQUIRE_FALSE(v.violations().empty());
  CHECK(v.violations()[0].element == "Stock/Part");
}

TEST_CASE("self-nesting is a containment cycle") {
  auto s = std::make_shared<TypedGraphSchema>();
  s->node_types.push_back({"Ouro", "empty_record", s});
  CHECK(validate_schema(*s).has("ContainmentCycle"));
  s->node_types.clear();  // break the shared_ptr cycle before teardown
}

TEST_CASE("schema equality ignores declaration order") {
  TypedGraphSchema a = review_schema();
  TypedGraphSchema b = review_schema();
  std::reverse(b.node_types.begin(), b.node_types.end());
  std::reverse(b.edge_types.begin(), b.edge_types.end());
  CHECK(schema_equals(a, b));

  TypedGraphSchema c = review_schema();
  c.edge_types[0].head[0].multiplicity = {0, 2};
  CHECK_FALSE(schema_equals(a, c));

  TypedGraphSchema broken;
  broken.node_types.push_back({"X", "nope", nullptr});
  CHECK_THROWS_WITH_AS(schema_equals(a, broken),
                       doctest::Contains("InvalidSchema"), TgmError);
}

TEST_CASE("schema json round-trips byte-identically") {
  TypedGraphSchema s = review_schema();
  s.constraints.push_back({"unique_name", "User", "unique(name)"});
  auto j1 = schema_to_json(s);
  TypedGraphSchema back = schema_from_json(j1);
  auto j2 = schema_to_json(back);
  CHECK(j1.dump(2) == j2.dump(2));
  CHECK(schema_equals(s, back));
}

TEST_CASE("nested schemas serialize inside their hyper-node") {
  auto inner = std::make_shared<TypedGraphSchema>();
  inner->registry.add(make_record("part_props", {{"name", "text"}}));
  inner->node_types.push_back({"Part", "part_props", nullptr});
  TypedGraphSchema outer;
  outer.node_types.push_back({"Stock", "empty_record", inner});

  auto j = schema_to_json(outer);
  REQUIRE(j["nodes"].size() == 1);
  REQUIRE(j["nodes"][0].contains("nested"));
  TypedGraphSchema back = schema_from_json(j);
  REQUIRE(back.node_types.size() == 1);
  REQUIRE(back.node_types[0].nested);
  CHECK(back.node_types[0].nested->find_node("Part") != nullptr);
  CHECK(schema_to_json(back).dump() == j.dump());
}

TEST_CASE("datatype json covers every kind") {
  TypeRegistry reg;
  reg.add(make_range("percent", TypeKind::Integer, 0, 100));
  reg.add(make_range("ratio", TypeKind::Decimal, 0, 1));
  reg.add(make_enum("color", {"red", "green"}));
  reg.add(make_record("pt", {{"x", "integer"}, {"y", "integer"}}));
  reg.add(make_array("triple", "integer", 3));
  reg.add(make_collection("many", TypeKind::List, "text", 1, 9));
  reg.add(make_collection("tags", TypeKind::Set, "text"));
  reg.add(make_collection("bag", TypeKind::Bag, "pt"));
  reg.add(make_optional("pt?", "pt"));
  reg.add(make_union("u", {"percent", "color"}));
  REQUIRE(reg.check().ok());

  for (const auto& [label, t] : reg.types()) {
    DataType back = datatype_from_json(datatype_to_json(t));
    CHECK(back == t);
  }
}

TEST_CASE("multiplicity json uses numbers and star") {
  CHECK(multiplicity_to_json({0, kStar}).dump() == R"({"max":"*","min":0})");
  CHECK(multiplicity_to_json({2, 7}).dump() == R"({"max":7,"min":2})");
  CHECK(multiplicity_from_json({{"min", 1}, {"max", "*"}}) ==
        Multiplicity{1, kStar});
  CHECK(multiplicity_from_json({{"min", 0}, {"max", 4}}) == Multiplicity{0, 4});
  CHECK_THROWS_AS(multiplicity_from_json({{"min", -2}, {"max", 4}}), TgmError);
  CHECK_THROWS_AS(multiplicity_from_json({{"min", 0}, {"max", "many"}}),
                  TgmError);
}
