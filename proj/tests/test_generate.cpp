#include "doctest.h"
#include "tgm/abstraction.hpp"
#include "tgm/er.hpp"
#include "tgm/generate.hpp"
#include "tgm/instance.hpp"
#include "tgm/json_io.hpp"
#include "tgm/rdfs.hpp"
#include "tgm/relational.hpp"
#include "tgm/supermodel.hpp"
#include "tgm/xsd.hpp"

#include <fstream>
#include <memory>
#include <sstream>

using namespace tgm;

namespace {

std::string fixture(const std::string& name) {
  return std::string(TGM_FIXTURE_DIR) + "/" + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

using NamedSchema =
    std::pair<std::string, std::shared_ptr<const TypedGraphSchema>>;

const std::vector<NamedSchema>& corpus() {
  static const std::vector<NamedSchema> schemas = [] {
    std::vector<NamedSchema> out;
    auto keep = [&out](const std::string& name, TypedGraphSchema s) {
      out.emplace_back(name,
                       std::make_shared<TypedGraphSchema>(std::move(s)));
    };
    keep("review", load_schema_file(fixture("review.tgs.json")));
    auto enterprise = load_schema_file(fixture("enterprise.tgs.json"));
    auto groups =
        grouping_from_json(load_json_file(fixture("enterprise.groups.json")));
    keep("folded enterprise", fold(enterprise, groups).schema);
    keep("enterprise", std::move(enterprise));
    keep("relational",
         translate(lift_relational(
                       parse_relational(slurp(fixture("rst.ddl")))))
             .schema);
    keep("er", translate(lift_er(parse_er(slurp(fixture("hidders.er")))))
                   .schema);
    keep("xsd",
         translate(lift_xsd(parse_xsd(slurp(fixture("bookstore.xsd")))))
             .schema);
    keep("rdfs", translate(lift_rdfs(extract_rdfs(
                               parse_rdf(slurp(fixture("angles.nt"))))))
                     .schema);
    return out;
  }();
  return schemas;
}

}  // namespace

TEST_CASE("generated instances validate against their schema") {
  for (const auto& [name, schema] : corpus()) {
    std::size_t n = schema->node_types.size();
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      for (std::size_t size : {n, n + 5}) {
        CAPTURE(name);
        CAPTURE(seed);
        CAPTURE(size);
        TypedGraphInstance g = generate_instance(schema, seed, size);
        CHECK(g.nodes.size() >= n);
        CHECK(g.nodes.size() <= size);
        Verdict v = validate_instance(g);
        if (!v.ok()) {
          FAIL_CHECK("generated instance invalid: "
                     << v.violations().front().rule << " at '"
                     << v.violations().front().element
                     << "': " << v.violations().front().message);
        }
      }
    }
  }
}

TEST_CASE("generation is deterministic per seed") {
  for (const auto& [name, schema] : corpus()) {
    CAPTURE(name);
    std::size_t size = schema->node_types.size() + 3;
    auto a = instance_to_json(generate_instance(schema, 42, size)).dump();
    auto b = instance_to_json(generate_instance(schema, 42, size)).dump();
    CHECK(a == b);
  }
}

TEST_CASE("generation refuses sizes below one node per type") {
  auto schema = std::make_shared<TypedGraphSchema>(
      load_schema_file(fixture("enterprise.tgs.json")));
  try {
    generate_instance(schema, 1, 3);
    FAIL("expected UnsatisfiableSchema");
  } catch (const TgmError& e) {
    CHECK(e.code() == "UnsatisfiableSchema");
    CHECK(std::string(e.what()).find("7 node types") != std::string::npos);
  }
}

TEST_CASE("generation validates the schema first") {
  auto bad = std::make_shared<TypedGraphSchema>();
  bad->node_types.push_back({"Ghost", "no_such_type", nullptr});
  try {
    generate_instance(bad, 1, 1);
    FAIL("expected InvalidSchema");
  } catch (const TgmError& e) {
    CHECK(e.code() == "InvalidSchema");
  }
}

TEST_CASE("random values satisfy the type they were drawn from") {
  TypeRegistry reg;
  reg.add(make_range("stars", TypeKind::Integer, 1, 5));
  reg.add(make_range("ratio", TypeKind::Decimal, 0, 1));
  reg.add(make_enum("suit", {"clubs", "diamonds", "hearts", "spades"}));
  reg.add(make_record("point", {{"x", "integer"}, {"y", "integer"}}));
  reg.add(make_array("triple", "point", 3));
  reg.add(make_collection("words", TypeKind::List, "text", 1, 4));
  reg.add(make_collection("ids", TypeKind::Set, "integer", 2));
  reg.add(make_collection("pile", TypeKind::Bag, "suit", 0, 3));
  reg.add(make_optional("maybe_date", "date"));
  reg.add(make_union("mixed", {"stars", "suit", "point"}));
  reg.add(make_record("nested", {{"label", "text"},
                                 {"path", "triple"},
                                 {"tags", "words"},
                                 {"when", "maybe_date"}}));
  REQUIRE(reg.check().ok());

  for (const auto& [label, type] : reg.types()) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      CAPTURE(label);
      CAPTURE(seed);
      Value v = random_value(reg, label, seed);
      Verdict check = check_value(reg, label, v);
      if (!check.ok()) {
        FAIL_CHECK("sampled value rejected: "
                   << check.violations().front().message << " value "
                   << v.dump());
      }
      CHECK(random_value(reg, label, seed) == v);
    }
  }
}
