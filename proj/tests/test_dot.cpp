#include "doctest.h"
#include "tgm/abstraction.hpp"
#include "tgm/dot.hpp"
#include "tgm/json_io.hpp"
#include "tgm/relational.hpp"
#include "tgm/supermodel.hpp"

#include <fstream>
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

}  // namespace

TEST_CASE("dot export renders binary schemas as records and arrows") {
  auto s = load_schema_file(fixture("review.tgs.json"));
  std::string dot = to_dot(s);

  CHECK(dot ==
        "digraph schema {\n"
        "  rankdir=LR;\n"
        "  node [shape=record, fontsize=10];\n"
        "  edge [fontsize=9];\n"
        "  \"Performance\" [label=\"{Performance|date : date\\l}\"];\n"
        "  \"Review\" [label=\"{Review|stars : five_stars\\l}\"];\n"
        "  \"User\" [label=\"{User|name : text\\l}\"];\n"
        "  \"Review\" -> \"Performance\" "
        "[label=\"review_of : plain\\n(1..1) -> (0..*)\"];\n"
        "  \"User\" -> \"Review\" "
        "[label=\"wrote : plain\\n(1..*) -> (1..1)\"];\n"
        "}\n");
}

TEST_CASE("dot export of an empty schema is an empty digraph") {
  TypedGraphSchema empty;
  CHECK(to_dot(empty) == "digraph schema {\n}\n");
}

TEST_CASE("dot export draws hyper-edges as diamonds") {
  auto sm = lift_relational(parse_relational(slurp(fixture("rst.ddl"))));
  auto tr = translate(sm);
  std::string dot = to_dot(tr.schema);

  CHECK(dot.find("\"edge:RST\" [shape=diamond, "
                 "label=\"RST : aggregation\\ncol4 : text?\"];") !=
        std::string::npos);
  CHECK(dot.find("\"product\" -> \"edge:RST\" "
                 "[label=\"(0..*)\", arrowhead=none];") != std::string::npos);
  CHECK(dot.find("\"edge:RST\" -> \"client\" [label=\"(0..*)\"];") !=
        std::string::npos);
  CHECK(dot.find("\"edge:RST\" -> \"supplier\" [label=\"(0..*)\"];") !=
        std::string::npos);
}

TEST_CASE("dot export marks hyper-nodes and their nested content") {
  auto s = load_schema_file(fixture("enterprise.tgs.json"));
  auto spec =
      grouping_from_json(load_json_file(fixture("enterprise.groups.json")));
  FoldResult fr = fold(s, spec);
  std::string dot = to_dot(fr.schema);

  std::size_t hyper = 0;
  for (std::size_t at = dot.find(" (hyper-node)"); at != std::string::npos;
       at = dot.find(" (hyper-node)", at + 1))
    ++hyper;
  CHECK(hyper == 3);
  CHECK(dot.find("nested: CustOrder, Customer\\l") != std::string::npos);
  CHECK(dot.find("nested: Part, Product\\l") != std::string::npos);
  CHECK(dot.find("nested: PurchOrder, Supplier\\l") != std::string::npos);
  CHECK(dot.find("\"Sales\" -> \"Stock\" "
                 "[label=\"from/orders : plain\\n(0..*) -> (0..*)\"]") !=
        std::string::npos);
}

TEST_CASE("dot export refuses invalid schemas") {
  TypedGraphSchema bad;
  bad.node_types.push_back({"Ghost", "no_such_type", nullptr});
  try {
    to_dot(bad);
    FAIL("expected InvalidSchema");
  } catch (const TgmError& e) {
    CHECK(e.code() == "InvalidSchema");
  }
}

TEST_CASE("dot export is deterministic across serialization round trips") {
  for (const char* name : {"review.tgs.json", "enterprise.tgs.json"}) {
    auto s = load_schema_file(fixture(name));
    std::string first = to_dot(s);
    CHECK(first == to_dot(s));
    auto reparsed = schema_from_json(schema_to_json(s));
    CHECK(first == to_dot(reparsed));
  }
}
