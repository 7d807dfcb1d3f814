#include <map>
#include <memory>
#include <string>

#include "doctest.h"
#include "fixture_io.hpp"
#include "generators.hpp"
#include "tgm/relational.hpp"

using namespace tgm;

namespace {

constexpr std::uint32_t kStar = Multiplicity::kUnbounded;

RelationalSchema offers_schema() {
  return parse_relational(read_fixture("rst.ddl"));
}

std::map<std::string, std::string> offers_rows() {
  return {
      {"product", read_fixture("rst_rows/product.csv")},
      {"client", read_fixture("rst_rows/client.csv")},
      {"supplier", read_fixture("rst_rows/supplier.csv")},
      {"RST", read_fixture("rst_rows/RST.csv")},
  };
}

}  // namespace

TEST_CASE("ddl parser reads the offers fixture") {
  RelationalSchema r = offers_schema();
  REQUIRE(r.tables.size() == 4);

  const RelationalTable* product = r.find_table("product");
  REQUIRE(product);
  CHECK(product->columns.size() == 2);
  CHECK(product->columns[0].name == "pid");
  CHECK(product->columns[0].type == "integer");
  CHECK_FALSE(product->columns[0].nullable);  // primary key implies NOT NULL
  CHECK(product->columns[1].type == "text");
  CHECK_FALSE(product->columns[1].nullable);
  CHECK(product->primary_key == std::vector<std::string>{"pid"});
  CHECK(product->foreign_keys.empty());

  const RelationalTable* supplier = r.find_table("supplier");
  REQUIRE(supplier);
  CHECK(supplier->find_column("rating")->type == "decimal");
  CHECK(supplier->find_column("rating")->nullable);

  const RelationalTable* rst = r.find_table("RST");
  REQUIRE(rst);
  CHECK(rst->primary_key == std::vector<std::string>{"fk1", "fk2", "fk3"});
  REQUIRE(rst->foreign_keys.size() == 3);
  CHECK(rst->foreign_keys[0].references == "product");
  CHECK(rst->foreign_keys[1].references == "client");
  CHECK(rst->foreign_keys[2].references == "supplier");
  CHECK(rst->in_foreign_key("fk2"));
  CHECK_FALSE(rst->in_foreign_key("col4"));

  CHECK_FALSE(is_join_table(*product));
  CHECK_FALSE(is_join_table(*supplier));
  CHECK(is_join_table(*rst));
}

TEST_CASE("ddl parser rejections") {
  SUBCASE("syntax error carries line and column") {
    try {
      parse_relational("CREATE TABLE t (\n  a INT,\n);");
      FAIL("expected SyntaxError");
    } catch (const TgmError& e) {
      CHECK(e.code() == "SyntaxError");
      CHECK(std::string(e.what()).find("3:") != std::string::npos);
    }
  }
  SUBCASE("unsupported clause") {
    CHECK_THROWS_AS(
        parse_relational("CREATE TABLE t (a INT, CHECK (a > 0));"), TgmError);
    CHECK_THROWS_AS(
        parse_relational("CREATE TABLE t (a INT UNIQUE);"), TgmError);
    CHECK_THROWS_AS(
        parse_relational("CREATE TABLE t (a INT DEFAULT 3);"), TgmError);
  }
  SUBCASE("duplicate column") {
    CHECK_THROWS_AS(parse_relational("CREATE TABLE t (a INT, a INT);"),
                    TgmError);
  }
  SUBCASE("foreign key to an unknown table") {
    try {
      parse_relational(
          "CREATE TABLE t (a INT, FOREIGN KEY (a) REFERENCES ghost);");
      FAIL("expected DanglingReference");
    } catch (const TgmError& e) {
      CHECK(e.code() == "DanglingReference");
    }
  }
  SUBCASE("keywords are case-insensitive, comments skipped") {
    RelationalSchema r = parse_relational(
        "-- a comment\ncreate table T (x int not null, primary key (x));");
    REQUIRE(r.tables.size() == 1);
    CHECK(r.tables[0].primary_key == std::vector<std::string>{"x"});
  }
}

TEST_CASE("csv parser handles quoting") {
  auto rows = parse_csv("a,b\n1,\"x, y\"\n2,\"he said \"\"hi\"\"\"\n3,\"two\nlines\"\n");
  REQUIRE(rows.size() == 4);
  CHECK(rows[1][1] == "x, y");
  CHECK(rows[2][1] == "he said \"hi\"");
  CHECK(rows[3][1] == "two\nlines");

  CHECK(parse_csv("").empty());
  auto bare = parse_csv("a,b");  // no trailing newline
  REQUIRE(bare.size() == 1);
  CHECK(bare[0] == std::vector<std::string>{"a", "b"});
  auto empties = parse_csv("a,,c\n");
  CHECK(empties[0] == std::vector<std::string>{"a", "", "c"});
}

TEST_CASE("lifting the offers schema") {
  RelationalSchema r = offers_schema();
  SupermodelSchema sm = lift_relational(r);
  CHECK(sm.source_model == "relational");
  CHECK(sm.elements.size() == 22);
  CHECK(check_supermodel(sm).ok());

  int abstracts = 0, aggregations = 0, lexicals = 0, functions = 0;
  for (const auto& e : sm.elements) {
    if (e.kind == MetaKind::Abstract) ++abstracts;
    if (e.kind == MetaKind::Aggregation) ++aggregations;
    if (e.kind == MetaKind::Lexical) ++lexicals;
    if (e.kind == MetaKind::Function) ++functions;
  }
  CHECK(abstracts == 3);
  CHECK(aggregations == 1);
  CHECK(lexicals == 9);
  CHECK(functions == 9);

  const MetaElement* rst = sm.find("RST");
  REQUIRE(rst);
  REQUIRE(rst->members.size() == 3);
  CHECK(rst->members[0].element == "product");
  CHECK(rst->members[1].element == "client");
  CHECK(rst->members[2].element == "supplier");
  CHECK(rst->members[0].multiplicity == Multiplicity{0, kStar});

  // foreign key columns never surface as lexicals
  CHECK(sm.find("RST.fk1") == nullptr);
  CHECK(sm.find("RST.col4") != nullptr);
  const MetaElement* region_place = sm.find("client.region#place");
  REQUIRE(region_place);
  CHECK(region_place->optional);
  CHECK_FALSE(sm.find("client.cid#place")->optional);
}

TEST_CASE("lift rejects a partial key/foreign-key overlap") {
  RelationalSchema r = parse_relational(
      "CREATE TABLE a (x INT, PRIMARY KEY (x));"
      "CREATE TABLE b (x INT, y INT, PRIMARY KEY (x, y),"
      " FOREIGN KEY (x) REFERENCES a);");
  try {
    lift_relational(r);
    FAIL("expected AmbiguousJoinTable");
  } catch (const TgmError& e) {
    CHECK(e.code() == "AmbiguousJoinTable");
  }
}

TEST_CASE("offers schema translates to three node types and a hyper-edge") {
  SupermodelSchema sm = lift_relational(offers_schema());
  TranslationResult tr = translate(sm);
  CHECK(validate_schema(tr.schema).ok());
  CHECK(tr.schema.node_types.size() == 3);
  REQUIRE(tr.schema.edge_types.size() == 1);

  const EdgeType& rst = tr.schema.edge_types[0];
  CHECK(rst.label == "RST");
  CHECK(rst.kind == EdgeKind::Aggregation);
  REQUIRE(rst.tail.size() == 1);
  REQUIRE(rst.head.size() == 2);
  CHECK(rst.tail[0].node_type == "product");
  CHECK(rst.head[0].node_type == "client");
  CHECK(rst.head[1].node_type == "supplier");

  const DataType& rst_props = tr.schema.registry.at(rst.property_type);
  REQUIRE(rst_props.components.size() == 1);
  CHECK(rst_props.components[0].name == "col4");

  const NodeType* client = tr.schema.find_node("client");
  REQUIRE(client);
  const DataType& client_props = tr.schema.registry.at(client->property_type);
  REQUIRE(client_props.components.size() == 3);
  CHECK(client_props.components[0].name == "cid");
  CHECK(client_props.components[0].type == "integer");
  CHECK(client_props.components[2].name == "region");
  CHECK(tr.schema.registry.at(client_props.components[2].type).kind ==
        TypeKind::Optional);

  CHECK(check_information_preservation(sm).ok());
}

TEST_CASE("csv rows map onto the translated offers schema") {
  RelationalSchema r = offers_schema();
  SupermodelSchema sm = lift_relational(r);
  auto schema = std::make_shared<TypedGraphSchema>(translate(sm).schema);

  TypedGraphInstance g = map_relational_instance(r, offers_rows(), schema);
  CHECK(g.nodes.size() == 6);
  CHECK(g.edges.size() == 2);
  REQUIRE(g.nodes.count("client:10"));
  CHECK(g.nodes.at("client:10").properties["cname"] == "Acme");
  REQUIRE(g.edges.count("RST:1"));
  const InstanceEdge& offer = g.edges.at("RST:1");
  CHECK(offer.tails == std::vector<std::string>{"product:1"});
  CHECK(offer.heads == std::vector<std::string>{"client:10", "supplier:100"});
  CHECK(offer.properties["col4"] == "spring offer, 10% off");
  CHECK(validate_instance(g).ok());

  SUBCASE("missing per-table csv just contributes no rows") {
    auto rows = offers_rows();
    rows.erase("RST");
    TypedGraphInstance partial = map_relational_instance(r, rows, schema);
    CHECK(partial.nodes.size() == 6);
    CHECK(partial.edges.empty());
    CHECK(validate_instance(partial).ok());
  }
}

TEST_CASE("csv integrity violations") {
  RelationalSchema r = offers_schema();
  auto schema = std::make_shared<TypedGraphSchema>(
      translate(lift_relational(r)).schema);
  auto rows = offers_rows();
  auto expect_integrity = [&](const std::map<std::string, std::string>& csv,
                              const std::string& fragment) {
    try {
      map_relational_instance(r, csv, schema);
      FAIL("expected SourceIntegrityViolation for " << fragment);
    } catch (const TgmError& e) {
      CHECK(e.code() == "SourceIntegrityViolation");
      CHECK(std::string(e.what()).find(fragment) != std::string::npos);
    }
  };

  SUBCASE("unknown header column") {
    rows["product"] = "pid,pname,ghost\n1,Laptop,x\n";
    expect_integrity(rows, "unknown column 'ghost'");
  }
  SUBCASE("unknown table") {
    rows["warehouse"] = "wid\n1\n";
    expect_integrity(rows, "no such table");
  }
  SUBCASE("duplicate primary key") {
    rows["product"] = "pid,pname\n1,Laptop\n1,Phone\n";
    expect_integrity(rows, "duplicate key '1'");
  }
  SUBCASE("dangling join reference") {
    rows["RST"] = "fk1,fk2,fk3,col4\n9,10,100,x\n";
    expect_integrity(rows, "missing product row '9'");
  }
  SUBCASE("unparsable integer") {
    rows["product"] = "pid,pname\nseven,Laptop\n";
    expect_integrity(rows, "unparsable value 'seven'");
  }
  SUBCASE("missing primary key value") {
    rows["product"] = "pid,pname\n,Laptop\n";
    expect_integrity(rows, "primary key value is missing");
  }
}

TEST_CASE("tightened participations reject a client in two offers") {
  RelationalSchema r = offers_schema();
  SupermodelSchema sm = lift_relational(r);
  for (auto& e : sm.elements) {
    if (e.id != "RST") continue;
    e.members[1].multiplicity = {1, 1};
    e.members[2].multiplicity = {1, 1};
  }
  auto schema = std::make_shared<TypedGraphSchema>(translate(sm).schema);

  CHECK(validate_instance(map_relational_instance(r, offers_rows(), schema))
            .ok());

  auto rows = offers_rows();
  rows["RST"] = "fk1,fk2,fk3,col4\n1,10,100,a\n2,10,101,b\n";
  Verdict v = validate_instance(map_relational_instance(r, rows, schema));
  CHECK_FALSE(v.ok());
  bool found = false;
  for (const auto& violation : v.violations())
    if (violation.element == "client:10") found = true;
  CHECK(found);
}

TEST_CASE("generated csv rows always map and validate") {
  RelationalSchema r = offers_schema();
  auto schema = std::make_shared<TypedGraphSchema>(
      translate(lift_relational(r)).schema);
  for (unsigned seed = 1; seed <= 10; ++seed) {
    CAPTURE(seed);
    TypedGraphInstance g =
        map_relational_instance(r, random_relational_rows(r, seed), schema);
    Verdict v = validate_instance(g);
    CHECK(v.ok());
  }
}
