#include "doctest.h"
#include "tgm/instance.hpp"
#include "tgm/json_io.hpp"

#include <random>

using namespace tgm;

namespace {

constexpr std::uint32_t kStar = Multiplicity::kUnbounded;

std::shared_ptr<const TypedGraphSchema> review_schema() {
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
  return std::make_shared<const TypedGraphSchema>(std::move(s));
}

/// Billy reviewed a performance with five stars.
TypedGraphInstance billy_graph() {
  TypedGraphInstance g;
  g.schema = review_schema();
  g.add_node("billy", "User", {{"name", "Billy"}});
  g.add_node("r1", "Review", {{"stars", 5}});
  g.add_node("p1", "Performance",
             {{"title", "Winter Concert"}, {"date", "2012-07-29"}});
  g.add_edge("w1", "wrote_review", {"billy"}, {"r1"});
  g.add_edge("o1", "review_of", {"r1"}, {"p1"});
  return g;
}

}  // namespace

TEST_CASE("a consistent instance validates cleanly") {
  CHECK(validate_instance(billy_graph()).ok());
}

TEST_CASE("removing the authorship edge leaves exactly one violation") {
  TypedGraphInstance g = billy_graph();
  g.edges.erase("w1");
  Verdict v = validate_instance(g);
  REQUIRE(v.violations().size() == 1);
  const Violation& viol = v.violations()[0];
  CHECK(viol.rule == "MultiplicityViolation");
  CHECK(viol.element == "billy");
  CHECK(viol.message ==
        "participation User (tail of wrote_review): 0 outside 1..*");
}

TEST_CASE("a review written by two users breaks the head multiplicity") {
  TypedGraphInstance g = billy_graph();
  g.add_node("anna", "User", {{"name", "Anna"}});
  g.add_edge("w2", "wrote_review", {"anna"}, {"r1"});
  Verdict v = validate_instance(g);
  REQUIRE(v.violations().size() == 1);
  CHECK(v.violations()[0].element == "r1");
  CHECK(v.violations()[0].message ==
        "participation Review (head of wrote_review): 2 outside 0..1");
}

TEST_CASE("a review needs its performance") {
  TypedGraphInstance g = billy_graph();
  g.edges.erase("o1");
  Verdict v = validate_instance(g);
  REQUIRE(v.violations().size() == 1);
  CHECK(v.violations()[0].element == "r1");
  CHECK(v.violations()[0].message ==
        "participation Review (tail of review_of): 0 outside 1..1");
}

TEST_CASE("endpoint defects are each named") {
  TypedGraphInstance g = billy_graph();

  SUBCASE("endpoint that is no node") {
    g.edges.at("w1").tails = {"ghost"};
    Verdict v = validate_instance(g);
    CHECK(v.has("UnknownEndpoint"));
  }
  SUBCASE("endpoint of the wrong type") {
    g.edges.at("w1").tails = {"p1"};
    CHECK(validate_instance(g).has("EndpointTypeMismatch"));
  }
  SUBCASE("repeated endpoint") {
    g.edges.at("w1").tails = {"billy", "billy"};
    CHECK(validate_instance(g).has("DuplicateEndpoint"));
  }
  SUBCASE("empty side") {
    g.edges.at("w1").tails = {};
    CHECK(validate_instance(g).has("EmptyEndpointSet"));
  }
  SUBCASE("undeclared types") {
    g.add_node("x", "Ghost");
    g.add_edge("e9", "haunts", {"x"}, {"billy"});
    Verdict v = validate_instance(g);
    CHECK(v.has("UnknownNodeType"));
    CHECK(v.has("UnknownEdgeType"));
  }
}

TEST_CASE("property violations carry the value path") {
  TypedGraphInstance g = billy_graph();
  g.nodes.at("r1").properties["stars"] = 7;
  Verdict v = validate_instance(g);
  REQUIRE(v.violations().size() == 1);
  CHECK(v.violations()[0].rule == "InvalidProperty");
  CHECK(v.violations()[0].element == "r1");
  CHECK(v.violations()[0].message == "$.stars: 7 out of range 0..5");
}

TEST_CASE("instance constraints evaluate per scoped element") {
  auto base = review_schema();
  TypedGraphSchema s = *base;
  s.constraints.push_back({"named", "User", "name != ''"});
  s.constraints.push_back({"distinct_names", "User", "unique(name)"});
  s.constraints.push_back({"busy", "User", "count(wrote_review) <= 1"});

  TypedGraphInstance g = billy_graph();
  g.schema = std::make_shared<const TypedGraphSchema>(std::move(s));
  CHECK(validate_instance(g).ok());

  SUBCASE("violated comparison") {
    g.nodes.at("billy").properties["name"] = "";
    Verdict v = validate_instance(g);
    REQUIRE(v.violations().size() == 1);
    CHECK(v.violations()[0].rule == "ConstraintViolated");
    CHECK(v.violations()[0].element == "billy");
  }
  SUBCASE("unique flags every colliding element") {
    g.add_node("b2", "User", {{"name", "Billy"}});
    g.add_node("r2", "Review", {{"stars", 1}});
    g.add_edge("w2", "wrote_review", {"b2"}, {"r2"});
    g.add_edge("o2", "review_of", {"r2"}, {"p1"});
    Verdict v = validate_instance(g);
    int unique_violations = 0;
    for (const auto& viol : v.violations())
      if (viol.message.find("distinct_names") != std::string::npos)
        ++unique_violations;
    CHECK(unique_violations == 2);
  }
  SUBCASE("count over incident edges") {
    g.add_node("r2", "Review", {{"stars", 1}});
    g.add_edge("w2", "wrote_review", {"billy"}, {"r2"});
    g.add_edge("o2", "review_of", {"r2"}, {"p1"});
    Verdict v = validate_instance(g);
    REQUIRE(v.violations().size() == 1);
    CHECK(v.violations()[0].element == "billy");
    CHECK(v.violations()[0].message.find("busy") != std::string::npos);
  }
}

TEST_CASE("evaluate_constraint addresses one element") {
  TypedGraphInstance g = billy_graph();
  Constraint c{"stars_ok", "Review", "stars >= 0 and stars <= 5"};
  CHECK(evaluate_constraint(g, c, "r1"));
  CHECK_THROWS_WITH_AS(evaluate_constraint(g, c, "billy"),
                       doctest::Contains("ScopeMismatch"), TgmError);
  CHECK_THROWS_WITH_AS(evaluate_constraint(g, c, "zzz"),
                       doctest::Contains("UnknownId"), TgmError);
}

TEST_CASE("hyper-node contents validate against the nested schema") {
  auto inner = std::make_shared<TypedGraphSchema>();
  inner->registry.add(make_record("part_props", {{"name", "text"}}));
  inner->node_types.push_back({"Part", "part_props", nullptr});

  TypedGraphSchema outer;
  outer.node_types.push_back({"Stock", "empty_record", inner});
  auto outer_ptr = std::make_shared<const TypedGraphSchema>(std::move(outer));

  TypedGraphInstance g;
  g.schema = outer_ptr;
  auto sub = std::make_shared<TypedGraphInstance>();
  sub->schema = inner;
  sub->add_node("p1", "Part", {{"name", "bolt"}});
  g.add_node("s1", "Stock").nested = sub;
  CHECK(validate_instance(g).ok());

  SUBCASE("violations inside are prefixed with the outer id") {
    sub->nodes.at("p1").properties["name"] = 7;
    Verdict v = validate_instance(g);
    REQUIRE(v.violations().size() == 1);
    CHECK(v.violations()[0].element == "s1/p1");
  }
  SUBCASE("missing sub-instance") {
    g.nodes.at("s1").nested = nullptr;
    CHECK(validate_instance(g).has("MissingNested"));
  }
  SUBCASE("sub-instance under a plain node") {
    TypedGraphInstance plain;
    TypedGraphSchema ps;
    ps.node_types.push_back({"Flat", "empty_record", nullptr});
    plain.schema = std::make_shared<const TypedGraphSchema>(std::move(ps));
    plain.add_node("f1", "Flat").nested = sub;
    CHECK(validate_instance(plain).has("UnexpectedNested"));
  }
  SUBCASE("sub-instance built for a different schema") {
    auto other = std::make_shared<TypedGraphSchema>();
    other->node_types.push_back({"Part", "empty_record", nullptr});
    auto sub2 = std::make_shared<TypedGraphInstance>();
    sub2->schema = other;
    sub2->add_node("p1", "Part");
    g.nodes.at("s1").nested = sub2;
    CHECK(validate_instance(g).has("NestedSchemaMismatch"));
  }
}

TEST_CASE("batched insert of a review with its edges is atomic") {
  TypedGraphInstance g = billy_graph();

  std::vector<Mutation> batch = {
      Mutation::insert_node("r2", "Review", {{"stars", 3}}),
      Mutation::insert_edge("w2", "wrote_review", {"billy"}, {"r2"}),
      Mutation::insert_edge("o2", "review_of", {"r2"}, {"p1"}),
  };
  MutationResult ok = apply_mutations(g, batch);
  CHECK(ok.accepted);
  CHECK(ok.verdict.ok());
  CHECK(ok.instance.nodes.count("r2") == 1);
  CHECK(validate_instance(ok.instance).ok());

  MutationResult alone = apply_mutations(
      g, {Mutation::insert_node("r3", "Review", {{"stars", 3}})});
  CHECK_FALSE(alone.accepted);
  CHECK(alone.verdict.has("MultiplicityViolation"));
  CHECK(alone.instance.nodes.count("r3") == 0);  // input returned unchanged
}

TEST_CASE("deleting the authorship edge is rejected with one violation") {
  TypedGraphInstance g = billy_graph();
  MutationResult res = apply_mutations(g, {Mutation::delete_edge("w1")});
  CHECK_FALSE(res.accepted);
  REQUIRE(res.verdict.violations().size() == 1);
  CHECK(res.verdict.violations()[0].element == "billy");
  CHECK(res.verdict.violations()[0].message ==
        "participation User (tail of wrote_review): 0 outside 1..*");
  CHECK(res.instance.edges.count("w1") == 1);
}

TEST_CASE("structural batch defects reject before validation") {
  TypedGraphInstance g = billy_graph();
  CHECK(apply_mutations(g, {Mutation::delete_node("nope")})
            .verdict.has("UnknownId"));
  CHECK(apply_mutations(g, {Mutation::insert_node("billy", "User")})
            .verdict.has("DuplicateId"));
  CHECK(apply_mutations(g, {Mutation::update_node("w1", Value::object())})
            .verdict.has("TypeMismatch"));
  CHECK(apply_mutations(g, {Mutation::delete_edge("billy")})
            .verdict.has("TypeMismatch"));
}

TEST_CASE("inserts without ids get fresh engine-assigned ones") {
  TypedGraphInstance g = billy_graph();
  std::vector<Mutation> batch = {
      Mutation::insert_node("", "User", {{"name", "Anna"}}),
      Mutation::insert_node("", "Review", {{"stars", 4}}),
  };
  // wire the new review up so the batch can be accepted
  batch.push_back(Mutation::insert_edge("", "wrote_review", {"n1"}, {"n2"}));
  batch.push_back(Mutation::insert_edge("", "review_of", {"n2"}, {"p1"}));
  MutationResult res = apply_mutations(g, batch);
  REQUIRE(res.assigned_ids.size() == 4);
  CHECK(res.assigned_ids == std::vector<std::string>{"n1", "n2", "e1", "e2"});
  CHECK(res.accepted);
  for (const auto& id : {"n1", "n2"}) CHECK(res.instance.nodes.count(id));
}

TEST_CASE("updates change properties and revalidate") {
  TypedGraphInstance g = billy_graph();
  MutationResult bad = apply_mutations(
      g, {Mutation::update_node("r1", {{"stars", 9}})});
  CHECK_FALSE(bad.accepted);
  CHECK(bad.verdict.has("InvalidProperty"));

  MutationResult good = apply_mutations(
      g, {Mutation::update_node("r1", {{"stars", 2}})});
  CHECK(good.accepted);
  CHECK(good.instance.nodes.at("r1").properties["stars"] == 2);
}

TEST_CASE("incremental revalidation matches a full pass") {
  TypedGraphInstance g = billy_graph();
  std::mt19937_64 rng(41);
  int compared = 0;

  for (int round = 0; round < 120; ++round) {
    std::vector<Mutation> batch;
    std::size_t ops = 1 + rng() % 3;
    std::vector<std::string> node_ids, edge_ids;
    for (const auto& [id, n] : g.nodes) node_ids.push_back(id);
    for (const auto& [id, e] : g.edges) edge_ids.push_back(id);
    auto pick = [&](const std::vector<std::string>& ids) {
      return ids[rng() % ids.size()];
    };

    for (std::size_t i = 0; i < ops; ++i) {
      switch (rng() % 7) {
        case 0:
          batch.push_back(Mutation::insert_node(
              "", "User", {{"name", "u" + std::to_string(rng() % 5)}}));
          break;
        case 1:
          batch.push_back(Mutation::insert_node(
              "", "Review",
              {{"stars", static_cast<int>(rng() % 8)}}));  // sometimes invalid
          break;
        case 2:
          if (!node_ids.empty())
            batch.push_back(Mutation::insert_edge(
                "", "wrote_review", {pick(node_ids)}, {pick(node_ids)}));
          break;
        case 3:
          if (!node_ids.empty())
            batch.push_back(Mutation::delete_node(pick(node_ids)));
          break;
        case 4:
          if (!edge_ids.empty())
            batch.push_back(Mutation::delete_edge(pick(edge_ids)));
          break;
        case 5:
          if (!node_ids.empty())
            batch.push_back(Mutation::update_node(
                pick(node_ids), {{"name", "renamed"}}));
          break;
        default:
          if (!edge_ids.empty() && !node_ids.empty())
            batch.push_back(Mutation::update_edge(
                pick(edge_ids), std::nullopt,
                std::vector<std::string>{pick(node_ids)}, std::nullopt));
          break;
      }
    }
    if (batch.empty()) continue;

    MutationResult res = apply_mutations(g, batch);
    TypedGraphInstance post;
    try {
      post = apply_structural(g, batch);
    } catch (const TgmError&) {
      CHECK_FALSE(res.accepted);
      continue;
    }
    Verdict full = validate_instance(post);
    CHECK(res.accepted == full.ok());
    CHECK(res.verdict.violations() == full.violations());
    ++compared;
    if (res.accepted) g = std::move(res.instance);
  }
  CHECK(compared > 50);
}

TEST_CASE("instances round-trip through json") {
  TypedGraphInstance g = billy_graph();
  auto j = instance_to_json(g);
  TypedGraphInstance back = instance_from_json(j);
  CHECK(validate_instance(back).ok());
  CHECK(instance_to_json(back).dump() == j.dump());
  CHECK(back.nodes.at("billy").properties["name"] == "Billy");
  CHECK(back.edges.at("w1").tails == std::vector<std::string>{"billy"});
}

TEST_CASE("nested instances round-trip and reattach their schema") {
  auto inner = std::make_shared<TypedGraphSchema>();
  inner->registry.add(make_record("part_props", {{"name", "text"}}));
  inner->node_types.push_back({"Part", "part_props", nullptr});
  TypedGraphSchema outer;
  outer.node_types.push_back({"Stock", "empty_record", inner});

  TypedGraphInstance g;
  g.schema = std::make_shared<const TypedGraphSchema>(std::move(outer));
  auto sub = std::make_shared<TypedGraphInstance>();
  sub->schema = inner;
  sub->add_node("p1", "Part", {{"name", "bolt"}});
  g.add_node("s1", "Stock").nested = sub;

  auto j = instance_to_json(g);
  TypedGraphInstance back = instance_from_json(j);
  REQUIRE(back.nodes.at("s1").nested);
  CHECK(back.nodes.at("s1").nested->schema != nullptr);
  CHECK(validate_instance(back).ok());
  CHECK(instance_to_json(back).dump() == j.dump());
}
