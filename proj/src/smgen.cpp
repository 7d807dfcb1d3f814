#include "tgm/smgen.hpp"

#include <random>

namespace tgm {

namespace {

using Rng = std::mt19937_64;

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

bool chance(Rng& rng, int percent) {
  return pick(rng, 1, 100) <= static_cast<std::size_t>(percent);
}

Multiplicity random_multiplicity(Rng& rng) {
  switch (pick(rng, 0, 4)) {
    case 0: return {0, Multiplicity::kUnbounded};
    case 1: return {1, 1};
    case 2: return {0, 1};
    case 3: return {1, Multiplicity::kUnbounded};
    default: return {2, 5};
  }
}

}  // namespace

SupermodelSchema generate_supermodel(std::uint64_t seed) {
  Rng rng(seed);
  SupermodelSchema sm;
  sm.source_model = "generated";

  std::vector<std::string> datatypes = {"text", "integer", "decimal",
                                        "boolean", "date"};
  if (chance(rng, 50)) {
    sm.types.push_back(make_range("score", TypeKind::Integer, 0, 100));
    datatypes.push_back("score");
  }
  if (chance(rng, 30)) {
    sm.types.push_back(make_enum("mood", {"calm", "tense"}));
    datatypes.push_back("mood");
  }

  std::size_t n_abstracts = pick(rng, 2, 6);
  std::vector<std::string> abstracts;
  for (std::size_t i = 0; i < n_abstracts; ++i) {
    MetaElement e;
    e.id = "a" + std::to_string(i);
    e.kind = MetaKind::Abstract;
    e.label = "Entity" + std::to_string(i);
    abstracts.push_back(e.id);
    sm.elements.push_back(std::move(e));
  }

  int lexical_counter = 0;
  auto fresh_lexical = [&](const std::string& label) {
    MetaElement e;
    e.id = "x" + std::to_string(lexical_counter++);
    e.kind = MetaKind::Lexical;
    e.label = label;
    e.datatype = datatypes[pick(rng, 0, datatypes.size() - 1)];
    sm.elements.push_back(e);
    return e.id;
  };

  // record aggregations over fresh lexicals, attached later
  std::vector<std::string> loose_records;
  std::size_t n_records = pick(rng, 0, 2);
  for (std::size_t i = 0; i < n_records; ++i) {
    MetaElement e;
    e.id = "r" + std::to_string(i);
    e.kind = MetaKind::Aggregation;
    e.label = "record" + std::to_string(i);
    std::size_t n_fields = pick(rng, 1, 3);
    for (std::size_t f = 0; f < n_fields; ++f) {
      std::string lex = fresh_lexical("field" + std::to_string(f));
      e.members.push_back({lex, chance(rng, 30) ? Multiplicity{0, 1}
                                                : Multiplicity{1, 1}});
    }
    if (!loose_records.empty() && chance(rng, 30)) {
      e.members.push_back({loose_records.back(), {1, 1}});
      loose_records.pop_back();
    }
    loose_records.push_back(e.id);
    sm.elements.push_back(std::move(e));
  }

  std::vector<std::string> owners = abstracts;  // ids properties can go to

  std::size_t n_rels = pick(rng, 0, 3);
  for (std::size_t i = 0; i < n_rels && n_abstracts >= 2; ++i) {
    MetaElement e;
    e.id = "g" + std::to_string(i);
    e.kind = MetaKind::Aggregation;
    e.label = "Rel" + std::to_string(i);
    std::vector<std::string> pool = abstracts;
    std::shuffle(pool.begin(), pool.end(), rng);
    std::size_t arity = pick(rng, 2, std::min<std::size_t>(4, pool.size()));
    for (std::size_t m = 0; m < arity; ++m)
      e.members.push_back({pool[m], random_multiplicity(rng)});
    std::size_t n_attach = pick(rng, 0, 2);
    for (std::size_t a = 0; a < n_attach; ++a)
      e.attachments.push_back(fresh_lexical("note" + std::to_string(a)));
    owners.push_back(e.id);
    sm.elements.push_back(std::move(e));
  }

  std::size_t n_isa = pick(rng, 0, 2);
  for (std::size_t i = 0; i < n_isa && n_abstracts >= 2; ++i) {
    std::size_t sub = pick(rng, 1, n_abstracts - 1);
    std::size_t super = pick(rng, 0, sub - 1);
    MetaElement e;
    e.id = "i" + std::to_string(i);
    e.kind = MetaKind::Generalization;
    e.label = "Isa" + std::to_string(i);
    e.sub = abstracts[sub];
    e.super = abstracts[super];
    sm.elements.push_back(std::move(e));
  }

  std::size_t n_refs = pick(rng, 0, 2);
  for (std::size_t i = 0; i < n_refs && n_abstracts >= 2; ++i) {
    MetaElement e;
    e.id = "f" + std::to_string(i);
    e.kind = MetaKind::Function;
    e.label = "ref" + std::to_string(i);
    e.source = abstracts[pick(rng, 0, n_abstracts - 1)];
    e.target = abstracts[pick(rng, 0, n_abstracts - 1)];
    e.optional = chance(rng, 40);
    sm.elements.push_back(std::move(e));
  }

  int placement_counter = 0;
  auto place = [&](const std::string& owner, const std::string& target,
                   const std::string& target_label) {
    MetaElement e;
    e.id = "p" + std::to_string(placement_counter++);
    e.kind = MetaKind::Function;
    e.label = target_label;
    e.source = owner;
    e.target = target;
    e.optional = chance(rng, 30);
    sm.elements.push_back(std::move(e));
  };
  for (const auto& owner : owners) {
    std::size_t n_props = pick(rng, 0, 3);
    for (std::size_t p = 0; p < n_props; ++p) {
      std::string label = "prop" + std::to_string(p);
      place(owner, fresh_lexical(label), label);
    }
  }
  for (const auto& rec : loose_records) {
    const std::string label = sm.find(rec)->label;
    place(owners[pick(rng, 0, owners.size() - 1)], rec, label);
  }

  if (chance(rng, 30)) {
    const MetaElement* first = sm.find(abstracts[0]);
    sm.constraints.push_back({"c0", first->label, "true"});
  }
  return sm;
}

}  // namespace tgm
