#include "tgm/generate.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace tgm {

namespace {

constexpr int kMaxDepth = 16;
constexpr int kResampleRounds = 32;

[[noreturn]] void unsatisfiable(const std::string& what) {
  throw TgmError("UnsatisfiableSchema", what);
}

class ValueSampler {
 public:
  ValueSampler(const TypeRegistry& registry, std::mt19937_64& rng)
      : registry_(registry), rng_(rng) {}

  Value sample(const std::string& label, int depth = 0) {
    const DataType& t = registry_.at(label);
    if (depth > kMaxDepth) return witness_value(registry_, label);
    switch (t.kind) {
      case TypeKind::Integer:
        return roll(0, 99);
      case TypeKind::Decimal:
        return roll(0, 399) / 4.0;
      case TypeKind::Text:
        return word();
      case TypeKind::Boolean:
        return roll(0, 1) == 1;
      case TypeKind::Date:
        return date();
      case TypeKind::Range:
        if (t.base == TypeKind::Integer)
          return roll(static_cast<long long>(t.lo),
                      static_cast<long long>(t.hi));
        return t.lo + (t.hi - t.lo) * roll(0, 1000) / 1000.0;
      case TypeKind::Enum:
        return t.literals[static_cast<std::size_t>(
            roll(0, static_cast<long long>(t.literals.size()) - 1))];
      case TypeKind::Record: {
        Value v = Value::object();
        for (const auto& c : t.components) v[c.name] = sample(c.type, depth + 1);
        return v;
      }
      case TypeKind::Array: {
        Value v = Value::array();
        for (std::uint32_t i = 0; i < t.length; ++i)
          v.push_back(sample(t.element, depth + 1));
        return v;
      }
      case TypeKind::List:
      case TypeKind::Bag:
        return collection(t, depth, false);
      case TypeKind::Set:
        return collection(t, depth, true);
      case TypeKind::Optional:
        if (roll(0, 9) < 3) return Value();
        return sample(t.element, depth + 1);
      case TypeKind::Union:
        return sample(t.variants[static_cast<std::size_t>(roll(
                          0, static_cast<long long>(t.variants.size()) - 1))],
                      depth + 1);
    }
    return witness_value(registry_, label);
  }

 private:
  long long roll(long long lo, long long hi) {
    if (hi < lo) return lo;
    return std::uniform_int_distribution<long long>(lo, hi)(rng_);
  }

  std::string word() {
    static const char* kWords[] = {"alder", "birch", "cedar", "elm",
                                   "hazel", "maple", "rowan", "willow"};
    return std::string(kWords[roll(0, 7)]) + std::to_string(roll(0, 99));
  }

  std::string date() {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04lld-%02lld-%02lld", 1970 + roll(0, 59),
                  roll(1, 12), roll(1, 28));
    return buf;
  }

  Value collection(const DataType& t, int depth, bool distinct) {
    std::uint32_t lo = t.occurs_min;
    std::uint32_t hi = t.occurs_max ? *t.occurs_max : lo + 2;
    hi = std::min(hi, lo + 2);
    auto n = static_cast<std::uint32_t>(roll(lo, hi));
    Value v = Value::array();
    std::set<std::string> seen;
    for (std::uint32_t i = 0; i < n; ++i) {
      Value item;
      int tries = 0;
      do {
        item = sample(t.element, depth + 1);
      } while (distinct && seen.count(item.dump()) && ++tries < 20);
      if (distinct && !seen.insert(item.dump()).second) continue;
      v.push_back(std::move(item));
    }
    return v;
  }

  const TypeRegistry& registry_;
  std::mt19937_64& rng_;
};

struct RoleRef {
  const EdgeType* edge;
  int side;  // 0 tail, 1 head
  const Participation* role;
};

std::vector<RoleRef> all_roles(const TypedGraphSchema& s) {
  std::vector<RoleRef> out;
  for (const auto& e : s.edge_types) {
    for (const auto& p : e.tail) out.push_back({&e, 0, &p});
    for (const auto& p : e.head) out.push_back({&e, 1, &p});
  }
  return out;
}

/// A node type can absorb extra nodes only when every mandatory role it
/// takes faces unbounded counterpart roles; otherwise each extra node
/// consumes someone else's finite capacity.
bool freely_extendable(const TypedGraphSchema& s, const std::string& label) {
  for (const auto& e : s.edge_types) {
    for (int side : {0, 1}) {
      for (const auto& p : side == 0 ? e.tail : e.head) {
        if (p.node_type != label || p.multiplicity.min == 0) continue;
        for (const auto& other : e.tail)
          if (&other != &p && !other.multiplicity.unbounded()) return false;
        for (const auto& other : e.head)
          if (&other != &p && !other.multiplicity.unbounded()) return false;
      }
    }
  }
  return true;
}

class InstanceBuilder {
 public:
  InstanceBuilder(std::shared_ptr<const TypedGraphSchema> schema,
                  std::uint64_t seed, std::size_t size)
      : schema_(std::move(schema)),
        size_(size),
        rng_(seed),
        sampler_(schema_->registry, rng_) {
    g_.schema = schema_;
  }

  TypedGraphInstance build() {
    make_nodes();
    repair_participations();
    settle_constraints();
    return std::move(g_);
  }

 private:
  void make_nodes() {
    const auto& types = schema_->node_types;
    if (size_ < types.size())
      unsatisfiable("size " + std::to_string(size_) +
                    " cannot hold one node of each of the " +
                    std::to_string(types.size()) + " node types");
    for (const auto& nt : types) add_node(nt);

    std::vector<const NodeType*> extendable;
    for (const auto& nt : types)
      if (freely_extendable(*schema_, nt.label)) extendable.push_back(&nt);
    if (extendable.empty()) return;
    for (std::size_t i = types.size(); i < size_; ++i)
      add_node(*extendable[static_cast<std::size_t>(
          roll(0, static_cast<long long>(extendable.size()) - 1))]);
  }

  void add_node(const NodeType& nt) {
    std::string id = nt.label + "_" + std::to_string(++node_seq_[nt.label]);
    InstanceNode& n = g_.add_node(id, nt.label, sampler_.sample(nt.property_type));
    if (nt.nested) {
      auto sub = generate_instance(nt.nested, rng_(),
                                   nt.nested->node_types.size());
      n.nested = std::make_shared<TypedGraphInstance>(std::move(sub));
    }
    by_type_[nt.label].push_back(id);
  }

  std::uint32_t occurrences(const std::string& edge_label, int side,
                            const std::string& node_id) const {
    auto it = occ_.find(key(edge_label, side, node_id));
    return it == occ_.end() ? 0 : it->second;
  }

  static std::string key(const std::string& edge_label, int side,
                         const std::string& node_id) {
    return edge_label + "\x1f" + std::to_string(side) + "\x1f" + node_id;
  }

  /// Effective upper bound for one node on one side of one edge type: the
  /// tightest max over that side's roles of the node's type.
  std::uint32_t side_max(const EdgeType& e, int side,
                         const std::string& node_type) const {
    std::uint32_t max = Multiplicity::kUnbounded;
    for (const auto& p : side == 0 ? e.tail : e.head)
      if (p.node_type == node_type) max = std::min(max, p.multiplicity.max);
    return max;
  }

  void repair_participations() {
    auto roles = all_roles(*schema_);
    for (int guard = 0; guard < 100000; ++guard) {
      bool deficit_found = false;
      for (const auto& r : roles) {
        if (r.role->multiplicity.min == 0) continue;
        for (const auto& id : by_type_[r.role->node_type]) {
          while (occurrences(r.edge->label, r.side, id) <
                 r.role->multiplicity.min) {
            add_repair_edge(r, id);
            deficit_found = true;
          }
        }
      }
      if (!deficit_found) return;
    }
    unsatisfiable("participation minima keep generating work");
  }

  void add_repair_edge(const RoleRef& r, const std::string& deficit_id) {
    InstanceEdge e;
    e.id = r.edge->label + "_" + std::to_string(++edge_seq_[r.edge->label]);
    e.type = r.edge->label;
    for (int side : {0, 1}) {
      std::set<std::string> used;
      if (side == r.side) {
        (side == 0 ? e.tails : e.heads).push_back(deficit_id);
        used.insert(deficit_id);
      }
      for (const auto& p : side == 0 ? r.edge->tail : r.edge->head) {
        if (side == r.side && &p == r.role) continue;
        std::string pick = best_endpoint(*r.edge, side, p.node_type, used);
        if (pick.empty())
          unsatisfiable("no '" + p.node_type + "' node can take another " +
                        std::string(side == 0 ? "tail" : "head") +
                        " role of '" + r.edge->label + "'");
        (side == 0 ? e.tails : e.heads).push_back(pick);
        used.insert(pick);
      }
    }
    for (const auto& t : e.tails) ++occ_[key(e.type, 0, t)];
    for (const auto& h : e.heads) ++occ_[key(e.type, 1, h)];
    e.properties = sampler_.sample(r.edge->property_type);
    g_.edges.emplace(e.id, std::move(e));
  }

  std::string best_endpoint(const EdgeType& e, int side,
                            const std::string& node_type,
                            const std::set<std::string>& used) const {
    std::string best;
    std::uint64_t best_headroom = 0;
    for (const auto& id : by_type_.at(node_type)) {
      if (used.count(id)) continue;
      std::uint32_t max = side_max(e, side, node_type);
      std::uint32_t count = occurrences(e.label, side, id);
      std::uint64_t headroom = max == Multiplicity::kUnbounded
                                   ? ~std::uint64_t{0}
                                   : (count >= max ? 0 : max - count);
      if (headroom > best_headroom) {
        best = id;
        best_headroom = headroom;
      }
    }
    return best;
  }

  void settle_constraints() {
    for (int round = 0; round < kResampleRounds; ++round) {
      Verdict v = validate_instance(g_);
      if (v.ok()) return;
      bool resampled = false;
      std::set<std::string> done;
      for (const auto& violation : v.violations()) {
        if (violation.rule != "ConstraintViolated" &&
            violation.rule != "EvaluationError")
          continue;
        if (!done.insert(violation.element).second) continue;
        if (auto n = g_.nodes.find(violation.element); n != g_.nodes.end()) {
          const NodeType* nt = schema_->find_node(n->second.type);
          n->second.properties = sampler_.sample(nt->property_type);
          resampled = true;
        } else if (auto ed = g_.edges.find(violation.element);
                   ed != g_.edges.end()) {
          const EdgeType* et = schema_->find_edge(ed->second.type);
          ed->second.properties = sampler_.sample(et->property_type);
          resampled = true;
        }
      }
      if (!resampled)
        unsatisfiable("generated instance cannot satisfy the schema: " +
                      v.violations().front().message);
    }
    unsatisfiable("constraints still violated after " +
                  std::to_string(kResampleRounds) + " resampling rounds");
  }

  long long roll(long long lo, long long hi) {
    return std::uniform_int_distribution<long long>(lo, hi)(rng_);
  }

  std::shared_ptr<const TypedGraphSchema> schema_;
  std::size_t size_;
  std::mt19937_64 rng_;
  ValueSampler sampler_;
  TypedGraphInstance g_;
  std::map<std::string, std::vector<std::string>> by_type_;
  std::map<std::string, std::uint32_t> node_seq_, edge_seq_;
  std::map<std::string, std::uint32_t> occ_;
};

}  // namespace

Value random_value(const TypeRegistry& registry, const std::string& type_label,
                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return ValueSampler(registry, rng).sample(type_label);
}

TypedGraphInstance generate_instance(
    std::shared_ptr<const TypedGraphSchema> schema, std::uint64_t seed,
    std::size_t size) {
  Verdict sv = validate_schema(*schema);
  if (!sv.ok()) {
    const Violation& first = sv.violations().front();
    throw TgmError("InvalidSchema", first.rule + " at '" + first.element +
                                        "': " + first.message);
  }
  return InstanceBuilder(std::move(schema), seed, size).build();
}

}  // namespace tgm
