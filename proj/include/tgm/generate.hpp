#pragma once

#include <cstdint>
#include <memory>

#include "tgm/instance.hpp"

namespace tgm {

/// Deterministic random value of a registered type: primitives draw from
/// small pools, ranges and enums stay inside their bounds, records fill
/// every component, collections draw a length near the minimum, optionals
/// are sometimes null. Throws UnknownType.
Value random_value(const TypeRegistry& registry, const std::string& type_label,
                   std::uint64_t seed);

/// Deterministic random instance that passes validate_instance: one node
/// per node type plus extra nodes up to `size` total (extras go to types
/// whose mandatory participations face only unbounded counterpart roles),
/// then edges until every participation minimum holds, choosing the
/// endpoint with the most remaining capacity. Elements whose properties
/// violate a constraint are resampled a bounded number of times. Hyper-node
/// contents generate recursively at minimum size. Throws InvalidSchema and
/// UnsatisfiableSchema (size below the node type count, no endpoint
/// capacity left, or constraints still failing after resampling).
TypedGraphInstance generate_instance(
    std::shared_ptr<const TypedGraphSchema> schema, std::uint64_t seed,
    std::size_t size);

}  // namespace tgm
