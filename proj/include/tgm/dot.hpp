#pragma once

#include <string>

#include "tgm/schema.hpp"

namespace tgm {

/// Deterministic Graphviz rendering of a schema: node types become
/// record-shaped nodes listing their property components (hyper-nodes
/// additionally name their nested types), binary edge types become arrows
/// labeled with kind and both multiplicities, and hyper-edges join their
/// participants through a diamond carrying the edge label and properties.
/// Node and edge types render sorted by label, so equal schemas yield
/// byte-equal output. Throws InvalidSchema when the schema does not
/// validate.
std::string to_dot(const TypedGraphSchema& s);

}  // namespace tgm
