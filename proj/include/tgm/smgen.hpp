#pragma once

#include <cstdint>

#include "tgm/supermodel.hpp"

namespace tgm {

/// Deterministic random supermodel schema. Every seed yields a schema
/// that passes check_supermodel; sizes and shapes vary with the seed.
SupermodelSchema generate_supermodel(std::uint64_t seed);

}  // namespace tgm
