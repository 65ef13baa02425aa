#pragma once

#include <cstdint>
#include <string_view>

#include "mvrbm/model.hpp"

namespace mvrbm {

/// Named sub-generator derived from one user seed, so that e.g. the
/// training chain and k-means initialisation never share a stream.
Rng make_rng(std::uint64_t seed, std::string_view stream);

/// Generator seeded from a 64-bit value drawn from a parent stream.
Rng child_rng(std::uint64_t child_seed);

}  // namespace mvrbm
