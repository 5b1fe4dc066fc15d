#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace plume {

using Rng = std::mt19937_64;

/// Derives an independent sub-seed from a base seed and a fixed stream label,
/// so world, policy-sampling and scenario-jitter streams never alias.
std::uint64_t derive_seed(std::uint64_t base, std::string_view label);

inline Rng make_rng(std::uint64_t base, std::string_view label) {
  return Rng{derive_seed(base, label)};
}

}  // namespace plume
