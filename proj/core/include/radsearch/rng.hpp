#pragma once

#include <cstdint>
#include <random>

namespace radsearch {

/// Every stochastic operation takes an explicitly owned stream of this type.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

}  // namespace radsearch
