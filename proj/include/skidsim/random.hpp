#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace skidsim {

// 64-bit generators only, so draws are reproducible across standard
// libraries (std::uniform_real_distribution is implementation-defined).
template <class G>
concept Uniform64Generator =
    std::uniform_random_bit_generator<G> && G::min() == 0 &&
    G::max() == std::numeric_limits<std::uint64_t>::max();

// Uniform draw in [0, 1) with 53 bits of resolution.
template <Uniform64Generator G>
double uniform01(G& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

template <Uniform64Generator G>
double uniform(G& gen, double lo, double hi) {
  return lo + uniform01(gen) * (hi - lo);
}

using Rng = std::mt19937_64;

}  // namespace skidsim
