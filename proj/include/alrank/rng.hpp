#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace alrank {

using Rng = std::mt19937_64;

/// Derives an independent generator from a base seed and a named substream.
/// Stages (split, kmeans, sampling, random-strategy, ...) draw from their own
/// substream so changing one stage does not shift the others.
Rng substream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

/// Same derivation, returning the raw 64-bit seed.
std::uint64_t substream_seed(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace alrank
