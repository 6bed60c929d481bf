#pragma once

#include <cstdint>
#include <random>

namespace affine_pr {

/// Generator behind every seeded draw in the library.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// seed = splitmix64(splitmix64(splitmix64(master) ^ a) ^ b): derives independent
/// per-cell / per-trial / per-restart streams so results never depend on execution order.
constexpr std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) noexcept {
    return splitmix64(splitmix64(splitmix64(master) ^ a) ^ b);
}

}  // namespace affine_pr
