#pragma once

#include <cstdint>
#include <random>

namespace dkfsel {

/// Seeded random source. Every stochastic operation takes one of these by
/// reference; nothing in the library seeds from the clock.
using Rng = std::mt19937_64;

/// SplitMix64 finaliser. Stable across versions; used for all seed derivation.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// seed_run = splitmix64(splitmix64(base) ^ index). Distinct indices give
/// decorrelated mt19937_64 streams.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(base) ^ index);
}

}  // namespace dkfsel
