#pragma once

#include <cstdint>
#include <random>

namespace callosim {

/// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// seed_i = mix64(mix64(master) ^ mix64(index + 1)). Stable across releases.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master) ^ mix64(index + 1));
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) noexcept {
  return derive_seed(derive_seed(master, a), b);
}

using Rng = std::mt19937_64;

/// Uniform in [lo, hi]; returns lo when the range is collapsed.
double uniform(Rng& rng, double lo, double hi);
/// Integer uniform in [lo, hi].
std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi);
/// Log-uniform in [lo, hi], lo > 0.
double log_uniform(Rng& rng, double lo, double hi);

}  // namespace callosim
