#pragma once

#include <cstdint>
#include <random>

namespace sdwave {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

// Stateless splitmix64 scramble; bijective and safe on small or zero inputs.
inline std::uint64_t splitmix64(std::uint64_t x) {
  std::uint64_t z = x + kGoldenGamma;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Per-path generator: the path index is folded into the master seed, so every
// path is reproducible in isolation and no two paths share a stream. Results
// do not depend on how paths are scheduled.
inline std::mt19937_64 path_rng(std::uint64_t master, std::uint64_t path_index) {
  return std::mt19937_64(splitmix64(master ^ ((path_index + 1) * kGoldenGamma)));
}

}  // namespace sdwave
