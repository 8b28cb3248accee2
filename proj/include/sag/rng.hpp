#pragma once

#include <cstdint>
#include <random>

// Deterministic seeding. Every randomized operation takes an explicit master
// seed and derives independent per-trial streams from (seed, stream index),
// so trials are order-independent and can run in parallel without sharing
// generator state.

namespace sag {

// splitmix64 finalizer: cheap, well-mixed 64-bit hash used only to expand a
// (master, stream) pair into an mt19937_64 seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
  // Two mixing rounds so that nearby (master, stream) pairs land far apart.
  return splitmix64(master ^ splitmix64(stream ^ 0x5851f42d4c957f2dULL));
}

inline std::mt19937_64 rng_for(std::uint64_t master, std::uint64_t stream) {
  return std::mt19937_64(mix_seed(master, stream));
}

}  // namespace sag
