#pragma once

#include <cstdint>
#include <random>

namespace d2d {

// splitmix64 step; good avalanche, used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic per-trial seed from (master seed, sweep point, trial index).
// Trials own disjoint streams, so results are identical at any parallelism.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t sweep_idx,
                                 std::uint64_t trial_idx) {
  std::uint64_t s = master;
  s ^= 0x53a01ca265d5e52dull + splitmix64(s) + (sweep_idx << 1);
  s ^= splitmix64(s) + trial_idx * 0x9e3779b97f4a7c15ull;
  return splitmix64(s);
}

// The engine used throughout the simulator.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) {
  std::uint64_t s = seed;
  // Warm the seed through splitmix64 so nearby seeds give unrelated streams.
  const std::uint64_t a = splitmix64(s);
  return Rng(a);
}

// Uniform double in [0, 1).
inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Uniform integer in [0, n).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace d2d
