#pragma once

#include <cstdint>
#include <random>

namespace actsched {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Used to derive decorrelated sub-seeds from one
// master seed.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Named random streams derived from a master seed. Each consumer owns one
// stream so that adding draws to one never shifts another.
enum class Stream : std::uint64_t {
  kGenerator = 1,
  kThresholds = 2,
  kAssignment = 3,
};

inline Rng make_stream(std::uint64_t master_seed, Stream stream) {
  return Rng(splitmix64(master_seed ^ splitmix64(static_cast<std::uint64_t>(stream))));
}

// Uniform double in [0, 1) from the top 53 bits; identical across standard
// library implementations, unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double low, double high) {
  return low + (high - low) * uniform01(rng);
}

// Uniform integer in [0, bound) by rejection, bound > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % bound;
}

}  // namespace actsched
