#pragma once

// Deterministic seeded randomness. Every consumer (parameter init, episode
// worlds, jammer, per-agent action sampling, evaluation) draws from its own
// sub-stream derived from a master seed, so parallel scheduling or reordering
// of consumers can never change results.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fedswarm {

// splitmix64 finalizer: mixes seed material into well-distributed 64-bit keys.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Labels for RNG sub-streams. Values are part of the determinism contract.
enum class Stream : std::uint64_t {
  kParamInit = 1,
  kEpisode = 2,
  kJammer = 3,
  kAction = 4,
  kEval = 5,
};

// Derives a sub-stream seed from a base seed and a list of tags
// (stream label, episode index, agent id, ...). Order-sensitive.
inline constexpr std::uint64_t derive_seed(std::uint64_t base,
                                           std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = mix64(base);
  for (std::uint64_t t : tags) s = mix64(s ^ mix64(t));
  return s;
}

inline constexpr std::uint64_t derive_seed(std::uint64_t base, Stream stream) {
  return derive_seed(base, {static_cast<std::uint64_t>(stream)});
}

inline constexpr std::uint64_t derive_seed(std::uint64_t base, Stream stream,
                                           std::uint64_t a) {
  return derive_seed(base, {static_cast<std::uint64_t>(stream), a});
}

inline constexpr std::uint64_t derive_seed(std::uint64_t base, Stream stream,
                                           std::uint64_t a, std::uint64_t b) {
  return derive_seed(base, {static_cast<std::uint64_t>(stream), a, b});
}

// Seeded generator with hand-rolled conversions so the produced doubles do
// not depend on standard-library distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n). Requires n >= 1.
  int uniform_int(int n) {
    int v = static_cast<int>(uniform01() * static_cast<double>(n));
    return v < n ? v : n - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fedswarm
