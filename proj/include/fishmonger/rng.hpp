#pragma once

#include <cstdint>
#include <random>

namespace fishmonger {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed of replication r under root seed s: mix64(s ^ mix64(r + 1)).
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t replication) {
  return mix64(root ^ mix64(replication + 1));
}

/// Seeded random stream. mt19937_64 is fully specified by the standard and
/// the double conversion below is done by hand, so a given seed produces the
/// same draws with every standard library.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fishmonger
