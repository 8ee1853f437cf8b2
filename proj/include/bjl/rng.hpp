#pragma once

// Seeding and Gaussian increments.
//
// Each path owns a std::mt19937_64 engine. Path i of an ensemble with base
// seed S is seeded with stream_seed(S, i) = splitmix64(S + (i + 1) * golden),
// golden = 0x9E3779B97F4A7C15. Normals come from std::normal_distribution,
// so bit reproducibility holds per build (standard library), not across
// platforms.

#include <cstdint>
#include <random>
#include <span>

namespace bjl {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += kGoldenGamma;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(seed + (index + 1) * kGoldenGamma);
}

class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double next() { return normal_(engine_); }

  /// Fills `out` with independent N(0, scale^2) draws.
  void fill(std::span<double> out, double scale) {
    for (double& x : out) x = scale * normal_(engine_);
  }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace bjl
