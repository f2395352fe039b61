#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace delayoco {

/// Counter-based generator: output i of stream s under seed k is
/// splitmix64(key(k, s) + (i + 1) * golden). Independent streams come from
/// distinct stream ids, so every consumer (delays, features, noise) draws
/// from its own sequence regardless of how many numbers the others consume.
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix(seed ^ mix(stream + kGolden))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + (++counter_) * kGolden); }

  std::uint64_t counter() const { return counter_; }

  /// Uniform on the open interval (0, 1).
  double uniform01() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform on the open interval (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [lo, hi], rejection sampled.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>((*this)());
    const std::uint64_t limit = max() - (max() % span + 1) % span;
    std::uint64_t r;
    do r = (*this)();
    while (r > limit);
    return lo + static_cast<std::int64_t>(r % span);
  }

  /// Standard normal via Box-Muller (cosine branch only).
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Stream ids used by the experiment harness.
namespace streams {
inline constexpr std::uint64_t kDelays = 1;
inline constexpr std::uint64_t kFeatures = 2;
inline constexpr std::uint64_t kNoise = 3;
}  // namespace streams

}  // namespace delayoco
