#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace regionsim {

/// Seeded PRNG wrapper. All draws go through our own bounded/real helpers
/// instead of std distributions, so sequences are identical across standard
/// library implementations. Named substreams keep the draws of one component
/// (topology, mobility, init) independent of the others.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix(seed)) {}

  static Rng substream(std::uint64_t seed, std::string_view name) {
    return Rng(seed ^ fnv1a(name));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, bound), bound > 0. Rejection sampling, no modulo bias.
  std::uint32_t uniform_u32(std::uint32_t bound) {
    const std::uint64_t span = 0x100000000ull;
    const std::uint64_t limit = span - span % bound;
    for (;;) {
      std::uint64_t v = engine_() >> 32;
      if (v < limit) return static_cast<std::uint32_t>(v % bound);
    }
  }

  std::size_t uniform_index(std::size_t bound) {
    return uniform_u32(static_cast<std::uint32_t>(bound));
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform_real() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform_real() < p; }

  /// Fisher-Yates; self-contained so shuffles are reproducible everywhere.
  template <class T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(values[i - 1], values[j]);
    }
  }

  static std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace regionsim
