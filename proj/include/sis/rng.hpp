#pragma once

#include <cstdint>
#include <random>

namespace sis {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014). Used to derive independent
/// stream seeds from a master seed and a counter.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of stream `index` under `master`: splitmix64(master ^ splitmix64(index)).
constexpr std::uint64_t stream_seed(std::uint64_t master,
                                    std::uint64_t index) noexcept {
  return splitmix64(master ^ splitmix64(index));
}

/// Deterministic generator: std::mt19937_64 (fully specified by the standard)
/// with a portable 53-bit uniform in [0, 1). std::uniform_real_distribution is
/// avoided because its output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

 private:
  std::mt19937_64 engine_;
};

inline constexpr std::uint64_t kDefaultSeed = 20180314ULL;

}  // namespace sis
