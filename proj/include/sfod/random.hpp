#pragma once

#include <bit>
#include <cstdint>
#include <limits>

namespace sfod {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Independent child seed for a named sub-stream.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed ^ 0x6A09E667F3BCC909ULL) + mix64(stream + 0x9E3779B97F4A7C15ULL));
}

inline std::uint64_t derive_seed(std::uint64_t seed, double value) {
  return derive_seed(seed, std::bit_cast<std::uint64_t>(value));
}

/// Counter-based generator: the i-th draw is a pure function of (key, i), so
/// streams are reproducible across runs and platforms. Satisfies
/// UniformRandomBitGenerator for use with Boost.Random distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed) : key_(mix64(seed)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    ++counter_;
    return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform double in [0,1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

  std::uint64_t counter() const { return counter_; }

  friend bool operator==(const CounterRng&, const CounterRng&) = default;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

inline std::uint64_t CounterRng::below(std::uint64_t n) {
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t x = (*this)();
  while (x >= limit) {
    x = (*this)();
  }
  return x % n;
}

}  // namespace sfod
