#pragma once

#include <cstdint>
#include <limits>

namespace isingsel {

/// Stateless 64-bit finalizer (splitmix64).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Combine a running hash with one more word.
constexpr std::uint64_t mix64(std::uint64_t h, std::uint64_t v) noexcept {
  return mix64(h ^ (mix64(v) + 0x632be59bd9b4e019ULL + (h << 6) + (h >> 2)));
}

/// Counter-based random source. Output i is mix64(key, i), so a stream is
/// fully determined by its key and independent streams are obtained with
/// split(). Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Rng(std::uint64_t seed) noexcept : key_(mix64(seed)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept { return mix64(key_, counter_++); }

  /// Child stream keyed by `stream`; does not advance this generator.
  [[nodiscard]] constexpr Rng split(std::uint64_t stream) const noexcept {
    Rng child(0);
    child.key_ = mix64(key_ ^ 0xa0761d6478bd642fULL, stream);
    return child;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double prob_true) noexcept { return uniform() < prob_true; }

  /// Fair +1/-1 draw.
  int sign() noexcept { return ((*this)() >> 63) ? 1 : -1; }

  [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace isingsel
