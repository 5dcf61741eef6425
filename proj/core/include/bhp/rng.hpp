#pragma once

// Counter-derived random streams.
//
// Every random quantity in the library is drawn from a Stream obtained by
// hashing (seed, tag...) with SplitMix64. Replicate i of an experiment uses
// Stream::derive(seed, i, ...) and therefore never touches the numbers of
// replicate j, whatever thread runs it. The generator itself is
// xoshiro256** seeded from the derived key.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace bhp {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Mixes a seed with an ordered list of tags into a new 64-bit seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t h = splitmix64(seed ^ 0x6A09E667F3BCC909ULL);
  for (std::uint64_t t : tags) h = splitmix64(h ^ splitmix64(t + 0x3C6EF372FE94F82BULL));
  return h;
}

/// xoshiro256** satisfying UniformRandomBitGenerator.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t seed) noexcept {
    std::uint64_t x = seed;
    for (auto& s : state_) {
      x = splitmix64(x);
      s = x;
    }
  }

  static Stream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) noexcept {
    return Stream(derive_seed(seed, tags));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace bhp
