#ifndef HDS_RNG_HPP
#define HDS_RNG_HPP

#include <array>
#include <cstdint>
#include <limits>

namespace hds {

// SplitMix64 finalizer. Used for seeding and stream derivation only.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// xoshiro256** with SplitMix64 seeding.
///
/// Every experiment is driven by a 64-bit seed. Worker k draws from
/// stream(seed, k); the stream state depends only on (seed, k), so results
/// for a fixed partition do not depend on scheduling.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) noexcept { reseed(seed); }

  static Rng stream(std::uint64_t seed, std::uint64_t index) noexcept {
    std::uint64_t mix = index + 1;
    return Rng(seed ^ splitmix64(mix));
  }

  void reseed(std::uint64_t seed) noexcept {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_{};
};

/// Uniform integer in [0, n) by Lemire's multiply-and-reject method.
/// Platform-independent, unlike std::uniform_int_distribution.
template <class URBG>
std::uint64_t uniform_below(URBG& rng, std::uint64_t n) {
  static_assert(URBG::min() == 0 &&
                    URBG::max() == std::numeric_limits<std::uint64_t>::max(),
                "uniform_below needs a full-range 64-bit generator");
  unsigned __int128 m = static_cast<unsigned __int128>(rng()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(rng()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace hds

#endif  // HDS_RNG_HPP
