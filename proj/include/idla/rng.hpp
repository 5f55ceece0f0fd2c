#pragma once

#include <cmath>
#include <cstdint>

#include "idla/core.hpp"

namespace idla {

/// Generator identifier recorded in every output file so runs can be
/// reproduced across machines.
inline constexpr const char* kGeneratorId = "xoshiro256++/splitmix64-streams";

/// splitmix64 finalizer. Bijective on 64-bit words; used both as the stream
/// derivation mix and as the state expander for xoshiro seeding.
inline constexpr std::uint64_t splitmix_mix(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Derives an independent 64-bit seed for sub-experiment `index` of a run
/// seeded with `base`. Used to give every Monte Carlo trial its own stream
/// family while keeping the whole run reproducible from one seed.
inline constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return splitmix_mix(splitmix_mix(base) ^ splitmix_mix(~index));
}

/// xoshiro256++ with explicit (base_seed, stream_id) addressing.
///
/// The pair fully determines the sample sequence: the four state words are
/// drawn from a splitmix64 sequence started at
/// splitmix_mix(base_seed) ^ splitmix_mix(stream_id). Distinct stream ids give
/// statistically independent streams, which is how per-explorer and per-trial
/// randomness is kept merge-order independent.
class RandomSource {
public:
  RandomSource(std::uint64_t base_seed, std::uint64_t stream_id) noexcept
      : base_seed_(base_seed), stream_id_(stream_id) {
    std::uint64_t z = splitmix_mix(base_seed) ^ splitmix_mix(stream_id);
    for (auto& w : s_) {
      z += 0x9e3779b97f4a7c15ull;
      w = splitmix_mix(z);
    }
    s_[0] |= 1;  // states are never all zero
  }

  std::uint64_t base_seed() const noexcept { return base_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next() noexcept {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform integer in [0, bound) by 128-bit multiply-shift. The residual
  /// bias is below bound/2^64 and irrelevant at our sample sizes.
  std::uint64_t below(std::uint64_t bound) noexcept {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double real01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) noexcept { return real01() < p; }

private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t base_seed_;
  std::uint64_t stream_id_;
  std::uint64_t s_[4];
};

}  // namespace idla
