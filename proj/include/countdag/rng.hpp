#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace countdag {

// SplitMix64: output k is mix(seed + k * golden_gamma), so a generator is a
// counter over a fixed key. Substreams are keyed by hashing (seed, ids...).
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += kGamma;
    return mix(state_);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Independent generator for stream `id`; does not advance this one.
  SplitMix64 split(std::uint64_t id) const noexcept { return SplitMix64(derive(state_, {id})); }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Hashes a seed and a path of stream ids into a new seed.
  static constexpr std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) noexcept {
    std::uint64_t h = mix(seed + kGamma);
    for (std::uint64_t id : ids) h = mix(h ^ mix(id + 0x632BE59BD9B4E019ULL));
    return h;
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  std::uint64_t state_;
};

// Exact Poisson draw: sequential-search inversion for lambda < 30,
// transformed rejection (PTRS) above. Requires a finite lambda >= 0.
std::uint64_t poisson(SplitMix64& rng, double lambda);

}  // namespace countdag
