#pragma once

#include <cstdint>
#include <limits>

namespace vmp {

/// SplitMix64 output function (Steele, Lea & Flood). Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Maps the top 53 bits of a word to a double in [0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Counter-based uniform attached to the space-time vertex (x, t).
///
/// The value is a pure function of (seed, x, t): the same vertex always sees
/// the same uniform whatever window it is queried from, which is what lets the
/// forward chain and the backward net share one source of randomness.
constexpr double keyed_uniform(std::uint64_t seed, std::int64_t x,
                               std::int64_t t) noexcept {
  std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ULL);
  h = mix64(h ^ static_cast<std::uint64_t>(x) * 0xd6e8feb86659fd93ULL);
  h = mix64(h ^ static_cast<std::uint64_t>(t) * 0xa0761d6478bd642fULL);
  return to_unit(h);
}

/// Derives an independent seed for trial `index` of stream `stream`.
/// Trials are keyed by index, never by worker, so aggregates do not depend on
/// how work is scheduled.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index) noexcept {
  return mix64(mix64(master ^ mix64(stream + 0x3c6ef372fe94f82bULL)) + index);
}

/// Sequential SplitMix64 generator; satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  constexpr double uniform() noexcept { return to_unit((*this)()); }

  /// Uniform integer in [0, n) by rejection (no modulo bias).
  constexpr std::uint64_t below(std::uint64_t n) noexcept {
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t r = (*this)();
    while (r >= limit) r = (*this)();
    return r % n;
  }

 private:
  std::uint64_t state_;
};

}  // namespace vmp
