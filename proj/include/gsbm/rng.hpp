#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace gsbm {

struct SampleSeed {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  bool operator==(const SampleSeed&) const = default;
};

/// Counter-based generator: every draw is a pure function of
/// (master_seed, stream_id, i, j, slot), so matrix entries do not depend
/// on the order in which they are filled.
class CounterRng {
 public:
  explicit CounterRng(SampleSeed seed)
      : key_(mix(mix(seed.master_seed ^ 0x6a09e667f3bcc909ull) ^
                 (seed.stream_id * 0x9e3779b97f4a7c15ull + 0xbb67ae8584caa73bull))) {}

  std::uint64_t bits(std::uint64_t i, std::uint64_t j, std::uint64_t slot = 0) const noexcept {
    std::uint64_t h = mix(key_ ^ (i * 0x9e3779b97f4a7c15ull + 0x3c6ef372fe94f82bull));
    h = mix(h ^ (j * 0xc2b2ae3d27d4eb4full + 0xa54ff53a5f1d36f1ull));
    return mix(h ^ (slot * 0x165667b19e3779f9ull + 0x510e527fade682d1ull));
  }

  /// Uniform on the open interval (0, 1).
  double uniform(std::uint64_t i, std::uint64_t j, std::uint64_t slot = 0) const noexcept {
    return (static_cast<double>(bits(i, j, slot) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller on slots 2k and 2k+1.
  double normal(std::uint64_t i, std::uint64_t j, std::uint64_t k = 0) const noexcept {
    const double u1 = uniform(i, j, 2 * k);
    const double u2 = uniform(i, j, 2 * k + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(double p, std::uint64_t i, std::uint64_t j) const noexcept {
    return uniform(i, j) < p;
  }

  double rademacher(std::uint64_t i, std::uint64_t j) const noexcept {
    return (bits(i, j) >> 63) ? 1.0 : -1.0;
  }

 private:
  // SplitMix64 finalizer.
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
};

}  // namespace gsbm
