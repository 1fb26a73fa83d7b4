#pragma once

#include <cstdint>
#include <random>

namespace dcsim {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for substream `index` of stream family `stream` under a run seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                    std::uint64_t index) noexcept {
  return mix64(mix64(seed ^ mix64(stream)) + index);
}

/// Seedable generator with platform-independent output.
///
/// std::mt19937_64 is fully specified by the standard; the standard
/// distributions are not, so the conversions to doubles live here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open_zero() noexcept {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  bool bernoulli(double p) noexcept {
    if (p >= 1.0) return true;
    if (p <= 0.0) return false;
    return uniform() < p;
  }

  /// Standard normal deviate (Box-Muller, cosine branch).
  double normal() noexcept;

 private:
  std::mt19937_64 engine_;
};

}  // namespace dcsim
