#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace osasi {

/// splitmix64 finalizer. Used both to expand seeds into generator state and
/// to derive independent sub-stream seeds from a master seed.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Purpose tags for the seed-derivation scheme. Every stochastic consumer
/// draws from its own (purpose, index) stream so that adding a consumer
/// never perturbs the draws of existing ones.
enum class SeedPurpose : std::uint64_t {
  kDatasetPosition = 1,   // one stream per training sample index
  kModelLearning = 2,     // k-means initialisation
  kTrialRoot = 3,         // one root per (snr, trial) pair
  kTestPosition = 4,      // test source position within a trial
  kExcitation = 5,        // excitation signal within a trial
  kObservationNoise = 6,  // observation noise within a trial
};

/// Derive the seed of sub-stream (purpose, index) from a master seed:
/// three rounds of the splitmix64 finalizer, folding in purpose and index.
inline std::uint64_t derive_seed(std::uint64_t master, SeedPurpose purpose, std::uint64_t index) {
  std::uint64_t s = mix64(master);
  s = mix64(s ^ static_cast<std::uint64_t>(purpose));
  s = mix64(s ^ index);
  return s;
}

/// Derive a plain indexed sub-stream (e.g. one stream per signal channel).
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed) ^ index);
}

/// xoshiro256++ generator seeded via splitmix64. All distributions are
/// implemented on top of the raw 64-bit output so that sequences are
/// bit-identical across platforms and standard library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) {
      sm += 0x9e3779b97f4a7c15ull;
      std::uint64_t z = sm;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      word = z ^ (z >> 31);
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
  }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const auto k = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return k >= n ? n - 1 : k;
  }

  /// Standard normal via Box-Muller on the raw uniform stream.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace osasi
