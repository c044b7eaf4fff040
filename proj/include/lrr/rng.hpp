#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lrr {

/// Pseudo-random generator used everywhere in this library.
///
/// The algorithm is pinned for the lifetime of the repo so that experiment
/// outputs are reproducible across platforms: mt19937_64 (fully specified by
/// the C++ standard) for the raw stream, an explicit 53-bit conversion for
/// uniforms, and Box-Muller for normals. std::*_distribution is avoided on
/// purpose; its output is implementation-defined.
class Rng {
 public:
  static constexpr const char* kGeneratorId = "mt19937_64/box-muller/v1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; generates pairs, caches the second.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// Deterministic sub-seed derivation: every run of an experiment draws its
/// seed from (master seed, run index) through two splitmix64 rounds.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return detail::splitmix64(detail::splitmix64(master) ^ index);
}

}  // namespace lrr
