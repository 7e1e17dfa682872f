#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace slitsim {

// Deterministic random-number contract (v1, frozen so recorded counts stay
// stable across releases):
//   * core generator: std::mt19937_64 (sequence pinned by the standard),
//   * substream seeds derived from (seed, stream) with splitmix64,
//   * uniforms from the top 53 bits, normals via Box-Muller,
//   * binomials by exact Bernoulli summation.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of the independent substream `stream` of a run keyed by `seed`.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(0x5851F42D4C957F2DULL * (stream + 1)));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  static Rng substream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(substream_seed(seed, stream));
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Standard normal deviate (Box-Muller, pairs cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

  /// Binomial draw with `trials` Bernoulli(p) samples. O(trials), exact.
  std::uint64_t binomial(std::uint64_t trials, double p) {
    std::uint64_t count = 0;
    for (std::uint64_t i = 0; i < trials; ++i) {
      if (uniform() < p) ++count;
    }
    return count;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace slitsim
