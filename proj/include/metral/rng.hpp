#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <random>

namespace metral {

/// Deterministic random stream. The mapping from raw mt19937_64 output to
/// doubles is fixed at the bit level, so equal seeds reproduce identical
/// draws on every platform with IEEE doubles, independent of the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; the first factor is drawn from (0, 1]
  /// so the logarithm is always finite.
  double normal() {
    const double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  /// Vector of independent standard normals, filled in index order.
  Eigen::VectorXd normal_vector(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  /// Derives an independent deterministic stream for a named sub-task, so
  /// samplers added later never shift the draws of existing ones.
  static std::uint64_t substream(std::uint64_t seed, std::uint64_t salt) {
    // splitmix64 finalizer over seed + salt.
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr double kPi = 3.141592653589793238462643383279502884;
  std::mt19937_64 eng_;
};

}  // namespace metral
