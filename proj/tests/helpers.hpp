#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "metral/algebra.hpp"
#include "metral/constructions.hpp"
#include "metral/rng.hpp"

namespace test_helpers {

using metral::AlgebraSpec;
using metral::Mat;
using metral::Vec;

inline Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

inline Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

inline double max_abs_diff(const Vec& a, const Vec& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

/// Componentwise product on R^2 with a prescribed off-diagonal Gram entry;
/// g01 = 0 is the valid rsquare algebra, g01 != 0 breaks form associativity
/// by exactly |g01|.
inline AlgebraSpec rsquare_gram(double g01) {
  std::vector<double> c(8, 0.0);
  c[(0 * 2 + 0) * 2 + 0] = 1.0;
  c[(1 * 2 + 1) * 2 + 1] = 1.0;
  Mat g(2, 2);
  g << 1.0, g01, g01, 1.0;
  return AlgebraSpec(2, std::move(c), std::move(g), "rsquare_gram");
}

/// Componentwise R^2 with gram = s * I; idempotent (1,0) has squared
/// length s.
inline AlgebraSpec rsquare_scaled(double s) {
  std::vector<double> c(8, 0.0);
  c[(0 * 2 + 0) * 2 + 0] = 1.0;
  c[(1 * 2 + 1) * 2 + 1] = 1.0;
  return AlgebraSpec(2, std::move(c), s * Mat::Identity(2, 2),
                     "rsquare_scaled");
}

/// The zero-multiplication algebra on R^n with identity Gram: valid,
/// non-unital, and idempotent-free.
inline AlgebraSpec zero_algebra(int n) {
  return AlgebraSpec(n, std::vector<double>(
                            static_cast<std::size_t>(n) * n * n, 0.0),
                     Mat::Identity(n, n), "zero_algebra");
}

/// A valid metrised algebra from a seeded random fully symmetric cubic
/// tensor with identity Gram: commutative and form-associative by
/// construction, generically non-unital and non-Jordan.
inline AlgebraSpec random_symmetric_algebra(int n, std::uint64_t seed) {
  metral::Rng rng(seed);
  std::vector<double> c(static_cast<std::size_t>(n) * n * n, 0.0);
  auto at = [&c, n](int i, int j, int k) -> double& {
    return c[(static_cast<std::size_t>(i) * n + j) * n + k];
  };
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = j; k < n; ++k) {
        const double v = rng.normal();
        at(i, j, k) = v;
        at(i, k, j) = v;
        at(j, i, k) = v;
        at(j, k, i) = v;
        at(k, i, j) = v;
        at(k, j, i) = v;
      }
  return AlgebraSpec(n, std::move(c), Mat::Identity(n, n),
                     "random_symmetric(" + std::to_string(n) + ")");
}

/// Seeded random symmetric positive definite matrix, well conditioned.
inline Mat random_spd(int m, std::uint64_t seed) {
  metral::Rng rng(seed);
  Mat a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = rng.normal();
  return Mat::Identity(m, m) + (0.5 / m) * (a * a.transpose());
}

}  // namespace test_helpers
