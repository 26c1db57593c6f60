#include "metral/constructions.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

namespace metral {

namespace {

std::size_t flat(int n, int i, int j, int k) {
  return (static_cast<std::size_t>(i) * n + j) * n + k;
}

}  // namespace

AlgebraSpec spin_factor(const Mat& f) {
  const int m = static_cast<int>(f.rows());
  if (m < 1 || f.cols() != m)
    throw std::invalid_argument("spin_factor: f must be a square matrix of "
                                "size at least 1");
  if ((f - f.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("spin_factor: f must be symmetric");
  const Mat fs = 0.5 * (f + f.transpose());
  Eigen::LLT<Mat> llt(fs);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("spin_factor: f must be positive definite");

  const int n = m + 1;
  std::vector<double> c(static_cast<std::size_t>(n) * n * n, 0.0);
  c[flat(n, 0, 0, 0)] = 1.0;
  for (int i = 1; i < n; ++i) {
    c[flat(n, 0, i, i)] = 1.0;
    c[flat(n, i, 0, i)] = 1.0;
    for (int j = 1; j < n; ++j) c[flat(n, i, j, 0)] = fs(i - 1, j - 1);
  }

  // Trace form: the generic trace of a (+) u is 2a, so |eps|^2 = 2 and the
  // form on U is 2f. Doubling is exact, so validate() sees zero defect.
  Mat g = Mat::Zero(n, n);
  g(0, 0) = 2.0;
  g.block(1, 1, m, m) = 2.0 * fs;

  return AlgebraSpec(n, std::move(c), std::move(g),
                     "spin_factor(m=" + std::to_string(m) + ")");
}

AlgebraSpec sym_jordan(int n) {
  if (n < 1) throw std::invalid_argument("sym_jordan: n must be at least 1");
  const int dim = n * (n + 1) / 2;

  // Basis order: E_00 .. E_(n-1)(n-1), then S_pq = (E_pq + E_qp)/sqrt(2)
  // for p < q in lexicographic order.
  std::vector<std::pair<int, int>> basis;
  basis.reserve(dim);
  for (int p = 0; p < n; ++p) basis.emplace_back(p, p);
  for (int p = 0; p < n; ++p)
    for (int q = p + 1; q < n; ++q) basis.emplace_back(p, q);
  std::vector<std::vector<int>> index(n, std::vector<int>(n, -1));
  for (int a = 0; a < dim; ++a) {
    index[basis[a].first][basis[a].second] = a;
    index[basis[a].second][basis[a].first] = a;
  }

  const double half = 0.5;
  const double quarter_sqrt2 = std::sqrt(2.0) / 4.0;

  std::vector<double> c(static_cast<std::size_t>(dim) * dim * dim, 0.0);
  auto set_pair = [&](int a, int b, int k, double v) {
    c[flat(dim, a, b, k)] = v;
    c[flat(dim, b, a, k)] = v;
  };
  // Every coefficient is one of {1, 1/2, sqrt(2)/4}, assigned as the same
  // literal for every index pattern of a product, so the cubic tensor is
  // bitwise symmetric and validate() sees zero defect (the Gram matrix is
  // exactly the identity in this basis).
  for (int a = 0; a < dim; ++a) {
    const auto [p, q] = basis[a];
    for (int b = a; b < dim; ++b) {
      const auto [r, s] = basis[b];
      if (p == q && r == s) {
        if (p == r) set_pair(a, b, a, 1.0);  // E_pp E_pp = E_pp
      } else if (p == q) {                   // diagonal times off-diagonal
        if (p == r || p == s) set_pair(a, b, b, half);
      } else if (r == s) {                   // off-diagonal times diagonal
        if (r == p || r == q) set_pair(a, b, a, half);
      } else if (p == r && q == s) {         // S_pq S_pq = (E_pp + E_qq)/2
        set_pair(a, b, index[p][p], half);
        set_pair(a, b, index[q][q], half);
      } else if (p == r || p == s || q == r || q == s) {
        // One shared index: S_pq S_qr = sqrt(2)/4 S_pr.
        const int shared = (p == r || p == s) ? p : q;
        const int u = (p == shared) ? q : p;
        const int v = (r == shared) ? s : r;
        set_pair(a, b, index[u][v], quarter_sqrt2);
      }
    }
  }

  return AlgebraSpec(dim, std::move(c), Mat::Identity(dim, dim),
                     "sym_jordan(n=" + std::to_string(n) + ")");
}

AlgebraSpec direct_sum(const AlgebraSpec& A, const AlgebraSpec& B) {
  const int na = A.dim();
  const int nb = B.dim();
  const int n = na + nb;
  std::vector<double> c(static_cast<std::size_t>(n) * n * n, 0.0);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < na; ++j)
      for (int k = 0; k < na; ++k)
        c[flat(n, i, j, k)] = A.structure(i, j, k);
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j)
      for (int k = 0; k < nb; ++k)
        c[flat(n, na + i, na + j, na + k)] = B.structure(i, j, k);
  Mat g = Mat::Zero(n, n);
  g.topLeftCorner(na, na) = A.gram();
  g.bottomRightCorner(nb, nb) = B.gram();
  return AlgebraSpec(n, std::move(c), std::move(g),
                     "direct_sum(" + A.label() + ", " + B.label() + ")");
}

AlgebraSpec real_line() {
  return AlgebraSpec(1, {1.0}, Mat::Identity(1, 1), "real_line");
}

AlgebraSpec rsquare() {
  AlgebraSpec sum = direct_sum(real_line(), real_line());
  return AlgebraSpec(2, sum.structure(), sum.gram(), "rsquare");
}

}  // namespace metral
