#include "metral/algebra.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <utility>

namespace metral {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

AlgebraSpec::AlgebraSpec(int dim, std::vector<double> structure, Mat gram,
                         std::string label)
    : n_(dim), label_(std::move(label)), c_(std::move(structure)) {
  if (n_ <= 0) throw ParseError("dim: must be a positive integer");
  const std::size_t n = static_cast<std::size_t>(n_);
  if (c_.size() != n * n * n)
    throw ParseError("structure: expected " + std::to_string(n * n * n) +
                     " entries for dim " + std::to_string(n_) + ", got " +
                     std::to_string(c_.size()));
  if (gram.rows() != n_ || gram.cols() != n_)
    throw ParseError("gram: expected a " + std::to_string(n_) + "x" +
                     std::to_string(n_) + " matrix");

  // Symmetrize C in (i, j), recording the largest antisymmetric entry.
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      for (int k = 0; k < n_; ++k) {
        double& a = c_[(static_cast<std::size_t>(i) * n + j) * n + k];
        double& b = c_[(static_cast<std::size_t>(j) * n + i) * n + k];
        const double asym = 0.5 * std::abs(a - b);
        if (asym > input_comm_defect_) input_comm_defect_ = asym;
        const double sym = 0.5 * (a + b);
        a = sym;
        b = sym;
      }

  input_gram_asym_ = (gram - gram.transpose()).cwiseAbs().maxCoeff() * 0.5;
  gram_ = 0.5 * (gram + gram.transpose());

  lb_.reserve(n);
  for (int i = 0; i < n_; ++i) {
    Mat li = Mat::Zero(n_, n_);
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        li(k, j) = c_[(static_cast<std::size_t>(i) * n + j) * n + k];
    lb_.push_back(std::move(li));
  }

  Eigen::LLT<Mat> llt(gram_);
  if (llt.info() == Eigen::Success) {
    spd_ = true;
    chol_r_ = llt.matrixU();
    chol_r_inv_ =
        chol_r_.triangularView<Eigen::Upper>().solve(Mat::Identity(n_, n_));
  }
}

void AlgebraSpec::require_dim(const Vec& x) const {
  if (x.size() != n_)
    throw std::invalid_argument("dimension mismatch: expected " +
                                std::to_string(n_) + ", got " +
                                std::to_string(x.size()));
}

const Mat& AlgebraSpec::chol() const {
  if (!spd_)
    throw AxiomError("the Gram matrix is not positive definite; whitened "
                     "operations are unavailable");
  return chol_r_;
}

Vec AlgebraSpec::whiten(const Vec& x) const {
  require_dim(x);
  return chol() * x;
}

Vec AlgebraSpec::unwhiten(const Vec& y) const {
  require_dim(y);
  chol();
  return chol_r_inv_ * y;
}

Vec AlgebraSpec::multiply(const Vec& x, const Vec& y) const {
  require_dim(x);
  require_dim(y);
  Vec out = Vec::Zero(n_);
  for (int i = 0; i < n_; ++i)
    if (x[i] != 0.0) out.noalias() += x[i] * (lb_[i] * y);
  return out;
}

double AlgebraSpec::inner(const Vec& x, const Vec& y) const {
  require_dim(x);
  require_dim(y);
  return x.dot(gram_ * y);
}

double AlgebraSpec::norm(const Vec& x) const {
  const double q = inner(x, x);
  return q > 0.0 ? std::sqrt(q) : 0.0;
}

Mat AlgebraSpec::left_mult_matrix(const Vec& x) const {
  require_dim(x);
  Mat l = Mat::Zero(n_, n_);
  for (int i = 0; i < n_; ++i)
    if (x[i] != 0.0) l.noalias() += x[i] * lb_[i];
  return l;
}

Mat AlgebraSpec::whitened_mult_matrix(const Vec& x) const {
  chol();
  Mat w = chol_r_ * left_mult_matrix(x) * chol_r_inv_;
  return 0.5 * (w + w.transpose());
}

ValidationReport validate(const AlgebraSpec& A, double tol) {
  ValidationReport report;
  const int n = A.dim();

  report.commutativity_defect = A.input_commutativity_defect();
  report.details.push_back(
      "commutativity: max antisymmetric entry of C in (i,j) = " +
      format_double(report.commutativity_defect));
  if (A.input_gram_asymmetry() > 0.0)
    report.details.push_back("gram: symmetrized an asymmetric input, max "
                             "antisymmetric entry = " +
                             format_double(A.input_gram_asymmetry()));

  // T[i,j,k] = sum_m C[i,j,m] G[m,k] must be symmetric under every
  // permutation of (i,j,k); the defect is the worst entry over the five
  // non-identity permutations.
  std::vector<double> t(static_cast<std::size_t>(n) * n * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int m = 0; m < n; ++m)
          s += A.structure(i, j, m) * A.gram()(m, k);
        t[(static_cast<std::size_t>(i) * n + j) * n + k] = s;
      }
  auto at = [&](int i, int j, int k) {
    return t[(static_cast<std::size_t>(i) * n + j) * n + k];
  };
  double assoc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double base = at(i, j, k);
        for (double other : {at(i, k, j), at(j, i, k), at(j, k, i),
                             at(k, i, j), at(k, j, i)}) {
          const double d = std::abs(base - other);
          if (d > assoc) assoc = d;
        }
      }
  report.associativity_defect = assoc;
  report.details.push_back(
      "associativity: max asymmetry of T[i,j,k] = sum_m C[i,j,m] G[m,k] "
      "across index permutations = " +
      format_double(assoc));

  Eigen::SelfAdjointEigenSolver<Mat> es(A.gram(),
                                        Eigen::EigenvaluesOnly);
  report.min_gram_eigenvalue = es.eigenvalues().minCoeff();
  report.details.push_back("gram definiteness: smallest eigenvalue = " +
                           format_double(report.min_gram_eigenvalue));

  report.passed = report.commutativity_defect <= tol &&
                  report.associativity_defect <= tol &&
                  report.min_gram_eigenvalue > 0.0;
  return report;
}

std::optional<Vec> find_unit(const AlgebraSpec& A, double tol) {
  const int n = A.dim();
  // Overdetermined system sum_i e_i C[i,j,k] = delta_jk: n^2 equations in n
  // unknowns; the least-squares residual equals the Frobenius norm of
  // L_e - I, which decides existence.
  Mat m(n * n, n);
  Vec b = Vec::Zero(n * n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) m(j * n + k, i) = A.structure(i, j, k);
      if (j == k) b[j * n + k] = 1.0;
    }
  Vec e = m.colPivHouseholderQr().solve(b);
  const double residual = (m * e - b).norm();
  if (residual <= tol) return e;
  return std::nullopt;
}

NormalizeResult normalize(const AlgebraSpec& A, const MinLengthFinder& finder) {
  bool zero_product = true;
  for (double v : A.structure())
    if (v != 0.0) {
      zero_product = false;
      break;
    }
  if (zero_product)
    throw SearchBudgetError(
        "normalize: the algebra has zero multiplication (VV = 0); there is "
        "no idempotent to normalize against");

  const std::optional<double> min_sq = finder(A);
  if (!min_sq)
    throw SearchBudgetError(
        "normalize: the idempotent search exhausted its budget without "
        "finding any idempotent; increase the multistart count");
  if (!(*min_sq > 0.0))
    throw SearchBudgetError("normalize: the reported minimum squared length " +
                            format_double(*min_sq) + " is not positive");

  const double k = 1.0 / *min_sq;
  AlgebraSpec scaled(A.dim(), A.structure(), A.gram() * k, A.label());
  return NormalizeResult{std::move(scaled), k};
}

}  // namespace metral
