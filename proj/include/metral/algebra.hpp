#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "metral/errors.hpp"

namespace metral {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Outcome of the axiom check: commutativity of the product, full symmetry
/// of the cubic tensor T[i,j,k] = sum_m C[i,j,m] G[m,k] (form associativity),
/// and positive definiteness of the Gram matrix.
struct ValidationReport {
  double commutativity_defect = 0.0;
  double associativity_defect = 0.0;
  double min_gram_eigenvalue = 0.0;
  bool passed = false;
  std::vector<std::string> details;
};

/// A finite-dimensional commutative algebra over R together with a symmetric
/// bilinear form. Immutable after construction; every member function is
/// const, so instances can be shared freely across threads.
///
/// structure()[(i*n + j)*n + k] is the coefficient of b_k in the basis
/// product b_i b_j. The stored tensor is symmetrized in (i, j); the largest
/// antisymmetric entry of the input is kept for validate(). The Gram matrix
/// is likewise stored symmetrized with its input asymmetry recorded.
class AlgebraSpec {
 public:
  AlgebraSpec(int dim, std::vector<double> structure, Mat gram,
              std::string label);

  int dim() const { return n_; }
  const std::string& label() const { return label_; }
  const std::vector<double>& structure() const { return c_; }
  double structure(int i, int j, int k) const {
    return c_[static_cast<std::size_t>((i * n_ + j)) * n_ + k];
  }
  const Mat& gram() const { return gram_; }
  double input_commutativity_defect() const { return input_comm_defect_; }
  double input_gram_asymmetry() const { return input_gram_asym_; }

  /// True when the Gram matrix admitted a Cholesky factorization; the
  /// whitening helpers below require it.
  bool spd_gram() const { return spd_; }
  /// Upper-triangular R with G = R^T R.
  const Mat& chol() const;
  Vec whiten(const Vec& x) const;    // x -> R x
  Vec unwhiten(const Vec& y) const;  // y -> R^{-1} y

  /// The product of x and y in coordinates.
  Vec multiply(const Vec& x, const Vec& y) const;
  /// The bilinear form x^T G y.
  double inner(const Vec& x, const Vec& y) const;
  double norm(const Vec& x) const;
  /// Matrix L with L y = multiply(x, y); G L is symmetric for a valid
  /// algebra (self-adjointness of multiplication).
  Mat left_mult_matrix(const Vec& x) const;
  /// R L_x R^{-1}: similar to L_x and symmetric, so its eigenvalues come
  /// from a plain self-adjoint solve instead of a generalized one.
  Mat whitened_mult_matrix(const Vec& x) const;

 private:
  void require_dim(const Vec& x) const;

  int n_;
  std::string label_;
  std::vector<double> c_;
  Mat gram_;
  std::vector<Mat> lb_;  // lb_[i](k, j) = C[i,j,k]; L_x = sum_i x_i lb_[i]
  double input_comm_defect_ = 0.0;
  double input_gram_asym_ = 0.0;
  bool spd_ = false;
  Mat chol_r_;      // upper triangular, G = R^T R
  Mat chol_r_inv_;  // R^{-1}
};

/// Checks the three axioms at tolerance tol. Never throws: failures are
/// carried in the report so invalid inputs can still be diagnosed.
ValidationReport validate(const AlgebraSpec& A, double tol = 1e-9);

/// Solves the overdetermined linear system sum_i e_i C[i,j,k] = delta_jk in
/// the least-squares sense. Returns the unit iff the residual, which equals
/// the Frobenius norm of L_e - I, is at most tol; the unit is unique
/// whenever it exists.
std::optional<Vec> find_unit(const AlgebraSpec& A, double tol = 1e-8);

struct NormalizeResult {
  AlgebraSpec algebra;
  double k;  // Gram scale factor: new gram = k * old gram
};

/// Callback seam: reports the minimum squared idempotent length of A, or
/// nullopt when the search found none. Keeps this module free of a
/// dependency on the search module; see normalize_searched() for the wired
/// version.
using MinLengthFinder =
    std::function<std::optional<double>(const AlgebraSpec&)>;

/// Rescales the Gram matrix by k = 1 / min squared idempotent length, so
/// extremal idempotents in the result have unit length. Throws
/// SearchBudgetError when the algebra has zero multiplication or the finder
/// comes back empty; the two causes are distinguished in the message.
NormalizeResult normalize(const AlgebraSpec& A, const MinLengthFinder& finder);

}  // namespace metral
