#pragma once

#include <map>
#include <string>
#include <vector>

#include "metral/search.hpp"

namespace metral {

/// Minimality verdict data. gap = |e|^2 - 2 |c|^2 over the found set; the
/// verdict is decided on found idempotents only, so the caveat records the
/// search budget: a missed shorter idempotent would flip it.
struct MinimalityReport {
  Vec unit;
  double unit_sq_length = 0.0;
  bool has_nontrivial = false;    // some found idempotent differs from e
  double extremal_sq_length = 0.0;  // meaningful only when has_nontrivial
  double gap = 0.0;                 // meaningful only when has_nontrivial
  bool is_minimal = false;
  double conj_residual_max = 0.0;  // max |(e-c)(e-c) - (e-c)| over records
  double orth_residual_max = 0.0;  // max |<c, e-c>| over records
  std::string caveat;
};

/// Computes |e|^2, the extremal length over the found nontrivial records,
/// and the gap; also checks conjugation closure (e - c is an idempotent
/// orthogonal to c) on every record. Throws NonUnitalError without a unit
/// and SearchBudgetError on an empty record list.
MinimalityReport minimality_test(const AlgebraSpec& A,
                                 const std::vector<IdempotentRecord>& records,
                                 const SearchConfig& cfg);

struct ClassificationReport {
  double expected_sq_length = 0.0;  // |e|^2 / 2
  std::vector<int> violators;       // indices into the record list
  bool pass = false;
};

/// In a minimal algebra every nonzero idempotent except the unit is
/// extremal; checks that each found record is the unit or has squared length
/// |e|^2 / 2 within classify_tol. Refuses (MinimalityError) when the
/// minimality verdict is false. A violator falsifies minimality or reveals a
/// search artifact.
ClassificationReport classify_idempotents_minimal(
    const AlgebraSpec& A, const std::vector<IdempotentRecord>& records,
    const MinimalityReport& minimality, const SearchConfig& cfg);

struct HalfEigenspaceReport {
  Vec restricted_spectrum;     // eigenvalues of L_c on c-perp intersect cbar-perp
  double max_deviation = 0.0;  // max |lambda - 1/2|, 0 when the space is {0}
  bool pass = false;
};

/// Multiplication by an extremal idempotent of a minimal algebra is exactly
/// 1/2 on the complement of span{c, e-c}; reports the restricted spectrum
/// and whether every eigenvalue is 1/2 within classify_tol. Computable on
/// any unital algebra, so it doubles as a negative control off the minimal
/// class. Vacuously true in dimension 2.
HalfEigenspaceReport half_eigenspace_check(const AlgebraSpec& A,
                                           const IdempotentRecord& rec,
                                           const SearchConfig& cfg);

/// Gram norm of 2 c1 c2 - c1 - c2 + <e - c1, c2> e, the closed form of the
/// product of two extremal idempotents. Stated for normalized minimal
/// algebras: refuses (MinimalityError) unless the report says minimal with
/// extremal length 1 within classify_tol.
double product_formula_check(const AlgebraSpec& A,
                             const MinimalityReport& minimality,
                             const IdempotentRecord& c1,
                             const IdempotentRecord& c2,
                             const SearchConfig& cfg);

struct SpanReport {
  int rank = 0;
  int extremal_count = 0;
  bool verdict = false;       // rank == dim
  bool inconclusive = false;  // false verdict at a small sample count
};

/// Rank of the matrix of extremal record coordinates (singular values above
/// 1e-8 of the largest). A minimal algebra is spanned by its extremal
/// idempotents; a false verdict with fewer than 2 * dim extremal samples is
/// flagged inconclusive rather than treated as a counterexample.
SpanReport span_check(const AlgebraSpec& A,
                      const std::vector<IdempotentRecord>& records,
                      const SearchConfig& cfg);

/// Gram norm of x x - <x, e> x + d(x) e with d(x) = (<x,e>^2 - |x|^2) / 2,
/// the quadratic relation every element of a normalized minimal algebra
/// satisfies. Refuses (MinimalityError) off that class.
double quadratic_relation_check(const AlgebraSpec& A,
                                const MinimalityReport& minimality,
                                const Vec& x, const SearchConfig& cfg);

/// Spectral norm of the commutator [L_{x x}, L_x] in whitened coordinates.
/// Zero characterizes Jordan algebras; a generic commutative metrised
/// algebra gives a strictly positive value.
double jordan_check(const AlgebraSpec& A, const Vec& x);

/// The target Jordan algebra of a bilinear form plus the isomorphism matrix.
struct SpinFactorModel {
  int ambient_dim = 0;
  Mat f;    // bilinear form on the complement of the unit
  Mat iso;  // the map phi; column 0 is the image of the model unit
};

struct IsomorphismReport {
  SpinFactorModel model;
  Mat phi;
  double max_hom_defect = 0.0;     // over seeded random pairs
  double max_square_defect = 0.0;  // |(2c - e)^2 - e| over basis idempotents
  double max_square1_defect = 0.0; // pairwise product of the 2c - e basis
  std::vector<Vec> basis_idempotents;
  double normalize_k = 1.0;
  bool verdict = false;  // max_hom_defect <= 1e-8 and phi invertible
};

/// Builds and verifies the isomorphism of a minimal algebra onto the spin
/// factor of f = <.,.>/|e|^2: normalizes, takes phi(a (+) u) = a e + u over a
/// Gram-orthonormal basis of the complement of e, and measures the
/// homomorphism defect on seeded random pairs plus the square identities of
/// the 2c - e basis. Refuses (MinimalityError) when the algebra is not
/// minimal: the map would be meaningless. A false verdict indicates the
/// minimality verdict was a numerical false positive.
IsomorphismReport build_isomorphism(const AlgebraSpec& A,
                                    const SearchConfig& cfg);

/// build_isomorphism on a pre-normalized algebra with its records and
/// minimality report already computed; lets a pipeline reuse one search.
IsomorphismReport build_isomorphism_normalized(
    const AlgebraSpec& A_norm, const std::vector<IdempotentRecord>& records,
    const MinimalityReport& minimality, const SearchConfig& cfg);

struct CheckEntry {
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Deterministically ordered residual table; keys are the identity names:
/// prod1, quadr0, explicitm, jordan, barc, orthc, ec, ec1, ineq1, Lc12,
/// square, square1.
using IdentityTable = std::map<std::string, CheckEntry>;

/// Evaluates every structural identity of a normalized minimal algebra over
/// the found records and seeded random samples. Refuses (MinimalityError)
/// off that class.
IdentityTable identity_residual_table(
    const AlgebraSpec& A_norm, const std::vector<IdempotentRecord>& records,
    const MinimalityReport& minimality, const SearchConfig& cfg);

/// Columns form a Gram-orthonormal basis of the Gram-orthogonal complement
/// of span(vs); deterministic given the input order. Near-zero input vectors
/// are dropped.
Mat orthonormal_complement(const AlgebraSpec& A, const std::vector<Vec>& vs);

/// Rescales records to an algebra whose Gram matrix was multiplied by k:
/// the vectors are unchanged, squared lengths scale by k, residuals are
/// recomputed, spectra and manifold dimensions are scale-invariant.
std::vector<IdempotentRecord> rescale_records(
    const AlgebraSpec& A_scaled, const std::vector<IdempotentRecord>& records,
    double k);

}  // namespace metral
