#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "metral/algebra.hpp"
#include "metral/rng.hpp"

namespace metral {

/// Tunables for the variational idempotent search. All tolerances are
/// positive; a multistart_count of 0 means "pick 50 * dim at run time".
struct SearchConfig {
  int multistart_count = 0;
  std::uint64_t seed = 0;
  int ascent_max_iters = 1000;
  int newton_max_iters = 60;
  double ascent_tol = 1e-8;
  double newton_tol = 1e-12;
  double dedup_distance = 1e-6;
  double classify_tol = 1e-8;
  double nilpotent_tol = 1e-10;
  double unit_tol = 1e-8;
  double axiom_tol = 1e-9;

  int resolve_multistart(int dim) const {
    return multistart_count > 0 ? multistart_count : 50 * dim;
  }
};

enum class IdempotentKind { unit, extremal, other };

const char* to_string(IdempotentKind kind);

/// A found idempotent. residual is |c c - c| in the Gram norm and is at most
/// newton_tol; manifold_dim counts the eigenvalues of the Jacobian
/// 2 L_c - 1 within classify_tol of zero, i.e. the local dimension of the
/// idempotent variety through c.
struct IdempotentRecord {
  Vec c;
  double residual = 0.0;
  double sq_length = 0.0;
  IdempotentKind kind = IdempotentKind::other;
  Vec lc_spectrum;  // eigenvalues of L_c, ascending
  int manifold_dim = 0;
};

struct AscentResult {
  Vec x;
  double grad_norm = 0.0;
  int iters = 0;
  bool converged = false;
};

struct SearchStats {
  int starts = 0;
  int nilpotent = 0;     // stationary points routed to the nilpotent branch
  int divergent = 0;     // Newton refinements that failed
  int nonconverged = 0;  // ascents that ended flagged
};

struct SearchOutcome {
  std::vector<IdempotentRecord> records;
  SearchStats stats;
};

/// The cubic form <x x, x>.
double cubic_form(const AlgebraSpec& A, const Vec& x);

/// Riemannian gradient ascent of <x x, x> on the Gram unit sphere with a
/// normalization retraction and backtracking line search; near stationarity
/// the iterate is polished by the idempotent Newton step so the returned
/// point satisfies |grad| <= ascent_tol rather than stalling at the rounding
/// floor of the line search. On non-convergence the point is still returned,
/// flagged via converged = false.
AscentResult sphere_ascent(const AlgebraSpec& A, const Vec& x0,
                           const SearchConfig& cfg);

/// Rescales a stationary point to the idempotent through it (c = x/<x x, x>
/// after normalizing x to unit length) and runs Newton on F(c) = c c - c
/// with the pseudoinverse of the symmetric Jacobian 2 L_c - 1, restricted to
/// eigenvalues above 1e-8 of the largest so idempotent manifolds do not stall
/// the iteration. Returns nullopt on the nilpotent branch
/// |<x x, x>| <= nilpotent_tol; throws SearchBudgetError when Newton fails.
std::optional<IdempotentRecord> refine_idempotent(const AlgebraSpec& A,
                                                  const Vec& x,
                                                  const SearchConfig& cfg);

/// Multistart search: seeded random unit starts, ascent, refinement,
/// deduplication at dedup_distance (keeping the smaller residual), unit
/// detection, classification, and a canonical sort by (sq_length,
/// lexicographic coordinates). The unit, when it exists, is always appended
/// explicitly: it can be a saddle of the cubic form and so invisible to
/// ascent. Deterministic given seed. On an idempotent manifold the records
/// are samples; the search never claims exhaustiveness of a continuum.
SearchOutcome enumerate_idempotents(const AlgebraSpec& A,
                                    const SearchConfig& cfg);

/// Assigns kinds: unit when c matches the algebra unit within
/// dedup_distance, extremal when sq_length is minimal over the list within
/// classify_tol, other otherwise.
void classify_records(const AlgebraSpec& A,
                      std::vector<IdempotentRecord>& records,
                      const SearchConfig& cfg);

struct ExtremalReport {
  std::vector<IdempotentRecord> records;  // minimal-length subset
  double min_sq_length = 0.0;
  int sample_violations = 0;  // unit samples with <x x, x> > 1/|c|
  double max_excess = 0.0;    // worst violation amount over the samples
};

/// The records of minimal squared length within classify_tol, plus a seeded
/// sampling check of the extremal inequality <x, x x> <= |x|^3 / |c|: a
/// violation means the search missed a shorter idempotent.
ExtremalReport extremal_set(const AlgebraSpec& A,
                            const std::vector<IdempotentRecord>& records,
                            const SearchConfig& cfg, int samples = 1000);

struct SpectralReport {
  Vec restricted_spectrum;  // eigenvalues of L_c on the complement of c
  double max_restricted = 0.0;
  bool extremal_consistent = false;  // max <= 1/2 + classify_tol
  int unit_eigenvalue_multiplicity = 0;
  bool unit_eigenvalue_simple = false;
};

/// Eigenvalues of L_c restricted to the Gram-orthogonal complement of c.
/// For an extremal idempotent the restriction is bounded by 1/2 and the
/// eigenvalue 1 of the full operator is simple; running this on the unit is
/// the canonical negative control (L_e = 1 everywhere).
SpectralReport spectral_check(const AlgebraSpec& A, const IdempotentRecord& rec,
                              const SearchConfig& cfg);

struct SubspaceResult {
  Vec u;
  double lambda = 0.0;  // <u u, u> at the unit-norm result
  double defect = 0.0;  // in-U component of u u - lambda u orthogonal to u
  bool converged = true;
};

/// Maximizes the cubic form over the unit sphere of span(U_basis): the same
/// ascent projected into the subspace, polished by a bordered Newton solve
/// of the stationarity system. At the result, u u = lambda u + w with w
/// orthogonal to U up to the in-U defect (at most ascent_tol). For a
/// one-dimensional U the claim is trivial and the basis direction is
/// returned directly. Throws std::invalid_argument when the cubic form
/// vanishes identically on U (zero or orthogonal products), since the
/// underlying hypothesis UU != 0 then has no witness in U.
SubspaceResult subspace_stationary(const AlgebraSpec& A,
                                   const std::vector<Vec>& U_basis,
                                   const SearchConfig& cfg);

/// normalize() wired to enumerate_idempotents as the length finder.
NormalizeResult normalize_searched(const AlgebraSpec& A,
                                   const SearchConfig& cfg);

/// A Gram-unit vector drawn uniformly from the sphere (normals in whitened
/// coordinates, normalized, mapped back).
Vec random_gram_unit(const AlgebraSpec& A, Rng& rng);

}  // namespace metral
