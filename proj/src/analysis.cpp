#include "metral/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "metral/constructions.hpp"

namespace metral {

namespace {

// Substream salts disjoint from the ones used by the search module, so the
// samplers here never share draws with the multistart machinery.
constexpr std::uint64_t kSaltQuadr0 = 3;
constexpr std::uint64_t kSaltExplicitm = 4;
constexpr std::uint64_t kSaltJordan = 5;
constexpr std::uint64_t kSaltIneq1 = 6;
constexpr std::uint64_t kSaltHom = 7;

bool is_unit_record(const AlgebraSpec& A, const IdempotentRecord& rec,
                    const Vec& e, const SearchConfig& cfg) {
  return A.norm(rec.c - e) <= cfg.dedup_distance;
}

void require_normalized_minimal(const MinimalityReport& minimality,
                                const SearchConfig& cfg, const char* op) {
  if (!minimality.is_minimal)
    throw MinimalityError(std::string(op) +
                          ": requires a minimal algebra, but the minimality "
                          "test failed (gap " +
                          std::to_string(minimality.gap) + ")");
  if (std::abs(minimality.extremal_sq_length - 1.0) > cfg.classify_tol)
    throw MinimalityError(
        std::string(op) +
        ": requires a normalized algebra (extremal squared length 1), got " +
        std::to_string(minimality.extremal_sq_length) + "; normalize first");
}

}  // namespace

MinimalityReport minimality_test(const AlgebraSpec& A,
                                 const std::vector<IdempotentRecord>& records,
                                 const SearchConfig& cfg) {
  const std::optional<Vec> e = find_unit(A, cfg.unit_tol);
  if (!e)
    throw NonUnitalError(
        "minimality_test: the algebra has no unit, so conjugation and the "
        "minimality gap are undefined");
  if (records.empty())
    throw SearchBudgetError(
        "minimality_test: the search produced no idempotents to decide on");

  MinimalityReport rep;
  rep.unit = *e;
  rep.unit_sq_length = A.inner(*e, *e);
  for (const IdempotentRecord& rec : records) {
    const Vec cbar = *e - rec.c;
    rep.conj_residual_max = std::max(
        rep.conj_residual_max, A.norm(A.multiply(cbar, cbar) - cbar));
    rep.orth_residual_max =
        std::max(rep.orth_residual_max, std::abs(A.inner(rec.c, cbar)));
    if (!is_unit_record(A, rec, *e, cfg)) {
      if (!rep.has_nontrivial || rec.sq_length < rep.extremal_sq_length)
        rep.extremal_sq_length = rec.sq_length;
      rep.has_nontrivial = true;
    }
  }

  if (rep.has_nontrivial) {
    rep.gap = rep.unit_sq_length - 2.0 * rep.extremal_sq_length;
    rep.is_minimal = std::abs(rep.gap) <= cfg.classify_tol;
    rep.caveat =
        "decided on " + std::to_string(records.size()) +
        " found idempotent(s); a shorter idempotent missed by the search "
        "budget would flip the verdict";
  } else {
    rep.is_minimal = false;
    rep.caveat =
        "no idempotent distinct from the unit was found (one-dimensional "
        "algebra or exhausted budget); minimality needs a nontrivial "
        "extremal idempotent, so the verdict defaults to false and the "
        "extremal fields are meaningless";
  }
  return rep;
}

ClassificationReport classify_idempotents_minimal(
    const AlgebraSpec& A, const std::vector<IdempotentRecord>& records,
    const MinimalityReport& minimality, const SearchConfig& cfg) {
  if (!minimality.is_minimal)
    throw MinimalityError(
        "classify_idempotents_minimal: requires a minimal algebra, but the "
        "minimality test failed (gap " +
        std::to_string(minimality.gap) + ")");

  ClassificationReport rep;
  rep.expected_sq_length = 0.5 * minimality.unit_sq_length;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (is_unit_record(A, records[i], minimality.unit, cfg)) continue;
    if (std::abs(records[i].sq_length - rep.expected_sq_length) >
        cfg.classify_tol)
      rep.violators.push_back(static_cast<int>(i));
  }
  rep.pass = rep.violators.empty();
  return rep;
}

HalfEigenspaceReport half_eigenspace_check(const AlgebraSpec& A,
                                           const IdempotentRecord& rec,
                                           const SearchConfig& cfg) {
  const std::optional<Vec> e = find_unit(A, cfg.unit_tol);
  if (!e)
    throw NonUnitalError(
        "half_eigenspace_check: the algebra has no unit, so the conjugate "
        "idempotent is undefined");

  HalfEigenspaceReport rep;
  const Vec cbar = *e - rec.c;
  const Mat b = orthonormal_complement(A, {rec.c, cbar});
  if (b.cols() == 0) {
    rep.restricted_spectrum = Vec(0);
    rep.pass = true;  // vacuous: span{c, cbar} is everything
    return rep;
  }

  // Restriction of L_c to the complement in its G-orthonormal basis;
  // symmetric because G L_c is.
  const Mat m = b.transpose() * A.gram() * A.left_mult_matrix(rec.c) * b;
  Eigen::SelfAdjointEigenSolver<Mat> es(Mat(0.5 * (m + m.transpose())),
                                        Eigen::EigenvaluesOnly);
  rep.restricted_spectrum = es.eigenvalues();
  rep.max_deviation = (es.eigenvalues().array() - 0.5).abs().maxCoeff();
  rep.pass = rep.max_deviation <= cfg.classify_tol;
  return rep;
}

double product_formula_check(const AlgebraSpec& A,
                             const MinimalityReport& minimality,
                             const IdempotentRecord& c1,
                             const IdempotentRecord& c2,
                             const SearchConfig& cfg) {
  require_normalized_minimal(minimality, cfg, "product_formula_check");
  const Vec& e = minimality.unit;
  const Vec lhs = 2.0 * A.multiply(c1.c, c2.c);
  const Vec rhs = c1.c + c2.c - A.inner(e - c1.c, c2.c) * e;
  return A.norm(lhs - rhs);
}

SpanReport span_check(const AlgebraSpec& A,
                      const std::vector<IdempotentRecord>& records,
                      const SearchConfig& cfg) {
  (void)cfg;
  SpanReport rep;
  std::vector<const Vec*> ext;
  for (const IdempotentRecord& rec : records)
    if (rec.kind == IdempotentKind::extremal) ext.push_back(&rec.c);
  rep.extremal_count = static_cast<int>(ext.size());

  if (!ext.empty()) {
    Mat m(A.dim(), rep.extremal_count);
    for (int i = 0; i < rep.extremal_count; ++i) m.col(i) = *ext[i];
    Eigen::JacobiSVD<Mat> svd(m);
    const Vec& sv = svd.singularValues();
    if (sv.size() > 0 && sv[0] > 0.0) {
      const double cut = 1e-8 * sv[0];
      for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > cut) ++rep.rank;
    }
  }
  rep.verdict = rep.rank == A.dim();
  rep.inconclusive = !rep.verdict && rep.extremal_count < 2 * A.dim();
  return rep;
}

double quadratic_relation_check(const AlgebraSpec& A,
                                const MinimalityReport& minimality,
                                const Vec& x, const SearchConfig& cfg) {
  require_normalized_minimal(minimality, cfg, "quadratic_relation_check");
  const Vec& e = minimality.unit;
  const double t = A.inner(x, e);
  const double d = 0.5 * (t * t - A.inner(x, x));
  return A.norm(A.multiply(x, x) - t * x + d * e);
}

double jordan_check(const AlgebraSpec& A, const Vec& x) {
  const Mat wx = A.whitened_mult_matrix(x);
  const Mat wxx = A.whitened_mult_matrix(A.multiply(x, x));
  const Mat k = wxx * wx - wx * wxx;
  Eigen::JacobiSVD<Mat> svd(k);
  return svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
}

Mat orthonormal_complement(const AlgebraSpec& A, const std::vector<Vec>& vs) {
  const int n = A.dim();
  std::vector<Vec> basis;  // whitened, orthonormal

  // Modified Gram-Schmidt with one re-orthogonalization pass; candidates
  // landing inside the current span are dropped.
  auto accept = [&](Vec w) -> bool {
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& b : basis) w -= b.dot(w) * b;
    const double nw = w.norm();
    if (nw <= 1e-10) return false;
    basis.push_back(w / nw);
    return true;
  };

  for (const Vec& v : vs) accept(A.whiten(v));
  const int k = static_cast<int>(basis.size());

  Mat out(n, n - k);
  int col = 0;
  for (int i = 0; i < n && col < n - k; ++i)
    if (accept(Vec(Vec::Unit(n, i)))) out.col(col++) = A.unwhiten(basis.back());
  return out.leftCols(col);
}

std::vector<IdempotentRecord> rescale_records(
    const AlgebraSpec& A_scaled, const std::vector<IdempotentRecord>& records,
    double k) {
  std::vector<IdempotentRecord> out = records;
  for (IdempotentRecord& rec : out) {
    rec.sq_length *= k;
    rec.residual = A_scaled.norm(A_scaled.multiply(rec.c, rec.c) - rec.c);
  }
  return out;
}

IsomorphismReport build_isomorphism_normalized(
    const AlgebraSpec& A, const std::vector<IdempotentRecord>& records,
    const MinimalityReport& minimality, const SearchConfig& cfg) {
  require_normalized_minimal(minimality, cfg, "build_isomorphism");
  const int n = A.dim();
  const Vec& e = minimality.unit;

  IsomorphismReport rep;
  const Mat u = orthonormal_complement(A, {e});
  Mat phi(n, n);
  phi.col(0) = e;
  phi.rightCols(n - 1) = u;
  rep.phi = phi;
  rep.model.ambient_dim = n;
  rep.model.f = 0.5 * Mat::Identity(n - 1, n - 1);
  rep.model.iso = phi;

  // Homomorphism defect phi(z w) - phi(z) phi(w) over seeded random unit
  // pairs of the model algebra, measured in the Gram norm of A.
  const AlgebraSpec model = spin_factor(rep.model.f);
  Rng rng(Rng::substream(cfg.seed, kSaltHom));
  for (int s = 0; s < 1000; ++s) {
    const Vec z = random_gram_unit(model, rng);
    const Vec w = random_gram_unit(model, rng);
    const Vec lhs = phi * model.multiply(z, w);
    const Vec rhs = A.multiply(phi * z, phi * w);
    rep.max_hom_defect = std::max(rep.max_hom_defect, A.norm(lhs - rhs));
  }

  // Square identities of the reflections 2c - e over the extremal records.
  for (const IdempotentRecord& rec : records)
    if (rec.kind == IdempotentKind::extremal)
      rep.basis_idempotents.push_back(rec.c);
  for (std::size_t i = 0; i < rep.basis_idempotents.size(); ++i) {
    const Vec si = 2.0 * rep.basis_idempotents[i] - e;
    rep.max_square_defect =
        std::max(rep.max_square_defect, A.norm(A.multiply(si, si) - e));
    for (std::size_t j = i + 1; j < rep.basis_idempotents.size(); ++j) {
      const Vec sj = 2.0 * rep.basis_idempotents[j] - e;
      const double coeff =
          1.0 - 2.0 * A.inner(e - rep.basis_idempotents[i],
                              rep.basis_idempotents[j]);
      rep.max_square1_defect = std::max(
          rep.max_square1_defect, A.norm(A.multiply(si, sj) - coeff * e));
    }
  }

  Eigen::FullPivLU<Mat> lu(phi);
  rep.verdict = rep.max_hom_defect <= 1e-8 && lu.isInvertible();
  return rep;
}

IsomorphismReport build_isomorphism(const AlgebraSpec& A,
                                    const SearchConfig& cfg) {
  const SearchOutcome so = enumerate_idempotents(A, cfg);
  const MinimalityReport pre = minimality_test(A, so.records, cfg);
  if (!pre.is_minimal)
    throw MinimalityError(
        "build_isomorphism: requires a minimal algebra, but the minimality "
        "test failed (gap " +
        std::to_string(pre.gap) +
        "); the spin-factor identification only exists for minimal algebras");

  const double min_len = pre.extremal_sq_length;
  const NormalizeResult nr = normalize(
      A, [min_len](const AlgebraSpec&) -> std::optional<double> {
        return min_len;
      });
  const std::vector<IdempotentRecord> records =
      rescale_records(nr.algebra, so.records, nr.k);
  const MinimalityReport min_norm =
      minimality_test(nr.algebra, records, cfg);
  IsomorphismReport rep =
      build_isomorphism_normalized(nr.algebra, records, min_norm, cfg);
  rep.normalize_k = nr.k;
  return rep;
}

IdentityTable identity_residual_table(
    const AlgebraSpec& A_norm, const std::vector<IdempotentRecord>& records,
    const MinimalityReport& minimality, const SearchConfig& cfg) {
  require_normalized_minimal(minimality, cfg, "identity_residual_table");
  const AlgebraSpec& A = A_norm;
  const Vec& e = minimality.unit;

  IdentityTable table;
  auto put = [&table](const char* key, double value, double threshold) {
    table[key] = CheckEntry{value, threshold, value <= threshold};
  };

  std::vector<const IdempotentRecord*> ext;
  for (const IdempotentRecord& rec : records)
    if (rec.kind == IdempotentKind::extremal) ext.push_back(&rec);

  double barc = 0.0, orthc = 0.0, ec = 0.0, ec1 = 0.0;
  for (const IdempotentRecord& rec : records) {
    const Vec cbar = e - rec.c;
    barc = std::max(barc, A.norm(A.multiply(cbar, cbar) - cbar));
    orthc = std::max(orthc, std::abs(A.inner(rec.c, cbar)));
    ec = std::max(ec,
                  std::abs(A.inner(e, rec.c) - A.inner(rec.c, rec.c)));
  }
  for (const IdempotentRecord* rec : ext)
    ec1 = std::max(ec1, std::abs(A.inner(e, rec->c) - 1.0));
  put("barc", barc, 1e-9);
  put("orthc", orthc, 1e-9);
  put("ec", ec, 1e-9);
  put("ec1", ec1, 1e-9);

  double prod1 = 0.0;
  for (std::size_t i = 0; i < ext.size(); ++i)
    for (std::size_t j = i; j < ext.size(); ++j)
      prod1 = std::max(
          prod1, product_formula_check(A, minimality, *ext[i], *ext[j], cfg));
  put("prod1", prod1, 1e-8);

  double square = 0.0, square1 = 0.0, lc12 = 0.0;
  for (std::size_t i = 0; i < ext.size(); ++i) {
    const Vec si = 2.0 * ext[i]->c - e;
    square = std::max(square, A.norm(A.multiply(si, si) - e));
    lc12 = std::max(lc12, half_eigenspace_check(A, *ext[i], cfg).max_deviation);
    for (std::size_t j = i + 1; j < ext.size(); ++j) {
      const Vec sj = 2.0 * ext[j]->c - e;
      const double coeff = 1.0 - 2.0 * A.inner(e - ext[i]->c, ext[j]->c);
      square1 =
          std::max(square1, A.norm(A.multiply(si, sj) - coeff * e));
    }
  }
  put("square", square, 1e-8);
  put("square1", square1, 1e-8);
  put("Lc12", lc12, 1e-8);

  {
    Rng rng(Rng::substream(cfg.seed, kSaltQuadr0));
    double worst = 0.0;
    for (int s = 0; s < 1000; ++s)
      worst = std::max(worst, quadratic_relation_check(
                                  A, minimality, random_gram_unit(A, rng), cfg));
    put("quadr0", worst, 1e-8);
  }
  {
    Rng rng(Rng::substream(cfg.seed, kSaltExplicitm));
    double worst = 0.0;
    for (int s = 0; s < 1000; ++s) {
      const Vec x = random_gram_unit(A, rng);
      const Vec y = random_gram_unit(A, rng);
      const double xe = A.inner(x, e), ye = A.inner(y, e);
      const Vec closed = 0.5 * (xe * y + ye * x - (xe * ye - A.inner(x, y)) * e);
      worst = std::max(worst, A.norm(A.multiply(x, y) - closed));
    }
    put("explicitm", worst, 1e-8);
  }
  {
    Rng rng(Rng::substream(cfg.seed, kSaltJordan));
    double worst = 0.0;
    for (int s = 0; s < 100; ++s)
      worst = std::max(worst, jordan_check(A, random_gram_unit(A, rng)));
    put("jordan", worst, 1e-10);
  }
  {
    // On the unit sphere the extremal inequality of a normalized algebra
    // reads <x x, x> <= 1; the entry stores the worst excess (signed).
    Rng rng(Rng::substream(cfg.seed, kSaltIneq1));
    double worst = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < 1000; ++s)
      worst = std::max(worst, cubic_form(A, random_gram_unit(A, rng)) - 1.0);
    put("ineq1", worst, 1e-9);
  }

  return table;
}

}  // namespace metral
