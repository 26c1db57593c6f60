#include "metral/search.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace metral {

namespace {

// Fixed substream salts so the samplers stay independent of each other.
constexpr std::uint64_t kSaltStarts = 0;
constexpr std::uint64_t kSaltExtremal = 1;
constexpr std::uint64_t kSaltSubspace = 2;

// Line-search parameters: Armijo slope fraction, step growth cap, and the
// smallest step before the search is declared stalled at the rounding floor.
constexpr double kArmijo = 1e-4;
constexpr double kMaxStep = 1e6;
constexpr double kMinStep = 1e-18;
// Gradient norm below which the Newton polish is attempted.
constexpr double kPolishTrigger = 1e-5;
// A refined idempotent with Gram norm below this is the zero idempotent and
// counts as a refinement failure.
constexpr double kZeroIdempotent = 1e-6;

struct NewtonOutcome {
  Vec c;
  double residual = std::numeric_limits<double>::infinity();
  int iters = 0;
  bool ok = false;
};

// Newton iteration on F(c) = c c - c. The whitened Jacobian 2 W_c - I is
// symmetric, so the pseudoinverse comes from an eigendecomposition with
// eigenvalues below 1e-8 of the largest treated as zero; on an idempotent
// manifold this restricts the step to the row space and leaves the tangent
// directions alone.
NewtonOutcome newton_idempotent(const AlgebraSpec& A, Vec c,
                                const SearchConfig& cfg) {
  const int n = A.dim();
  NewtonOutcome out;
  for (int it = 0; it <= cfg.newton_max_iters; ++it) {
    const Vec f = A.multiply(c, c) - c;
    const double res = A.norm(f);
    if (res <= cfg.newton_tol) {
      out.c = c;
      out.residual = res;
      out.iters = it;
      out.ok = true;
      return out;
    }
    if (it == cfg.newton_max_iters || !std::isfinite(res) ||
        c.norm() > 1e8)
      break;

    const Mat j = 2.0 * A.whitened_mult_matrix(c) - Mat::Identity(n, n);
    Eigen::SelfAdjointEigenSolver<Mat> es(j);
    const Vec& lam = es.eigenvalues();
    const double max_abs = lam.cwiseAbs().maxCoeff();
    if (!(max_abs > 0.0)) break;
    const double cutoff = 1e-8 * max_abs;
    Vec z = es.eigenvectors().transpose() * A.whiten(f);
    for (int i = 0; i < n; ++i)
      z[i] = std::abs(lam[i]) > cutoff ? z[i] / lam[i] : 0.0;
    c -= A.unwhiten(es.eigenvectors() * z);
  }
  out.c = c;
  out.residual = A.norm(A.multiply(c, c) - c);
  return out;
}

bool lexicographic_less(const Vec& a, const Vec& b) {
  for (int i = 0; i < a.size() && i < b.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return a.size() < b.size();
}

IdempotentRecord make_record(const AlgebraSpec& A, const Vec& c,
                             double residual, const SearchConfig& cfg) {
  IdempotentRecord rec;
  rec.c = c;
  rec.residual = residual;
  rec.sq_length = A.inner(c, c);
  Eigen::SelfAdjointEigenSolver<Mat> es(A.whitened_mult_matrix(c),
                                        Eigen::EigenvaluesOnly);
  rec.lc_spectrum = es.eigenvalues();
  rec.manifold_dim = 0;
  for (int i = 0; i < rec.lc_spectrum.size(); ++i)
    if (std::abs(2.0 * rec.lc_spectrum[i] - 1.0) <= cfg.classify_tol)
      ++rec.manifold_dim;
  return rec;
}

}  // namespace

const char* to_string(IdempotentKind kind) {
  switch (kind) {
    case IdempotentKind::unit:
      return "unit";
    case IdempotentKind::extremal:
      return "extremal";
    case IdempotentKind::other:
      return "other";
  }
  return "other";
}

double cubic_form(const AlgebraSpec& A, const Vec& x) {
  return A.inner(A.multiply(x, x), x);
}

Vec random_gram_unit(const AlgebraSpec& A, Rng& rng) {
  const int n = A.dim();
  Vec y = rng.normal_vector(n);
  double nn = y.norm();
  while (!(nn > 0.0)) {
    y = rng.normal_vector(n);
    nn = y.norm();
  }
  return A.unwhiten(y / nn);
}

AscentResult sphere_ascent(const AlgebraSpec& A, const Vec& x0,
                           const SearchConfig& cfg) {
  Vec y = A.whiten(x0);
  const double ny = y.norm();
  if (!(ny > 0.0))
    throw std::invalid_argument("sphere_ascent: the start vector is zero");
  y /= ny;

  // Whitened coordinates: the Gram sphere is the Euclidean sphere, the
  // Euclidean gradient of <x x, x> is 3 R (x x), and the cubic form is a
  // third of its product with y.
  auto eval = [&](const Vec& yv, double& f, Vec& g) {
    const Vec x = A.unwhiten(yv);
    g = 3.0 * A.whiten(A.multiply(x, x));
    f = g.dot(yv) / 3.0;
  };

  // Near a maximum the line search drowns in rounding before the gradient
  // reaches ascent_tol; the idempotent Newton step converges from there and
  // lands on the exact stationary point, so try it once the gradient is
  // small and accept when the polished gradient meets the tolerance.
  auto polish = [&](const Vec& yv) -> std::optional<Vec> {
    const Vec x = A.unwhiten(yv);
    const double lam = cubic_form(A, x);
    if (std::abs(lam) <= cfg.nilpotent_tol) return std::nullopt;
    const NewtonOutcome no = newton_idempotent(A, x / lam, cfg);
    if (!no.ok) return std::nullopt;
    Vec wc = A.whiten(no.c);
    const double nc = wc.norm();
    if (nc < kZeroIdempotent) return std::nullopt;
    return wc / nc;
  };

  double fy;
  Vec g;
  eval(y, fy, g);
  double alpha = 1.0;

  auto finish = [&](const Vec& yv, double gn, int iters,
                    bool converged) -> AscentResult {
    return AscentResult{A.unwhiten(yv), gn, iters, converged};
  };
  auto try_polish = [&](const Vec& yv, int iters) -> std::optional<AscentResult> {
    const std::optional<Vec> yp = polish(yv);
    if (!yp) return std::nullopt;
    double fp;
    Vec gp;
    eval(*yp, fp, gp);
    const Vec proj = gp - gp.dot(*yp) * (*yp);
    const double gpn = proj.norm();
    if (gpn <= cfg.ascent_tol) return finish(*yp, gpn, iters, true);
    return std::nullopt;
  };

  int iters = 0;
  for (; iters < cfg.ascent_max_iters; ++iters) {
    const Vec gp = g - g.dot(y) * y;
    const double gn = gp.norm();
    if (gn <= cfg.ascent_tol) return finish(y, gn, iters, true);

    bool tried_polish = false;
    if (gn <= kPolishTrigger) {
      tried_polish = true;
      if (auto done = try_polish(y, iters)) return *done;
    }

    bool accepted = false;
    while (alpha > kMinStep) {
      const Vec yn = (y + alpha * gp).normalized();
      double fn;
      Vec gnext;
      eval(yn, fn, gnext);
      if (fn >= fy + kArmijo * alpha * gn * gn) {
        y = yn;
        fy = fn;
        g = gnext;
        alpha = std::min(alpha * 2.0, kMaxStep);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (!tried_polish)
        if (auto done = try_polish(y, iters)) return *done;
      return finish(y, gn, iters, false);
    }
  }

  const Vec gp = g - g.dot(y) * y;
  const double gn = gp.norm();
  if (gn <= cfg.ascent_tol) return finish(y, gn, iters, true);
  if (auto done = try_polish(y, iters)) return *done;
  return finish(y, gn, iters, false);
}

std::optional<IdempotentRecord> refine_idempotent(const AlgebraSpec& A,
                                                  const Vec& x,
                                                  const SearchConfig& cfg) {
  const double nx = A.norm(x);
  if (!(nx > 0.0)) return std::nullopt;  // the zero stationary point
  // The rescale c = x / <x x, x> assumes |x| = 1, so normalize first;
  // stationarity is scale-invariant.
  const Vec xhat = x / nx;
  const double mu = cubic_form(A, xhat);
  if (std::abs(mu) <= cfg.nilpotent_tol) return std::nullopt;

  const NewtonOutcome no = newton_idempotent(A, xhat / mu, cfg);
  if (!no.ok)
    throw SearchBudgetError(
        "refine_idempotent: Newton failed to reach residual " +
        std::to_string(cfg.newton_tol) + " within " +
        std::to_string(cfg.newton_max_iters) +
        " iterations (final residual " + std::to_string(no.residual) + ")");
  if (A.norm(no.c) < kZeroIdempotent)
    throw SearchBudgetError(
        "refine_idempotent: Newton collapsed onto the zero idempotent");
  return make_record(A, no.c, no.residual, cfg);
}

void classify_records(const AlgebraSpec& A,
                      std::vector<IdempotentRecord>& records,
                      const SearchConfig& cfg) {
  if (records.empty()) return;
  const std::optional<Vec> e = find_unit(A, cfg.unit_tol);
  double min_len = records.front().sq_length;
  for (const IdempotentRecord& r : records)
    min_len = std::min(min_len, r.sq_length);
  for (IdempotentRecord& r : records) {
    if (e && A.norm(r.c - *e) <= cfg.dedup_distance)
      r.kind = IdempotentKind::unit;
    else if (r.sq_length <= min_len + cfg.classify_tol)
      r.kind = IdempotentKind::extremal;
    else
      r.kind = IdempotentKind::other;
  }
}

SearchOutcome enumerate_idempotents(const AlgebraSpec& A,
                                    const SearchConfig& cfg) {
  const int n = A.dim();
  const int count = cfg.resolve_multistart(n);
  SearchOutcome out;
  out.stats.starts = count;

  auto merge = [&](IdempotentRecord&& rec) {
    for (IdempotentRecord& r : out.records)
      if (A.norm(rec.c - r.c) <= cfg.dedup_distance) {
        if (rec.residual < r.residual) r = std::move(rec);
        return;
      }
    out.records.push_back(std::move(rec));
  };

  Rng rng(Rng::substream(cfg.seed, kSaltStarts));
  for (int s = 0; s < count; ++s) {
    const Vec x0 = random_gram_unit(A, rng);
    const AscentResult ar = sphere_ascent(A, x0, cfg);
    if (!ar.converged) ++out.stats.nonconverged;
    try {
      std::optional<IdempotentRecord> rec = refine_idempotent(A, ar.x, cfg);
      if (!rec)
        ++out.stats.nilpotent;
      else
        merge(std::move(*rec));
    } catch (const SearchBudgetError&) {
      ++out.stats.divergent;
    }
  }

  // The unit can be a saddle of the cubic form (e.g. componentwise algebras)
  // and then no ascent basin leads to it; append it explicitly.
  if (const std::optional<Vec> e = find_unit(A, cfg.unit_tol)) {
    try {
      if (std::optional<IdempotentRecord> rec = refine_idempotent(A, *e, cfg))
        merge(std::move(*rec));
    } catch (const SearchBudgetError&) {
      // An ill-conditioned near-unit solve never outranks search results.
    }
  }

  classify_records(A, out.records, cfg);
  std::sort(out.records.begin(), out.records.end(),
            [](const IdempotentRecord& a, const IdempotentRecord& b) {
              if (a.sq_length != b.sq_length) return a.sq_length < b.sq_length;
              return lexicographic_less(a.c, b.c);
            });
  return out;
}

ExtremalReport extremal_set(const AlgebraSpec& A,
                            const std::vector<IdempotentRecord>& records,
                            const SearchConfig& cfg, int samples) {
  ExtremalReport report;
  if (records.empty()) return report;
  report.min_sq_length = records.front().sq_length;
  for (const IdempotentRecord& r : records)
    report.min_sq_length = std::min(report.min_sq_length, r.sq_length);
  for (const IdempotentRecord& r : records)
    if (r.sq_length <= report.min_sq_length + cfg.classify_tol)
      report.records.push_back(r);

  // Sampled extremal inequality <x, x x> <= |x|^3 / |c|: an excess above
  // tolerance means some idempotent shorter than the found minimum exists.
  // max_excess keeps its sign, so a negative value is the observed margin.
  const double bound = 1.0 / std::sqrt(report.min_sq_length);
  Rng rng(Rng::substream(cfg.seed, kSaltExtremal));
  double worst = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const Vec x = random_gram_unit(A, rng);
    const double excess = cubic_form(A, x) - bound;
    worst = std::max(worst, excess);
    if (excess > cfg.classify_tol) ++report.sample_violations;
  }
  if (samples > 0) report.max_excess = worst;
  return report;
}

SpectralReport spectral_check(const AlgebraSpec& A, const IdempotentRecord& rec,
                              const SearchConfig& cfg) {
  const int n = A.dim();
  SpectralReport report;

  const Mat w = A.whitened_mult_matrix(rec.c);
  Eigen::SelfAdjointEigenSolver<Mat> full(w, Eigen::EigenvaluesOnly);
  for (int i = 0; i < n; ++i)
    if (std::abs(full.eigenvalues()[i] - 1.0) <= cfg.classify_tol)
      ++report.unit_eigenvalue_multiplicity;
  report.unit_eigenvalue_simple = report.unit_eigenvalue_multiplicity == 1;

  if (n == 1) {
    report.restricted_spectrum = Vec(0);
    report.max_restricted = 0.0;
    report.extremal_consistent = true;
    return report;
  }

  // Householder complement of the whitened direction: columns 1..n-1 of the
  // reflector sending e_0 to the direction are an orthonormal basis of its
  // orthogonal complement.
  Vec yc = A.whiten(rec.c);
  yc /= yc.norm();
  Vec v = yc;
  v[0] += yc[0] >= 0.0 ? 1.0 : -1.0;
  const Mat h = Mat::Identity(n, n) - (2.0 / v.squaredNorm()) * v * v.transpose();
  const Mat b = h.rightCols(n - 1);

  Eigen::SelfAdjointEigenSolver<Mat> es(
      Mat(b.transpose() * w * b), Eigen::EigenvaluesOnly);
  report.restricted_spectrum = es.eigenvalues();
  report.max_restricted = es.eigenvalues().maxCoeff();
  report.extremal_consistent =
      report.max_restricted <= 0.5 + cfg.classify_tol;
  return report;
}

SubspaceResult subspace_stationary(const AlgebraSpec& A,
                                   const std::vector<Vec>& U_basis,
                                   const SearchConfig& cfg) {
  const int n = A.dim();
  if (U_basis.empty())
    throw std::invalid_argument("subspace_stationary: empty basis");

  // Gram-orthonormal basis of U from a pivoted QR of the whitened vectors.
  Mat wm(n, static_cast<int>(U_basis.size()));
  for (int i = 0; i < wm.cols(); ++i) wm.col(i) = A.whiten(U_basis[i]);
  Eigen::ColPivHouseholderQR<Mat> qr(wm);
  qr.setThreshold(1e-12);
  const int k = static_cast<int>(qr.rank());
  if (k == 0)
    throw std::invalid_argument("subspace_stationary: the basis spans {0}");
  const Mat q = qr.householderQ() * Mat::Identity(n, k);
  Mat b(n, k);
  for (int i = 0; i < k; ++i) b.col(i) = A.unwhiten(q.col(i));

  if (k == 1) {
    // One-dimensional U: the only unit candidates are +-u and the in-U
    // component of u u - lambda u orthogonal to u is identically zero.
    Vec u = b.col(0);
    double lambda = cubic_form(A, u);
    if (lambda < 0.0) {
      u = -u;
      lambda = -lambda;
    }
    return SubspaceResult{u, lambda, 0.0, true};
  }

  const Mat gb = A.gram() * b;  // q(z) = gb^T (Bz)(Bz), the in-U gradient/3

  // The cubic form restricted to U must not vanish identically: its basis
  // values <B_a B_b, B_c> are exactly the coefficients of f on U, and all
  // zero means the hypothesis UU != 0 has no witness inside U.
  double max_t = 0.0;
  std::vector<Vec> bb(static_cast<std::size_t>(k) * k);
  for (int a = 0; a < k; ++a)
    for (int c = a; c < k; ++c) {
      const Vec prod = A.multiply(b.col(a), b.col(c));
      bb[a * k + c] = prod;
      for (int d = 0; d < k; ++d)
        max_t = std::max(max_t, std::abs(prod.dot(gb.col(d))));
    }
  if (max_t <= 1e-12)
    throw std::invalid_argument(
        "subspace_stationary: the cubic form vanishes on U (products of U "
        "are zero or orthogonal to U), so no stationary direction exists");

  auto eval = [&](const Vec& z, double& f, Vec& qv) {
    const Vec u = b * z;
    qv = gb.transpose() * A.multiply(u, u);
    f = qv.dot(z);
  };

  // Bordered Newton polish for the stationarity system q(z) = lambda z on
  // |z| = 1; S = dq/dz is symmetric by the self-adjointness of
  // multiplication.
  auto polish = [&](Vec z, double lambda) -> std::optional<Vec> {
    for (int it = 0; it < cfg.newton_max_iters; ++it) {
      const Vec u = b * z;
      const Vec qv = gb.transpose() * A.multiply(u, u);
      Vec f(k + 1);
      f.head(k) = qv - lambda * z;
      f[k] = 0.5 * (z.squaredNorm() - 1.0);
      if (f.norm() <= cfg.newton_tol) return z;
      const Mat s = 2.0 * gb.transpose() * A.left_mult_matrix(u) * b;
      Mat j = Mat::Zero(k + 1, k + 1);
      j.topLeftCorner(k, k) = 0.5 * (s + s.transpose()) -
                              lambda * Mat::Identity(k, k);
      j.topRightCorner(k, 1) = -z;
      j.bottomLeftCorner(1, k) = z.transpose();
      Eigen::CompleteOrthogonalDecomposition<Mat> cod(j);
      const Vec delta = cod.solve(-f);
      z += delta.head(k);
      lambda += delta[k];
      if (!z.allFinite() || !std::isfinite(lambda)) return std::nullopt;
    }
    return std::nullopt;
  };

  SubspaceResult best;
  best.converged = false;
  double best_f = -std::numeric_limits<double>::infinity();
  bool have = false;

  auto consider = [&](const Vec& z, bool converged) {
    Vec qv;
    double f;
    eval(z, f, qv);
    const Vec r = qv - f * z;
    const Vec p = r - r.dot(z) * z;
    if (!have || (converged && !best.converged) ||
        (converged == best.converged && f > best_f)) {
      have = true;
      best_f = f;
      best.u = b * z;
      best.lambda = f;
      best.defect = p.norm();
      best.converged = converged;
    }
  };

  Rng rng(Rng::substream(cfg.seed, kSaltSubspace));
  const int starts = std::max(8, 2 * k);
  for (int s = 0; s < starts; ++s) {
    Vec z = rng.normal_vector(k);
    double nz = z.norm();
    while (!(nz > 0.0)) {
      z = rng.normal_vector(k);
      nz = z.norm();
    }
    z /= nz;

    double fz;
    Vec qv;
    eval(z, fz, qv);
    double alpha = 1.0;
    bool converged = false;
    for (int it = 0; it < cfg.ascent_max_iters; ++it) {
      const Vec grad = 3.0 * qv;
      const Vec gp = grad - grad.dot(z) * z;
      const double gn = gp.norm();
      if (gn <= cfg.ascent_tol) {
        converged = true;
        break;
      }
      bool tried_polish = false;
      if (gn <= kPolishTrigger) {
        tried_polish = true;
        if (auto zp = polish(z, fz)) {
          double fp;
          Vec qp;
          eval(*zp, fp, qp);
          const Vec gproj = 3.0 * qp - 3.0 * fp * (*zp);
          if (gproj.norm() <= cfg.ascent_tol) {
            z = *zp;
            fz = fp;
            qv = qp;
            converged = true;
            break;
          }
        }
      }
      bool accepted = false;
      while (alpha > kMinStep) {
        const Vec zn = (z + alpha * gp).normalized();
        double fn;
        Vec qn;
        eval(zn, fn, qn);
        if (fn >= fz + kArmijo * alpha * gn * gn) {
          z = zn;
          fz = fn;
          qv = qn;
          alpha = std::min(alpha * 2.0, kMaxStep);
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        if (!tried_polish)
          if (auto zp = polish(z, fz)) {
            double fp;
            Vec qp;
            eval(*zp, fp, qp);
            const Vec gproj = 3.0 * qp - 3.0 * fp * (*zp);
            if (gproj.norm() <= cfg.ascent_tol) {
              z = *zp;
              fz = fp;
              qv = qp;
              converged = true;
            }
          }
        break;
      }
    }
    consider(z, converged);
  }

  return best;
}

NormalizeResult normalize_searched(const AlgebraSpec& A,
                                   const SearchConfig& cfg) {
  return normalize(A, [&cfg](const AlgebraSpec& inner) -> std::optional<double> {
    const SearchOutcome so = enumerate_idempotents(inner, cfg);
    if (so.records.empty()) return std::nullopt;
    double min_len = so.records.front().sq_length;
    for (const IdempotentRecord& r : so.records)
      min_len = std::min(min_len, r.sq_length);
    return min_len;
  });
}

}  // namespace metral
