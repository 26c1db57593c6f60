#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "helpers.hpp"
#include "metral/algebra.hpp"
#include "metral/constructions.hpp"
#include "metral/errors.hpp"
#include "metral/search.hpp"

using namespace metral;
using test_helpers::max_abs_diff;
using test_helpers::rsquare_scaled;
using test_helpers::vec2;
using test_helpers::zero_algebra;

namespace {

const IdempotentRecord* find_record(const std::vector<IdempotentRecord>& recs,
                                    const Vec& c, double tol = 1e-8) {
  for (const auto& r : recs)
    if ((r.c - c).norm() <= tol) return &r;
  return nullptr;
}

}  // namespace

TEST_CASE("cubic_form evaluates <x x, x>") {
  const AlgebraSpec a = rsquare();
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const Vec x = rng.normal_vector(2);
    const double expect = x(0) * x(0) * x(0) + x(1) * x(1) * x(1);
    CHECK(cubic_form(a, x) == doctest::Approx(expect).epsilon(1e-13));
    // Degree three homogeneity.
    CHECK(cubic_form(a, 2.0 * x) ==
          doctest::Approx(8.0 * cubic_form(a, x)).epsilon(1e-13));
  }
}

TEST_CASE("the cubic form differentiates to three times the square") {
  for (const AlgebraSpec& a :
       {rsquare(), spin_factor(test_helpers::random_spd(3, 21))}) {
    Rng rng(5);
    const double eps = 1e-6;
    for (int t = 0; t < 25; ++t) {
      const Vec x = random_gram_unit(a, rng);
      const Vec h = rng.normal_vector(a.dim());
      const double fd =
          (cubic_form(a, x + eps * h) - cubic_form(a, x - eps * h)) /
          (2.0 * eps);
      const double analytic = 3.0 * a.inner(a.multiply(x, x), h);
      CHECK(fd == doctest::Approx(analytic).epsilon(1e-8));
    }
  }
}

TEST_CASE("sphere_ascent converges into the nearest basin") {
  const AlgebraSpec a = rsquare();
  SearchConfig cfg;
  Vec x0 = vec2(0.9, 0.436);
  x0 /= x0.norm();
  const AscentResult res = sphere_ascent(a, x0, cfg);
  CHECK(res.converged);
  CHECK(res.grad_norm <= cfg.ascent_tol);
  CHECK(max_abs_diff(res.x, vec2(1.0, 0.0)) <= 1e-6);
}

TEST_CASE("refine_idempotent lands on the idempotent through a ray") {
  const AlgebraSpec a = rsquare();
  SearchConfig cfg;
  for (const Vec& x : {vec2(2.0, 0.0), vec2(0.6, 0.0)}) {
    const auto rec = refine_idempotent(a, x, cfg);
    REQUIRE(rec.has_value());
    CHECK(max_abs_diff(rec->c, vec2(1.0, 0.0)) <= 1e-12);
    CHECK(rec->residual <= cfg.newton_tol);
    CHECK(rec->sq_length == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("refine_idempotent routes nilpotent directions to nullopt") {
  const AlgebraSpec a = rsquare();
  SearchConfig cfg;
  // (1, -1) squares to (1, 1), orthogonal to itself under the cubic form.
  CHECK_FALSE(refine_idempotent(a, vec2(1.0, -1.0), cfg).has_value());
  CHECK_FALSE(refine_idempotent(a, Vec::Zero(2), cfg).has_value());
}

TEST_CASE("refine_idempotent keeps an exact idempotent fixed") {
  const AlgebraSpec a = sym_jordan(3);
  SearchConfig cfg;
  Vec x = Vec::Zero(6);
  x(0) = 1.0;
  x(1) = 1.0;  // a rank-two projector
  const auto rec = refine_idempotent(a, x, cfg);
  REQUIRE(rec.has_value());
  CHECK(max_abs_diff(rec->c, x) <= 1e-12);
  CHECK(rec->sq_length == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("enumerate_idempotents resolves the componentwise algebra") {
  const AlgebraSpec a = rsquare();
  SearchConfig cfg;
  cfg.seed = 0;
  const SearchOutcome out = enumerate_idempotents(a, cfg);
  REQUIRE(out.records.size() == 3);
  CHECK(out.stats.nonconverged == 0);
  CHECK(out.stats.starts == 100);  // 50 * dim
  // Sorted by squared length with the unit last.
  CHECK(out.records[0].sq_length == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(out.records[1].sq_length == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(out.records[2].sq_length == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(out.records[0].kind == IdempotentKind::extremal);
  CHECK(out.records[1].kind == IdempotentKind::extremal);
  CHECK(out.records[2].kind == IdempotentKind::unit);
  CHECK(find_record(out.records, vec2(1.0, 0.0)) != nullptr);
  CHECK(find_record(out.records, vec2(0.0, 1.0)) != nullptr);
  CHECK(find_record(out.records, vec2(1.0, 1.0)) != nullptr);
  // Isolated idempotents have a trivial tangent space.
  for (const auto& r : out.records) CHECK(r.manifold_dim == 0);
}

TEST_CASE("enumerate_idempotents is deterministic and deduplicated") {
  const AlgebraSpec a = spin_factor(Mat::Identity(2, 2));
  SearchConfig cfg;
  cfg.seed = 42;
  cfg.multistart_count = 60;
  const SearchOutcome o1 = enumerate_idempotents(a, cfg);
  const SearchOutcome o2 = enumerate_idempotents(a, cfg);
  REQUIRE(o1.records.size() == o2.records.size());
  for (std::size_t i = 0; i < o1.records.size(); ++i) {
    // Bitwise reproducibility, not just closeness.
    CHECK((o1.records[i].c.array() == o2.records[i].c.array()).all());
    CHECK(o1.records[i].residual == o2.records[i].residual);
    CHECK(o1.records[i].sq_length == o2.records[i].sq_length);
  }
  for (std::size_t i = 0; i < o1.records.size(); ++i)
    for (std::size_t j = i + 1; j < o1.records.size(); ++j)
      CHECK((o1.records[i].c - o1.records[j].c).norm() > cfg.dedup_distance);
}

TEST_CASE("spin factor extremal records carry the manifold geometry") {
  const AlgebraSpec a = spin_factor(Mat::Identity(2, 2));
  SearchConfig cfg;
  cfg.seed = 7;
  cfg.multistart_count = 40;
  const SearchOutcome out = enumerate_idempotents(a, cfg);
  REQUIRE(!out.records.empty());
  bool saw_extremal = false;
  for (const auto& r : out.records) {
    if (r.kind != IdempotentKind::extremal) continue;
    saw_extremal = true;
    // c = eps/2 + u with f(u, u) = 1/4.
    CHECK(r.c(0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(r.sq_length == doctest::Approx(1.0).epsilon(1e-9));
    REQUIRE(r.lc_spectrum.size() == 3);
    CHECK(r.lc_spectrum(0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.lc_spectrum(1) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(r.lc_spectrum(2) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.manifold_dim == 1);
  }
  CHECK(saw_extremal);
  // The unit is present even though it is a saddle of the cubic form.
  const auto* unit = find_record(out.records, vec2(1.0, 0.0), 1e-6);
  (void)unit;
  Vec e = Vec::Zero(3);
  e(0) = 1.0;
  CHECK(find_record(out.records, e, 1e-6) != nullptr);
}

TEST_CASE("extremal_set separates the minimal records and samples the bound") {
  SUBCASE("componentwise") {
    const AlgebraSpec a = rsquare();
    SearchConfig cfg;
    const SearchOutcome out = enumerate_idempotents(a, cfg);
    const ExtremalReport rep = extremal_set(a, out.records, cfg);
    CHECK(rep.min_sq_length == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(rep.records.size() == 2);
    CHECK(rep.sample_violations == 0);
    CHECK(rep.max_excess < 0.0);
  }
  SUBCASE("symmetric matrices keep only the rank-one projectors") {
    const AlgebraSpec a = sym_jordan(3);
    SearchConfig cfg;
    cfg.multistart_count = 120;
    const SearchOutcome out = enumerate_idempotents(a, cfg);
    const ExtremalReport rep = extremal_set(a, out.records, cfg);
    CHECK(rep.min_sq_length == doctest::Approx(1.0).epsilon(1e-8));
    for (const auto& r : rep.records)
      CHECK(r.sq_length == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(rep.sample_violations == 0);
  }
}

TEST_CASE("spectral_check separates extremal idempotents from the unit") {
  const AlgebraSpec a = spin_factor(Mat::Identity(3, 3));
  SearchConfig cfg;
  cfg.seed = 3;
  cfg.multistart_count = 80;
  const SearchOutcome out = enumerate_idempotents(a, cfg);
  const IdempotentRecord* extremal = nullptr;
  const IdempotentRecord* unit = nullptr;
  for (const auto& r : out.records) {
    if (r.kind == IdempotentKind::extremal && !extremal) extremal = &r;
    if (r.kind == IdempotentKind::unit) unit = &r;
  }
  REQUIRE(extremal != nullptr);
  REQUIRE(unit != nullptr);

  const SpectralReport se = spectral_check(a, *extremal, cfg);
  REQUIRE(se.restricted_spectrum.size() == 3);
  CHECK(se.restricted_spectrum(0) == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(se.restricted_spectrum(1) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(se.restricted_spectrum(2) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(se.max_restricted <= 0.5 + cfg.classify_tol);
  CHECK(se.extremal_consistent);
  CHECK(se.unit_eigenvalue_multiplicity == 1);
  CHECK(se.unit_eigenvalue_simple);

  // Negative control: L_e is the identity, so the restriction stays at 1.
  const SpectralReport su = spectral_check(a, *unit, cfg);
  CHECK(su.max_restricted == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_FALSE(su.extremal_consistent);
  CHECK(su.unit_eigenvalue_multiplicity == a.dim());
  CHECK_FALSE(su.unit_eigenvalue_simple);
}

TEST_CASE("subspace_stationary handles lines, planes, and refusals") {
  const AlgebraSpec a = rsquare();
  SearchConfig cfg;
  SUBCASE("one-dimensional subspace is returned directly") {
    const SubspaceResult res = subspace_stationary(a, {vec2(1.0, -1.0)}, cfg);
    CHECK(res.converged);
    CHECK(res.defect == 0.0);
    CHECK(std::abs(res.u.norm() - 1.0) <= 1e-12);
    CHECK(res.lambda >= 0.0);
  }
  SUBCASE("full space recovers the global maximum") {
    const SubspaceResult res =
        subspace_stationary(a, {vec2(1.0, 0.0), vec2(0.0, 1.0)}, cfg);
    CHECK(res.converged);
    CHECK(res.lambda == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(res.defect <= cfg.ascent_tol);
  }
  SUBCASE("the unit line of a spin factor") {
    const AlgebraSpec s = spin_factor(Mat::Identity(2, 2));
    Vec e = Vec::Zero(3);
    e(0) = 1.0;
    const SubspaceResult res = subspace_stationary(s, {e}, cfg);
    // u = eps / sqrt(2), u u = eps / 2, lambda = <u u, u> = 1 / sqrt(2).
    CHECK(res.lambda == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(res.defect == 0.0);
  }
  SUBCASE("vanishing cubic form is refused") {
    const AlgebraSpec z = zero_algebra(2);
    CHECK_THROWS_AS(
        subspace_stationary(z, {vec2(1.0, 0.0), vec2(0.0, 1.0)}, cfg),
        std::invalid_argument);
  }
  SUBCASE("empty basis is refused") {
    CHECK_THROWS_AS(subspace_stationary(a, {}, cfg), std::invalid_argument);
  }
}

TEST_CASE("normalize_searched rescales to unit extremal length") {
  const AlgebraSpec a = rsquare_scaled(4.0);
  SearchConfig cfg;
  const NormalizeResult res = normalize_searched(a, cfg);
  CHECK(res.k == doctest::Approx(0.25).epsilon(1e-12));
  CHECK((res.algebra.gram() - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <=
        1e-12);
}

TEST_CASE("search results transform covariantly under gram scaling") {
  // Same seed on the algebra and its gram-rescaled copy: the idempotents
  // are identical points, their squared lengths scale by k.
  SearchConfig cfg;
  cfg.seed = 9;
  const SearchOutcome base = enumerate_idempotents(rsquare(), cfg);
  const SearchOutcome scaled = enumerate_idempotents(rsquare_scaled(4.0), cfg);
  REQUIRE(base.records.size() == 3);
  REQUIRE(scaled.records.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(max_abs_diff(base.records[i].c, scaled.records[i].c) <= 1e-9);
    CHECK(scaled.records[i].sq_length ==
          doctest::Approx(4.0 * base.records[i].sq_length).epsilon(1e-9));
  }
}

TEST_CASE("random_gram_unit draws deterministic unit vectors") {
  const AlgebraSpec a = spin_factor(test_helpers::random_spd(3, 2));
  Rng r1(77), r2(77);
  for (int t = 0; t < 10; ++t) {
    const Vec x = random_gram_unit(a, r1);
    const Vec y = random_gram_unit(a, r2);
    CHECK(a.norm(x) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((x.array() == y.array()).all());
  }
}

TEST_CASE("resolve_multistart falls back to fifty per dimension") {
  SearchConfig cfg;
  CHECK(cfg.resolve_multistart(4) == 200);
  cfg.multistart_count = 7;
  CHECK(cfg.resolve_multistart(4) == 7);
}

TEST_CASE("zero algebra search yields no idempotents") {
  SearchConfig cfg;
  cfg.multistart_count = 20;
  const SearchOutcome out = enumerate_idempotents(zero_algebra(2), cfg);
  CHECK(out.records.empty());
  CHECK(out.stats.nilpotent == out.stats.starts);
}
