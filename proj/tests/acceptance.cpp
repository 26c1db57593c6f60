// Acceptance harness: one function per acceptance criterion, one PASS/FAIL
// line per criterion, nonzero exit when any criterion fails. Each check
// names its location so a failure is directly actionable.

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "metral/algebra.hpp"
#include "metral/analysis.hpp"
#include "metral/constructions.hpp"
#include "metral/errors.hpp"
#include "metral/io.hpp"
#include "metral/rng.hpp"
#include "metral/search.hpp"

using namespace metral;

namespace {

struct Failure {
  std::string detail;
};

#define REQUIRE(cond, msg)                                             \
  do {                                                                 \
    if (!(cond)) {                                                     \
      std::ostringstream oss_;                                         \
      oss_ << __FILE__ << ":" << __LINE__ << ": " << msg;              \
      throw Failure{oss_.str()};                                       \
    }                                                                  \
  } while (0)

Mat random_spd(int m, std::uint64_t seed) {
  Rng rng(seed);
  Mat a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = rng.normal();
  return Mat::Identity(m, m) + (0.5 / m) * (a * a.transpose());
}

SearchConfig config_with_seed(std::uint64_t seed) {
  SearchConfig cfg;
  cfg.seed = seed;
  return cfg;
}

// ---------------------------------------------------------------------------
// Criterion 1: spin-factor suite, m = 1..9.
void criterion_spin_suite() {
  for (int m = 1; m <= 9; ++m) {
    const AlgebraSpec a = spin_factor(Mat::Identity(m, m));
    const int n = m + 1;

    const ValidationReport v = validate(a);
    REQUIRE(v.passed, "spin m=" << m << " failed validation");
    REQUIRE(v.commutativity_defect <= 1e-12,
            "spin m=" << m << " commutativity defect "
                      << v.commutativity_defect);
    REQUIRE(v.associativity_defect <= 1e-12,
            "spin m=" << m << " associativity defect "
                      << v.associativity_defect);

    const Vec e = Vec::Unit(n, 0);
    REQUIRE(std::abs(a.inner(e, e) - 2.0) <= 1e-12,
            "spin m=" << m << " |eps|^2 = " << a.inner(e, e));

    const SearchConfig cfg = config_with_seed(2026);
    const SearchOutcome out = enumerate_idempotents(a, cfg);
    REQUIRE(!out.records.empty(), "spin m=" << m << " found no idempotents");
    for (const IdempotentRecord& rec : out.records) {
      if (rec.kind == IdempotentKind::unit) continue;
      REQUIRE(std::abs(rec.sq_length - 1.0) <= 1e-8,
              "spin m=" << m << " nontrivial idempotent squared length "
                        << rec.sq_length);
    }

    const MinimalityReport min = minimality_test(a, out.records, cfg);
    REQUIRE(min.is_minimal && std::abs(min.gap) <= 1e-8,
            "spin m=" << m << " minimality gap " << min.gap);

    for (const IdempotentRecord& rec : out.records) {
      if (rec.kind != IdempotentKind::extremal) continue;
      const SpectralReport sp = spectral_check(a, rec, cfg);
      REQUIRE(sp.restricted_spectrum.size() == m,
              "spin m=" << m << " restricted spectrum has "
                        << sp.restricted_spectrum.size() << " entries");
      REQUIRE(std::abs(sp.restricted_spectrum(0)) <= 1e-8,
              "spin m=" << m << " lowest restricted eigenvalue "
                        << sp.restricted_spectrum(0));
      for (int i = 1; i < m; ++i)
        REQUIRE(std::abs(sp.restricted_spectrum(i) - 0.5) <= 1e-8,
                "spin m=" << m << " restricted eigenvalue "
                          << sp.restricted_spectrum(i));
      REQUIRE(rec.manifold_dim == m - 1,
              "spin m=" << m << " manifold_dim " << rec.manifold_dim);
    }

    const IsomorphismReport iso = build_isomorphism(a, cfg);
    REQUIRE(iso.verdict, "spin m=" << m << " isomorphism verdict false");
    REQUIRE(iso.max_hom_defect <= 1e-10,
            "spin m=" << m << " hom defect " << iso.max_hom_defect);
    const Mat round_trip = iso.phi.fullPivLu().solve(iso.phi);
    REQUIRE((round_trip - Mat::Identity(n, n)).norm() <= 1e-10,
            "spin m=" << m << " phi round trip defect "
                      << (round_trip - Mat::Identity(n, n)).norm());
  }
}

// ---------------------------------------------------------------------------
// Criterion 2: componentwise R (+) R against the exhaustive oracle.
void criterion_rsquare_oracle() {
  const AlgebraSpec a = rsquare();

  // Brute force: componentwise t^2 = t. A sweep confirms the only real
  // roots sit at 0 and 1, then the four candidate vectors are verified by
  // direct substitution.
  for (double t = -2.0; t <= 2.0; t += 1e-3) {
    if (std::abs(t * t - t) < 1e-6)
      REQUIRE(std::abs(t) < 2.1e-3 || std::abs(t - 1.0) < 2.1e-3,
              "unexpected scalar idempotent near " << t);
  }
  std::vector<Vec> oracle;
  for (double x : {0.0, 1.0})
    for (double y : {0.0, 1.0}) {
      Vec c(2);
      c << x, y;
      REQUIRE((a.multiply(c, c) - c).norm() == 0.0,
              "oracle point (" << x << ", " << y << ") is not idempotent");
      oracle.push_back(c);
    }
  REQUIRE(oracle.size() == 4, "oracle must have exactly four points");

  SearchConfig cfg = config_with_seed(2026);
  cfg.multistart_count = 50;
  const SearchOutcome out = enumerate_idempotents(a, cfg);
  REQUIRE(out.records.size() == 3,
          "expected 3 nonzero idempotents, found " << out.records.size());
  for (const Vec& c : oracle) {
    if (c.norm() == 0.0) continue;  // the search excludes the zero solution
    double best = 1e300;
    for (const IdempotentRecord& rec : out.records)
      best = std::min(best, (rec.c - c).norm());
    REQUIRE(best <= 1e-10, "oracle point missed by " << best);
  }
}

// ---------------------------------------------------------------------------
// Criterion 3: symmetric-matrix suite, n = 2, 3, 4.
void criterion_sym_suite() {
  for (int n = 2; n <= 4; ++n) {
    const AlgebraSpec a = sym_jordan(n);
    const SearchConfig cfg = config_with_seed(2026);
    const SearchOutcome out = enumerate_idempotents(a, cfg);
    REQUIRE(!out.records.empty(), "sym n=" << n << " found no idempotents");
    for (const IdempotentRecord& rec : out.records) {
      const double nearest = std::round(rec.sq_length);
      REQUIRE(std::abs(rec.sq_length - nearest) <= 1e-6,
              "sym n=" << n << " squared length " << rec.sq_length
                       << " is not near an integer");
    }
    const MinimalityReport min = minimality_test(a, out.records, cfg);
    REQUIRE(min.is_minimal == (n == 2),
            "sym n=" << n << " minimality verdict " << min.is_minimal);
    if (n == 2) {
      const IsomorphismReport iso = build_isomorphism(a, cfg);
      REQUIRE(iso.verdict, "sym n=2 isomorphism verdict false");
      REQUIRE(iso.max_hom_defect <= 1e-8,
              "sym n=2 hom defect " << iso.max_hom_defect);
      REQUIRE(iso.model.ambient_dim == 3,
              "sym n=2 mapped to dimension " << iso.model.ambient_dim);
    }
  }
}

// ---------------------------------------------------------------------------
// Criterion 4: the extremal inequality on seeded unit samples.
void criterion_extremal_inequality() {
  std::vector<AlgebraSpec> fixtures;
  for (int m = 1; m <= 9; ++m)
    fixtures.push_back(spin_factor(Mat::Identity(m, m)));
  fixtures.push_back(rsquare());

  for (const AlgebraSpec& a : fixtures) {
    Rng rng(Rng::substream(2026, 40));
    for (int t = 0; t < 1000; ++t) {
      const Vec x = random_gram_unit(a, rng);
      const double f = cubic_form(a, x);
      REQUIRE(f <= 1.0 + 1e-9,
              a.label() << " sample cubic form " << f << " exceeds the bound");
    }
    const SearchConfig cfg = config_with_seed(2026);
    const SearchOutcome out = enumerate_idempotents(a, cfg);
    bool saw_extremal = false;
    for (const IdempotentRecord& rec : out.records) {
      if (rec.kind != IdempotentKind::extremal) continue;
      saw_extremal = true;
      const double f = cubic_form(a, rec.c / a.norm(rec.c));
      REQUIRE(std::abs(f - 1.0) <= 1e-8,
              a.label() << " extremal attains " << f << " instead of 1");
    }
    REQUIRE(saw_extremal, a.label() << " produced no extremal idempotent");
  }
}

// ---------------------------------------------------------------------------
// Criterion 5: identity residual table on normalized minimal fixtures.
void criterion_identity_table() {
  const std::vector<AlgebraSpec> fixtures = {
      rsquare(), spin_factor(Mat::Identity(2, 2)),
      spin_factor(Mat::Identity(5, 5)), spin_factor(random_spd(4, 303))};
  const std::vector<std::pair<std::string, double>> required = {
      {"prod1", 1e-8}, {"quadr0", 1e-8}, {"explicitm", 1e-8},
      {"jordan", 1e-10}, {"barc", 1e-9}, {"orthc", 1e-9},
      {"ec", 1e-9},    {"ec1", 1e-9}};

  for (const AlgebraSpec& a : fixtures) {
    const SearchConfig cfg = config_with_seed(2026);
    const SearchOutcome out = enumerate_idempotents(a, cfg);
    const MinimalityReport min = minimality_test(a, out.records, cfg);
    REQUIRE(min.is_minimal, a.label() << " unexpectedly not minimal");
    const IdentityTable table =
        identity_residual_table(a, out.records, min, cfg);
    for (const auto& [key, threshold] : required) {
      const auto it = table.find(key);
      REQUIRE(it != table.end(), a.label() << " table lacks " << key);
      REQUIRE(it->second.threshold == threshold,
              a.label() << " " << key << " runs at threshold "
                        << it->second.threshold);
      REQUIRE(it->second.pass, a.label() << " " << key << " residual "
                                         << it->second.value);
    }
    for (const auto& [key, entry] : table)
      REQUIRE(entry.pass,
              a.label() << " " << key << " residual " << entry.value);
  }
}

// ---------------------------------------------------------------------------
// Criterion 6: stationary points in random orthogonal decompositions.
void criterion_subspace_stationary() {
  const AlgebraSpec fixtures[] = {spin_factor(Mat::Identity(3, 3)),
                                  spin_factor(random_spd(4, 77))};
  const SearchConfig cfg = config_with_seed(2026);
  for (int t = 0; t < 20; ++t) {
    const AlgebraSpec& a = fixtures[t % 2];
    const int n = a.dim();
    Rng rng(Rng::substream(909, static_cast<std::uint64_t>(t)));
    const int k = 1 + t % (n - 1);
    std::vector<Vec> basis;
    for (int j = 0; j < k; ++j) basis.push_back(rng.normal_vector(n));

    const SubspaceResult res = subspace_stationary(a, basis, cfg);
    REQUIRE(res.converged, "decomposition " << t << " did not converge");

    // Recompute the in-U defect independently of the reported one.
    const Mat complement = orthonormal_complement(a, basis);
    std::vector<Vec> comp_cols;
    for (int j = 0; j < complement.cols(); ++j)
      comp_cols.push_back(complement.col(j));
    const Mat u_frame = orthonormal_complement(a, comp_cols);
    REQUIRE(u_frame.cols() == k,
            "decomposition " << t << " basis rank " << u_frame.cols());
    const Vec r = a.multiply(res.u, res.u) - res.lambda * res.u;
    const double defect = (u_frame.transpose() * a.gram() * r).norm();
    REQUIRE(defect <= 1e-8,
            "decomposition " << t << " in-subspace defect " << defect);
  }
}

// ---------------------------------------------------------------------------
// Criterion 7: gradient of the cubic form against finite differences.
void criterion_gradient_oracle() {
  const std::vector<AlgebraSpec> fixtures = {
      rsquare(), spin_factor(Mat::Identity(3, 3)),
      spin_factor(random_spd(4, 55)), sym_jordan(3)};
  const double eps = 1e-6;
  for (const AlgebraSpec& a : fixtures) {
    Rng rng(Rng::substream(2026, 70));
    for (int t = 0; t < 100; ++t) {
      const Vec x = random_gram_unit(a, rng);
      const Vec h = rng.normal_vector(a.dim());
      const double fd =
          (cubic_form(a, x + eps * h) - cubic_form(a, x - eps * h)) /
          (2.0 * eps);
      const double analytic = 3.0 * a.inner(a.multiply(x, x), h);
      REQUIRE(std::abs(fd - analytic) <=
                  1e-6 * std::max(1.0, std::abs(analytic)),
              a.label() << " gradient mismatch: fd " << fd << " vs "
                        << analytic);
    }
  }
}

// ---------------------------------------------------------------------------
// Criterion 8: negative controls.
void criterion_negative_controls() {
  // A randomly perturbed Gram matrix breaks form associativity.
  {
    const AlgebraSpec a = sym_jordan(3);
    Rng rng(404);
    Mat p(a.dim(), a.dim());
    for (int i = 0; i < a.dim(); ++i)
      for (int j = 0; j < a.dim(); ++j) p(i, j) = rng.normal();
    const Mat gram =
        a.gram() + 0.05 * (p + p.transpose());
    const AlgebraSpec perturbed(a.dim(), a.structure(), gram, "perturbed");
    const ValidationReport v = validate(perturbed);
    REQUIRE(!v.passed, "perturbed gram still validates");
    REQUIRE(v.associativity_defect > 1e-3,
            "perturbed gram associativity defect only "
                << v.associativity_defect);
  }

  // A generic metrised algebra is far from Jordan.
  {
    Rng rng(405);
    std::vector<double> c(64, 0.0);
    auto at = [&c](int i, int j, int k) -> double& {
      return c[static_cast<std::size_t>((i * 4 + j)) * 4 + k];
    };
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j)
        for (int k = j; k < 4; ++k) {
          const double v = rng.normal();
          at(i, j, k) = v;
          at(i, k, j) = v;
          at(j, i, k) = v;
          at(j, k, i) = v;
          at(k, i, j) = v;
          at(k, j, i) = v;
        }
    const AlgebraSpec generic(4, std::move(c), Mat::Identity(4, 4),
                              "generic");
    REQUIRE(validate(generic).passed, "generic algebra failed validation");
    double worst = 0.0;
    for (int t = 0; t < 10; ++t)
      worst = std::max(worst, jordan_check(generic, rng.normal_vector(4)));
    REQUIRE(worst > 1e-3, "generic Jordan commutator only " << worst);
  }

  // The isomorphism refuses a non-minimal algebra.
  {
    bool refused = false;
    try {
      build_isomorphism(sym_jordan(3), config_with_seed(2026));
    } catch (const MinimalityError&) {
      refused = true;
    }
    REQUIRE(refused, "sym n=3 isomorphism was not refused");
  }

  // The spectral check reports non-extremal behavior on the unit.
  {
    const AlgebraSpec a = spin_factor(Mat::Identity(3, 3));
    const SearchConfig cfg = config_with_seed(2026);
    const SearchOutcome out = enumerate_idempotents(a, cfg);
    const IdempotentRecord* unit = nullptr;
    for (const IdempotentRecord& rec : out.records)
      if (rec.kind == IdempotentKind::unit) unit = &rec;
    REQUIRE(unit != nullptr, "unit record missing");
    const SpectralReport sp = spectral_check(a, *unit, cfg);
    REQUIRE(!sp.extremal_consistent,
            "unit spectral check claims extremal consistency");
    REQUIRE(!sp.unit_eigenvalue_simple,
            "unit spectral check claims a simple top eigenvalue");
  }
}

// ---------------------------------------------------------------------------
// Criterion 9: byte-identical machine reports at a fixed seed.
void criterion_determinism() {
  for (const AlgebraSpec& a :
       {spin_factor(Mat::Identity(3, 3)), sym_jordan(3)}) {
    SearchConfig cfg = config_with_seed(7);
    cfg.multistart_count = 120;
    const std::string r1 = render_machine(run_analysis(a, cfg));
    const std::string r2 = render_machine(run_analysis(a, cfg));
    REQUIRE(!r1.empty(), a.label() << " produced an empty report");
    REQUIRE(r1 == r2, a.label() << " reports differ between runs");
  }
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* title;
    std::function<void()> body;
  };
  const std::vector<Criterion> criteria = {
      {1, "spin-factor suite (m = 1..9)", criterion_spin_suite},
      {2, "componentwise algebra vs exhaustive oracle",
       criterion_rsquare_oracle},
      {3, "symmetric-matrix suite (n = 2..4)", criterion_sym_suite},
      {4, "extremal inequality sampling", criterion_extremal_inequality},
      {5, "identity residual table on minimal fixtures",
       criterion_identity_table},
      {6, "stationary points of orthogonal decompositions",
       criterion_subspace_stationary},
      {7, "gradient oracle via finite differences",
       criterion_gradient_oracle},
      {8, "negative controls", criterion_negative_controls},
      {9, "byte-identical machine reports", criterion_determinism},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    try {
      c.body();
      std::printf("[PASS] criterion %d: %s\n", c.number, c.title);
    } catch (const Failure& f) {
      ++failures;
      std::printf("[FAIL] criterion %d: %s -- %s\n", c.number, c.title,
                  f.detail.c_str());
    } catch (const std::exception& e) {
      ++failures;
      std::printf("[FAIL] criterion %d: %s -- unexpected exception: %s\n",
                  c.number, c.title, e.what());
    }
    std::fflush(stdout);
  }
  if (failures > 0) {
    std::printf("acceptance: %d of %zu criteria failed\n", failures,
                criteria.size());
    return 1;
  }
  std::printf("acceptance: all %zu criteria passed\n", criteria.size());
  return 0;
}
