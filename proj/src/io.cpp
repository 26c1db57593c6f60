#include "metral/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "metral/constructions.hpp"

namespace metral {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;
// Input asymmetry above this is symmetrized with a warning instead of
// silently.
constexpr double kAsymmetryWarning = 1e-9;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

ordered_json vec_to_json(const Vec& v) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ordered_json mat_to_json_flat(const Mat& m) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) a.push_back(m(i, j));
  return a;
}

[[noreturn]] void field_error(const std::string& origin, const char* field,
                              const std::string& what) {
  throw ParseError(origin + ": " + field + ": " + what);
}

long long require_int(const ordered_json& j, const char* field,
                      const std::string& origin) {
  if (!j.contains(field)) field_error(origin, field, "missing");
  if (!j.at(field).is_number_integer())
    field_error(origin, field, "not an integer");
  return j.at(field).get<long long>();
}

std::vector<double> require_doubles(const ordered_json& j, const char* field,
                                    std::size_t want,
                                    const std::string& origin) {
  if (!j.contains(field)) field_error(origin, field, "missing");
  const ordered_json& arr = j.at(field);
  if (!arr.is_array()) field_error(origin, field, "not an array");
  if (arr.size() != want)
    field_error(origin, field,
                "expected " + std::to_string(want) + " entries, got " +
                    std::to_string(arr.size()));
  std::vector<double> out;
  out.reserve(want);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number())
      field_error(origin, field,
                  "entry " + std::to_string(i) + " is not a number");
    out.push_back(arr[i].get<double>());
  }
  return out;
}

}  // namespace

std::string algebra_to_json(const AlgebraSpec& A,
                            const std::map<std::string, std::string>& metadata) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["label"] = A.label();
  j["dim"] = A.dim();
  j["structure"] = A.structure();
  j["gram"] = mat_to_json_flat(A.gram());
  if (!metadata.empty()) j["metadata"] = metadata;
  return j.dump(2) + "\n";
}

LoadResult algebra_from_json(const std::string& text,
                             const std::string& origin) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& ex) {
    throw ParseError(origin + ": " + ex.what());
  }
  if (!j.is_object()) throw ParseError(origin + ": expected a JSON object");

  const long long sv = require_int(j, "schema_version", origin);
  if (sv != kSchemaVersion)
    field_error(origin, "schema_version",
                "unsupported value " + std::to_string(sv) + ", expected " +
                    std::to_string(kSchemaVersion));

  if (!j.contains("label")) field_error(origin, "label", "missing");
  if (!j.at("label").is_string()) field_error(origin, "label", "not a string");
  const std::string label = j.at("label").get<std::string>();

  const long long dim_ll = require_int(j, "dim", origin);
  if (dim_ll < 1 || dim_ll > 10000)
    field_error(origin, "dim",
                "must be a positive integer, got " + std::to_string(dim_ll));
  const int n = static_cast<int>(dim_ll);
  const std::size_t nn = static_cast<std::size_t>(n);

  std::vector<double> structure =
      require_doubles(j, "structure", nn * nn * nn, origin);
  const std::vector<double> gram_flat =
      require_doubles(j, "gram", nn * nn, origin);
  Mat gram(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      gram(i, k) = gram_flat[static_cast<std::size_t>(i) * nn + k];

  if (j.contains("metadata") && !j.at("metadata").is_object())
    field_error(origin, "metadata", "not an object");

  LoadResult res{AlgebraSpec(n, std::move(structure), std::move(gram), label),
                 {}};
  if (res.algebra.input_commutativity_defect() > kAsymmetryWarning)
    res.warnings.push_back(
        origin + ": structure: asymmetric in (i, j) by " +
        format_double(res.algebra.input_commutativity_defect()) +
        "; symmetrized");
  if (res.algebra.input_gram_asymmetry() > kAsymmetryWarning)
    res.warnings.push_back(origin + ": gram: asymmetric by " +
                           format_double(res.algebra.input_gram_asymmetry()) +
                           "; symmetrized");
  return res;
}

void save_algebra(const AlgebraSpec& A, const std::string& path,
                  const std::map<std::string, std::string>& metadata) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << algebra_to_json(A, metadata);
  if (!out) throw ParseError(path + ": write failed");
}

LoadResult load_algebra(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return algebra_from_json(buf.str(), path);
}

const char* to_string(StageStatus status) {
  switch (status) {
    case StageStatus::ok:
      return "ok";
    case StageStatus::failed:
      return "failed";
    case StageStatus::skipped:
      return "skipped";
  }
  return "failed";
}

AnalysisReport run_analysis(const AlgebraSpec& A, const SearchConfig& cfg_in,
                            bool strict) {
  SearchConfig cfg = cfg_in;
  if (strict) {
    cfg.axiom_tol *= 0.5;
    cfg.unit_tol *= 0.5;
    cfg.ascent_tol *= 0.5;
    cfg.newton_tol *= 0.5;
    cfg.classify_tol *= 0.5;
  }

  AnalysisReport rep;
  rep.label = A.label();
  rep.dim = A.dim();
  rep.config = cfg;
  rep.strict = strict;

  using clock = std::chrono::steady_clock;
  auto stage_done = [&rep](const std::string& name, clock::time_point t0,
                           StageStatus st, const std::string& reason) {
    const double ms =
        std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    rep.stages.push_back(StageInfo{name, st, reason, ms});
  };
  auto fail = [&](const std::string& stage, clock::time_point t0,
                  ExitCode code, const std::string& reason) {
    stage_done(stage, t0, StageStatus::failed, reason);
    rep.exit_code = code;
    rep.failure_reason = stage + ": " + reason;
  };

  // validate
  {
    const auto t0 = clock::now();
    rep.validation = validate(A, cfg.axiom_tol);
    if (!rep.validation->passed) {
      std::string why;
      if (rep.validation->commutativity_defect > cfg.axiom_tol)
        why += "commutativity defect " +
               format_double(rep.validation->commutativity_defect) +
               " above tolerance " + format_double(cfg.axiom_tol);
      if (rep.validation->associativity_defect > cfg.axiom_tol) {
        if (!why.empty()) why += "; ";
        why += "cubic tensor asymmetry " +
               format_double(rep.validation->associativity_defect) +
               " above tolerance " + format_double(cfg.axiom_tol);
      }
      if (!(rep.validation->min_gram_eigenvalue > 0.0)) {
        if (!why.empty()) why += "; ";
        why += "gram matrix not positive definite (smallest eigenvalue " +
               format_double(rep.validation->min_gram_eigenvalue) + ")";
      }
      fail("validate", t0, ExitCode::axiom, why);
      return rep;
    }
    stage_done("validate", t0, StageStatus::ok, "");
  }

  // unit
  {
    const auto t0 = clock::now();
    const std::optional<Vec> e = find_unit(A, cfg.unit_tol);
    if (!e) {
      fail("unit", t0, ExitCode::non_unital,
           "non-unital: no unit element within tolerance " +
               format_double(cfg.unit_tol));
      return rep;
    }
    rep.unit = *e;
    rep.unit_residual =
        (A.left_mult_matrix(*e) - Mat::Identity(A.dim(), A.dim())).norm();
    stage_done("unit", t0, StageStatus::ok, "");
  }

  // search
  {
    const auto t0 = clock::now();
    try {
      rep.search = enumerate_idempotents(A, cfg);
    } catch (const Error& ex) {
      fail("search", t0, ex.code(), ex.what());
      return rep;
    }
    if (rep.search->records.empty()) {
      fail("search", t0, ExitCode::search_budget,
           "the multistart search found no idempotents within budget (" +
               std::to_string(rep.search->stats.starts) + " starts)");
      return rep;
    }
    rep.extremal = extremal_set(A, rep.search->records, cfg);
    stage_done("search", t0, StageStatus::ok, "");
  }

  // minimality
  {
    const auto t0 = clock::now();
    try {
      rep.minimality = minimality_test(A, rep.search->records, cfg);
    } catch (const Error& ex) {
      fail("minimality", t0, ex.code(), ex.what());
      return rep;
    }
    stage_done("minimality", t0, StageStatus::ok, "");
  }

  const std::string skip_reason =
      "the algebra is not minimal (gap " +
      format_double(rep.minimality->gap) +
      "), so the minimal-algebra structure theory does not apply";

  // classification
  {
    const auto t0 = clock::now();
    if (!rep.minimality->is_minimal) {
      stage_done("classification", t0, StageStatus::skipped, skip_reason);
    } else {
      rep.classification = classify_idempotents_minimal(
          A, rep.search->records, *rep.minimality, cfg);
      stage_done("classification", t0, StageStatus::ok, "");
    }
  }

  // identities and isomorphism share one normalized copy.
  std::optional<AlgebraSpec> a_norm;
  std::vector<IdempotentRecord> records_norm;
  std::optional<MinimalityReport> min_norm;

  {
    const auto t0 = clock::now();
    if (!rep.minimality->is_minimal) {
      stage_done("identities", t0, StageStatus::skipped, skip_reason);
    } else {
      try {
        const double min_len = rep.minimality->extremal_sq_length;
        NormalizeResult nr = normalize(
            A, [min_len](const AlgebraSpec&) -> std::optional<double> {
              return min_len;
            });
        rep.normalize_k = nr.k;
        records_norm = rescale_records(nr.algebra, rep.search->records, nr.k);
        a_norm.emplace(std::move(nr.algebra));
        min_norm = minimality_test(*a_norm, records_norm, cfg);
        rep.identities =
            identity_residual_table(*a_norm, records_norm, *min_norm, cfg);
        stage_done("identities", t0, StageStatus::ok, "");
      } catch (const Error& ex) {
        fail("identities", t0, ex.code(), ex.what());
        return rep;
      }
    }
  }

  {
    const auto t0 = clock::now();
    if (!rep.minimality->is_minimal) {
      stage_done("isomorphism", t0, StageStatus::skipped, skip_reason);
    } else {
      try {
        IsomorphismReport iso =
            build_isomorphism_normalized(*a_norm, records_norm, *min_norm, cfg);
        iso.normalize_k = rep.normalize_k;
        rep.isomorphism = std::move(iso);
        stage_done("isomorphism", t0, StageStatus::ok, "");
      } catch (const Error& ex) {
        fail("isomorphism", t0, ex.code(), ex.what());
        return rep;
      }
    }
  }

  return rep;
}

AnalysisReport run_analysis_file(const std::string& path,
                                 const SearchConfig& cfg, bool strict) {
  LoadResult lr = load_algebra(path);
  AnalysisReport rep = run_analysis(lr.algebra, cfg, strict);
  rep.warnings.insert(rep.warnings.begin(), lr.warnings.begin(),
                      lr.warnings.end());
  return rep;
}

namespace {

ordered_json record_to_json(const IdempotentRecord& rec) {
  ordered_json j;
  j["coords"] = vec_to_json(rec.c);
  j["residual"] = rec.residual;
  j["sq_length"] = rec.sq_length;
  j["kind"] = to_string(rec.kind);
  j["lc_spectrum"] = vec_to_json(rec.lc_spectrum);
  j["manifold_dim"] = rec.manifold_dim;
  return j;
}

ordered_json config_to_json(const SearchConfig& cfg) {
  ordered_json j;
  j["multistart_count"] = cfg.multistart_count;
  j["seed"] = cfg.seed;
  j["ascent_max_iters"] = cfg.ascent_max_iters;
  j["newton_max_iters"] = cfg.newton_max_iters;
  j["ascent_tol"] = cfg.ascent_tol;
  j["newton_tol"] = cfg.newton_tol;
  j["dedup_distance"] = cfg.dedup_distance;
  j["classify_tol"] = cfg.classify_tol;
  j["nilpotent_tol"] = cfg.nilpotent_tol;
  j["unit_tol"] = cfg.unit_tol;
  j["axiom_tol"] = cfg.axiom_tol;
  return j;
}

ordered_json check_to_json(const CheckEntry& e) {
  ordered_json j;
  j["value"] = e.value;
  j["threshold"] = e.threshold;
  j["pass"] = e.pass;
  return j;
}

}  // namespace

std::string render_machine(const AnalysisReport& rep) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "analysis_report";
  j["label"] = rep.label;
  j["dim"] = rep.dim;
  j["strict"] = rep.strict;
  j["config"] = config_to_json(rep.config);

  ordered_json stages = ordered_json::array();
  for (const StageInfo& s : rep.stages) {
    ordered_json sj;
    sj["name"] = s.name;
    sj["status"] = to_string(s.status);
    if (!s.reason.empty()) sj["reason"] = s.reason;
    stages.push_back(sj);
  }
  j["stages"] = stages;
  if (!rep.warnings.empty()) j["warnings"] = rep.warnings;

  if (rep.validation) {
    ordered_json v;
    v["commutativity_defect"] = rep.validation->commutativity_defect;
    v["associativity_defect"] = rep.validation->associativity_defect;
    v["min_gram_eigenvalue"] = rep.validation->min_gram_eigenvalue;
    v["passed"] = rep.validation->passed;
    j["validation"] = v;
  }
  if (rep.unit) {
    ordered_json u;
    u["coords"] = vec_to_json(*rep.unit);
    u["residual"] = rep.unit_residual;
    j["unit"] = u;
  }
  if (rep.search) {
    ordered_json s;
    s["starts"] = rep.search->stats.starts;
    s["nilpotent"] = rep.search->stats.nilpotent;
    s["divergent"] = rep.search->stats.divergent;
    s["nonconverged"] = rep.search->stats.nonconverged;
    ordered_json recs = ordered_json::array();
    for (const IdempotentRecord& r : rep.search->records)
      recs.push_back(record_to_json(r));
    s["records"] = recs;
    j["search"] = s;
  }
  if (rep.extremal) {
    ordered_json e;
    e["min_sq_length"] = rep.extremal->min_sq_length;
    e["count"] = static_cast<int>(rep.extremal->records.size());
    e["sample_violations"] = rep.extremal->sample_violations;
    e["max_excess"] = rep.extremal->max_excess;
    j["extremal"] = e;
  }
  if (rep.minimality) {
    ordered_json m;
    m["unit_sq_length"] = rep.minimality->unit_sq_length;
    m["has_nontrivial"] = rep.minimality->has_nontrivial;
    m["extremal_sq_length"] = rep.minimality->extremal_sq_length;
    m["gap"] = rep.minimality->gap;
    m["is_minimal"] = rep.minimality->is_minimal;
    m["conj_residual_max"] = rep.minimality->conj_residual_max;
    m["orth_residual_max"] = rep.minimality->orth_residual_max;
    m["caveat"] = rep.minimality->caveat;
    j["minimality"] = m;
  }
  if (rep.classification) {
    ordered_json c;
    c["expected_sq_length"] = rep.classification->expected_sq_length;
    c["violators"] = rep.classification->violators;
    c["pass"] = rep.classification->pass;
    j["classification"] = c;
  }
  if (rep.identities || rep.isomorphism) j["normalize_k"] = rep.normalize_k;
  if (rep.identities) {
    ordered_json t;
    for (const auto& [key, entry] : *rep.identities)
      t[key] = check_to_json(entry);
    j["identities"] = t;
  }
  if (rep.isomorphism) {
    ordered_json iso;
    iso["verdict"] = rep.isomorphism->verdict;
    iso["max_hom_defect"] = rep.isomorphism->max_hom_defect;
    iso["max_square_defect"] = rep.isomorphism->max_square_defect;
    iso["max_square1_defect"] = rep.isomorphism->max_square1_defect;
    iso["basis_idempotent_count"] =
        static_cast<int>(rep.isomorphism->basis_idempotents.size());
    iso["model_dim"] = rep.isomorphism->model.ambient_dim;
    iso["phi"] = mat_to_json_flat(rep.isomorphism->phi);
    j["isomorphism"] = iso;
  }

  j["exit_code"] = static_cast<int>(rep.exit_code);
  if (!rep.failure_reason.empty()) j["failure_reason"] = rep.failure_reason;
  return j.dump(2) + "\n";
}

namespace {

std::string vec_to_text(const Vec& v) {
  std::string s = "[";
  for (int i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_double(v[i]);
  }
  return s + "]";
}

std::string check_line(const std::string& name, const CheckEntry& e) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "  %-10s value %-12.6g threshold %-8.3g %s\n",
                name.c_str(), e.value, e.threshold, e.pass ? "pass" : "FAIL");
  return buf;
}

}  // namespace

std::string render_human(const AnalysisReport& rep) {
  std::ostringstream out;
  out << "analysis of " << rep.label << " (dim " << rep.dim << ")\n";
  out << "seed " << rep.config.seed << ", multistarts "
      << rep.config.resolve_multistart(rep.dim) << ", strict "
      << (rep.strict ? "on" : "off") << "\n";
  for (const std::string& w : rep.warnings) out << "warning: " << w << "\n";
  out << "\n";

  for (const StageInfo& s : rep.stages) {
    char head[160];
    std::snprintf(head, sizeof(head), "[%s] %s (%.2f ms)", s.name.c_str(),
                  to_string(s.status), s.wall_ms);
    out << head << "\n";
    if (!s.reason.empty()) out << "  reason: " << s.reason << "\n";

    if (s.name == "validate" && rep.validation) {
      for (const std::string& d : rep.validation->details)
        out << "  " << d << "\n";
    } else if (s.name == "unit" && rep.unit) {
      out << "  unit coords " << vec_to_text(*rep.unit) << ", residual "
          << format_double(rep.unit_residual) << " (tolerance "
          << format_double(rep.config.unit_tol) << ")\n";
    } else if (s.name == "search" && rep.search) {
      out << "  starts " << rep.search->stats.starts << ", distinct records "
          << rep.search->records.size() << ", nilpotent hits "
          << rep.search->stats.nilpotent << ", divergent "
          << rep.search->stats.divergent << ", nonconverged "
          << rep.search->stats.nonconverged << "\n";
      for (std::size_t i = 0; i < rep.search->records.size(); ++i) {
        const IdempotentRecord& r = rep.search->records[i];
        out << "  record " << i << ": kind " << to_string(r.kind)
            << ", sq_length " << format_double(r.sq_length) << ", residual "
            << format_double(r.residual) << ", manifold_dim "
            << r.manifold_dim << "\n";
        if (r.kind == IdempotentKind::extremal)
          out << "    L_c spectrum " << vec_to_text(r.lc_spectrum) << "\n";
      }
      if (rep.extremal)
        out << "  extremal: min sq_length "
            << format_double(rep.extremal->min_sq_length) << ", "
            << rep.extremal->records.size() << " record(s), sample violations "
            << rep.extremal->sample_violations << ", max excess "
            << format_double(rep.extremal->max_excess) << "\n";
    } else if (s.name == "minimality" && rep.minimality) {
      out << "  |e|^2 " << format_double(rep.minimality->unit_sq_length)
          << ", extremal sq_length "
          << format_double(rep.minimality->extremal_sq_length) << ", gap "
          << format_double(rep.minimality->gap) << " (tolerance "
          << format_double(rep.config.classify_tol) << ") -> "
          << (rep.minimality->is_minimal ? "minimal" : "not minimal") << "\n";
      out << "  conjugation residual max "
          << format_double(rep.minimality->conj_residual_max)
          << ", orthogonality residual max "
          << format_double(rep.minimality->orth_residual_max) << "\n";
      out << "  caveat: " << rep.minimality->caveat << "\n";
    } else if (s.name == "classification" && rep.classification) {
      out << "  expected sq_length "
          << format_double(rep.classification->expected_sq_length)
          << ", violators " << rep.classification->violators.size() << " -> "
          << (rep.classification->pass ? "pass" : "FAIL") << "\n";
    } else if (s.name == "identities" && rep.identities) {
      out << "  normalize scale k " << format_double(rep.normalize_k) << "\n";
      for (const auto& [key, entry] : *rep.identities)
        out << check_line(key, entry);
    } else if (s.name == "isomorphism" && rep.isomorphism) {
      out << "  verdict " << (rep.isomorphism->verdict ? "true" : "false")
          << ", hom defect max "
          << format_double(rep.isomorphism->max_hom_defect)
          << ", square defect max "
          << format_double(rep.isomorphism->max_square_defect)
          << ", square1 defect max "
          << format_double(rep.isomorphism->max_square1_defect) << "\n";
      out << "  model: spin factor of dimension "
          << rep.isomorphism->model.ambient_dim << " with f = I/2 on "
          << rep.isomorphism->model.f.rows() << " coordinates\n";
    }
  }

  out << "\nexit code " << static_cast<int>(rep.exit_code);
  if (!rep.failure_reason.empty()) out << " (" << rep.failure_reason << ")";
  out << "\n";
  return out.str();
}

void make_fixture(const std::string& kind,
                  const std::map<std::string, std::string>& params,
                  const std::string& out_path) {
  auto get = [&](const char* key) -> const std::string& {
    auto it = params.find(key);
    if (it == params.end())
      throw ParseError("fixture " + kind + ": missing parameter '" + key +
                       "'");
    return it->second;
  };
  auto get_int = [&](const char* key) -> int {
    const std::string& raw = get(key);
    try {
      std::size_t pos = 0;
      const int v = std::stoi(raw, &pos);
      if (pos != raw.size()) throw std::invalid_argument(raw);
      return v;
    } catch (const std::exception&) {
      throw ParseError("fixture " + kind + ": parameter '" + key +
                       "' is not an integer: '" + raw + "'");
    }
  };

  try {
    if (kind == "spin-factor") {
      const int m = get_int("dim");
      if (m < 1 || m > 64)
        throw ParseError("fixture spin-factor: dim must be in 1..64, got " +
                         std::to_string(m));
      save_algebra(spin_factor(Mat::Identity(m, m)), out_path);
    } else if (kind == "sym-jordan") {
      const int n = get_int("n");
      if (n < 1 || n > 12)
        throw ParseError("fixture sym-jordan: n must be in 1..12, got " +
                         std::to_string(n));
      save_algebra(sym_jordan(n), out_path);
    } else if (kind == "direct-sum") {
      const LoadResult left = load_algebra(get("left"));
      const LoadResult right = load_algebra(get("right"));
      save_algebra(direct_sum(left.algebra, right.algebra), out_path);
    } else if (kind == "rsquare") {
      save_algebra(rsquare(), out_path);
    } else {
      throw ParseError("fixture: unknown kind '" + kind +
                       "' (expected spin-factor, sym-jordan, direct-sum, or "
                       "rsquare)");
    }
  } catch (const std::invalid_argument& ex) {
    throw ParseError("fixture " + kind + ": " + ex.what());
  }
}

}  // namespace metral
