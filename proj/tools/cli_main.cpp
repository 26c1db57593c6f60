#include "cli_main.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "metral/io.hpp"

namespace metral {

namespace {

class StageTimer {
 public:
  StageTimer() : t0_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw ParseError(out_path + ": cannot open for writing");
  f << text;
  if (!f) throw ParseError(out_path + ": write failed");
}

std::string render(const AnalysisReport& rep, const std::string& format) {
  return format == "machine" ? render_machine(rep) : render_human(rep);
}

AnalysisReport base_report(const AlgebraSpec& A, const SearchConfig& cfg,
                           bool strict,
                           const std::vector<std::string>& warnings) {
  AnalysisReport rep;
  rep.label = A.label();
  rep.dim = A.dim();
  rep.config = cfg;
  rep.strict = strict;
  rep.warnings = warnings;
  return rep;
}

/// Runs validate as a stage; returns true when the axioms hold.
bool stage_validate(const AlgebraSpec& A, const SearchConfig& cfg,
                    AnalysisReport& rep) {
  StageTimer t;
  rep.validation = validate(A, cfg.axiom_tol);
  const bool ok = rep.validation->passed;
  std::string reason;
  if (!ok) {
    reason = "axiom check failed: commutativity defect " +
             std::to_string(rep.validation->commutativity_defect) +
             ", cubic tensor asymmetry " +
             std::to_string(rep.validation->associativity_defect) +
             ", smallest gram eigenvalue " +
             std::to_string(rep.validation->min_gram_eigenvalue);
    rep.exit_code = ExitCode::axiom;
    rep.failure_reason = "validate: " + reason;
  }
  rep.stages.push_back(StageInfo{
      "validate", ok ? StageStatus::ok : StageStatus::failed, reason, t.ms()});
  return ok;
}

/// Runs the idempotent search as a stage; returns true when records exist.
bool stage_search(const AlgebraSpec& A, const SearchConfig& cfg,
                  AnalysisReport& rep) {
  StageTimer t;
  rep.search = enumerate_idempotents(A, cfg);
  if (rep.search->records.empty()) {
    const std::string reason =
        "the multistart search found no idempotents within budget (" +
        std::to_string(rep.search->stats.starts) + " starts)";
    rep.exit_code = ExitCode::search_budget;
    rep.failure_reason = "search: " + reason;
    rep.stages.push_back(
        StageInfo{"search", StageStatus::failed, reason, t.ms()});
    return false;
  }
  rep.extremal = extremal_set(A, rep.search->records, cfg);
  rep.stages.push_back(StageInfo{"search", StageStatus::ok, "", t.ms()});
  return true;
}

SearchConfig apply_strict(SearchConfig cfg, bool strict) {
  if (strict) {
    cfg.axiom_tol *= 0.5;
    cfg.unit_tol *= 0.5;
    cfg.ascent_tol *= 0.5;
    cfg.newton_tol *= 0.5;
    cfg.classify_tol *= 0.5;
  }
  return cfg;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{
      "Commutative metrised algebra toolkit: axiom validation, variational "
      "idempotent search, minimality tests, and the spin-factor "
      "identification of minimal algebras",
      "metral"};
  app.require_subcommand(1);
  app.fallthrough();

  SearchConfig cfg;
  bool strict = false;
  std::string format = "human";
  std::string out_path;
  std::optional<double> tol;

  app.add_option("--seed", cfg.seed, "Random seed for every sampler");
  app.add_option("--multistart", cfg.multistart_count,
                 "Number of search starts (0 = 50 per dimension)");
  app.add_option("--tol", tol,
                 "Classification and unit-detection tolerance override");
  app.add_flag("--strict", strict,
               "Halve the acceptance tolerances (regression hunting)");
  app.add_option("--out", out_path, "Write the report to a file");
  app.add_option("--format", format, "Report format")
      ->check(CLI::IsMember({"human", "machine"}));

  std::string file;
  CLI::App* cmd_validate =
      app.add_subcommand("validate", "Check the algebra axioms of a file");
  cmd_validate->add_option("file", file, "Algebra file")->required();
  CLI::App* cmd_analyze =
      app.add_subcommand("analyze", "Run the full analysis pipeline");
  cmd_analyze->add_option("file", file, "Algebra file")->required();
  CLI::App* cmd_idem = app.add_subcommand(
      "idempotents", "Enumerate idempotents by multistart ascent");
  cmd_idem->add_option("file", file, "Algebra file")->required();
  CLI::App* cmd_min =
      app.add_subcommand("minimality", "Decide minimality from the found set");
  cmd_min->add_option("file", file, "Algebra file")->required();
  CLI::App* cmd_iso = app.add_subcommand(
      "isomorphism", "Build and verify the spin-factor isomorphism");
  cmd_iso->add_option("file", file, "Algebra file")->required();

  CLI::App* cmd_fix =
      app.add_subcommand("fixture", "Write a construction to an algebra file");
  std::string kind;
  int fix_dim = 0, fix_n = 0;
  std::string fix_left, fix_right;
  cmd_fix
      ->add_option("kind", kind,
                   "spin-factor | sym-jordan | direct-sum | rsquare")
      ->required();
  CLI::Option* opt_dim =
      cmd_fix->add_option("--dim", fix_dim, "Form dimension (spin-factor)");
  CLI::Option* opt_n =
      cmd_fix->add_option("--n", fix_n, "Matrix size (sym-jordan)");
  CLI::Option* opt_left =
      cmd_fix->add_option("--left", fix_left, "Left summand file (direct-sum)");
  CLI::Option* opt_right = cmd_fix->add_option("--right", fix_right,
                                               "Right summand file (direct-sum)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::parse);
  }

  if (tol) {
    cfg.classify_tol = *tol;
    cfg.unit_tol = *tol;
  }
  const SearchConfig eff = apply_strict(cfg, strict);

  try {
    if (cmd_fix->parsed()) {
      if (out_path.empty())
        throw ParseError("fixture: --out <path> is required");
      std::map<std::string, std::string> params;
      if (opt_dim->count()) params["dim"] = std::to_string(fix_dim);
      if (opt_n->count()) params["n"] = std::to_string(fix_n);
      if (opt_left->count()) params["left"] = fix_left;
      if (opt_right->count()) params["right"] = fix_right;
      make_fixture(kind, params, out_path);
      if (format == "machine") {
        nlohmann::ordered_json j;
        j["schema_version"] = 1;
        j["kind"] = "fixture";
        j["written"] = out_path;
        std::cout << j.dump(2) << "\n";
      } else {
        std::cout << "wrote " << out_path << "\n";
      }
      return 0;
    }

    if (cmd_analyze->parsed()) {
      const AnalysisReport rep = run_analysis_file(file, cfg, strict);
      emit(render(rep, format), out_path);
      return static_cast<int>(rep.exit_code);
    }

    const LoadResult lr = load_algebra(file);
    AnalysisReport rep = base_report(lr.algebra, eff, strict, lr.warnings);

    if (cmd_validate->parsed()) {
      stage_validate(lr.algebra, eff, rep);
      emit(render(rep, format), out_path);
      return static_cast<int>(rep.exit_code);
    }

    if (cmd_idem->parsed()) {
      if (!stage_validate(lr.algebra, eff, rep) ||
          !stage_search(lr.algebra, eff, rep)) {
        emit(render(rep, format), out_path);
        return static_cast<int>(rep.exit_code);
      }
      emit(render(rep, format), out_path);
      return 0;
    }

    if (cmd_min->parsed()) {
      if (!stage_validate(lr.algebra, eff, rep) ||
          !stage_search(lr.algebra, eff, rep)) {
        emit(render(rep, format), out_path);
        return static_cast<int>(rep.exit_code);
      }
      StageTimer t;
      rep.minimality =
          minimality_test(lr.algebra, rep.search->records, eff);
      rep.stages.push_back(
          StageInfo{"minimality", StageStatus::ok, "", t.ms()});
      emit(render(rep, format), out_path);
      return 0;
    }

    if (cmd_iso->parsed()) {
      if (!stage_validate(lr.algebra, eff, rep)) {
        emit(render(rep, format), out_path);
        return static_cast<int>(rep.exit_code);
      }
      StageTimer t;
      rep.isomorphism = build_isomorphism(lr.algebra, eff);
      rep.normalize_k = rep.isomorphism->normalize_k;
      rep.stages.push_back(
          StageInfo{"isomorphism", StageStatus::ok, "", t.ms()});
      emit(render(rep, format), out_path);
      return 0;
    }
  } catch (const Error& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return static_cast<int>(ex.code());
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return static_cast<int>(ExitCode::failure);
  }

  return static_cast<int>(ExitCode::parse);
}

}  // namespace metral
