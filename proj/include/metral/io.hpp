#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "metral/analysis.hpp"

namespace metral {

/// An AlgebraSpec parsed from disk plus any non-fatal warnings (asymmetry
/// above the warning threshold is symmetrized, reported, and not treated as
/// failure).
struct LoadResult {
  AlgebraSpec algebra;
  std::vector<std::string> warnings;
};

/// Algebra file format: a JSON object with schema_version, label, dim,
/// structure (flat row-major, dim^3 entries), gram (flat row-major, dim^2
/// entries), and an optional string metadata map. Numbers are serialized
/// losslessly, so load(save(A)) reproduces A bit-exactly.
std::string algebra_to_json(
    const AlgebraSpec& A,
    const std::map<std::string, std::string>& metadata = {});
LoadResult algebra_from_json(const std::string& text,
                             const std::string& origin);

void save_algebra(const AlgebraSpec& A, const std::string& path,
                  const std::map<std::string, std::string>& metadata = {});
LoadResult load_algebra(const std::string& path);

enum class StageStatus { ok, failed, skipped };

const char* to_string(StageStatus status);

struct StageInfo {
  std::string name;
  StageStatus status = StageStatus::ok;
  std::string reason;   // failure or skip reason
  double wall_ms = 0.0; // human report only; machine reports stay byte-stable
};

/// Full pipeline output. Stages appear in execution order; a hard failure
/// (invalid axioms, no unit, empty search) stops the pipeline and the
/// report stays partial. Optional sections are absent for stages that never
/// ran.
struct AnalysisReport {
  std::string label;
  int dim = 0;
  SearchConfig config;
  bool strict = false;
  std::vector<StageInfo> stages;
  std::vector<std::string> warnings;

  std::optional<ValidationReport> validation;
  std::optional<Vec> unit;
  double unit_residual = 0.0;
  std::optional<SearchOutcome> search;
  std::optional<ExtremalReport> extremal;
  std::optional<MinimalityReport> minimality;
  std::optional<ClassificationReport> classification;
  double normalize_k = 1.0;
  std::optional<IdentityTable> identities;
  std::optional<IsomorphismReport> isomorphism;

  ExitCode exit_code = ExitCode::ok;
  std::string failure_reason;
};

/// validate -> unit -> search -> minimality -> classification -> identities
/// -> isomorphism. Deterministic given the seed. The identity and
/// isomorphism stages run on the normalized copy and reuse the single
/// search; on a non-minimal algebra they are skipped with a reason rather
/// than failed.
AnalysisReport run_analysis(const AlgebraSpec& A, const SearchConfig& cfg,
                            bool strict = false);
AnalysisReport run_analysis_file(const std::string& path,
                                 const SearchConfig& cfg, bool strict = false);

/// Machine-readable JSON: stable key order, lossless numbers, no timings or
/// other run-varying data, so equal input and seed give byte-identical text.
std::string render_machine(const AnalysisReport& report);

/// Human-readable text: per-stage wall-clock, every checked quantity with
/// its threshold, and the L_c spectrum of each extremal idempotent.
std::string render_human(const AnalysisReport& report);

/// Writes a fixture algebra file. kind is one of spin-factor (params: dim =
/// m, the form dimension), sym-jordan (params: n), direct-sum (params: left,
/// right = paths of summand files), rsquare. Bad kinds or parameters throw
/// ParseError.
void make_fixture(const std::string& kind,
                  const std::map<std::string, std::string>& params,
                  const std::string& out_path);

}  // namespace metral
