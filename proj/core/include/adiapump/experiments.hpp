#pragma once

#include <string>
#include <vector>

namespace adiapump {

/// One experiment description: kind, model reference, per-kind parameter
/// block, output directory, tolerance overrides. Schema-validated with
/// unknown-key rejection; the pipeline is deterministic end to end.
struct RunConfig {
  std::string kind;          // smatrix | bpt | evolve | sweep-eps | sweep-ammeter | lab | compare
  std::string model_path;    // empty if model inlined
  std::string model_json;    // canonical model text (inline or loaded)
  std::string params_json;   // kind-specific block (canonical dump)
  std::string tolerances_json = "{}";
  std::string out_dir = "out";
  double budget_seconds = 900.0;

  static RunConfig from_json_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text, const std::string& base_dir = "");
  std::string canonical_text() const;
  std::string config_hash() const;
};

struct RunOutcome {
  int exit_code = 0;                  // nonzero iff any verdict failed or error
  std::vector<std::string> artifacts; // paths written
  std::string summary;                // one-line human summary
};

/// Executes the experiment, writing CSV/JSON artifacts into out_dir. Every
/// data file is stamped with the config hash and tool version; wall-clock
/// timings go only to run_meta.json (the one non-reproducible file).
RunOutcome run(const RunConfig& config);

/// Compares a bpt summary against a dynamics (evolve/sweep) summary, checking
/// model hashes and occupation match; throws MismatchedRunsError otherwise.
RunOutcome compare_outputs(const std::string& bpt_summary_path,
                           const std::string& dynamics_summary_path,
                           const std::string& out_dir, double rel_tol);

/// Worker cap: ADIAPUMP_THREADS, default hardware concurrency, at least 1.
int worker_cap();

}  // namespace adiapump
