#pragma once

// Command dispatch for the CLI: each experiment writes its series, a JSON
// summary with pass/fail checks, and a Markdown report into a run directory.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qnls/config.hpp"
#include "qnls/identities.hpp"
#include "qnls/profile.hpp"

namespace qnls {

enum ExitCode : int { kExitPass = 0, kExitCheckFailure = 1, kExitConfigError = 2 };

struct CommandOutcome {
  int exit_code = kExitPass;
  std::filesystem::path run_dir;
  nlohmann::json summary;
};

/// Applies QNLS_THREADS to the OpenMP runtime when built with OpenMP.
/// Returns the thread count in effect (1 without OpenMP).
int configure_threads_from_env();

/// Runs the configured experiment, writing into `cfg.output_dir`.
CommandOutcome run_command(const RunConfig& cfg);

struct ProfileRun {
  std::vector<ProfileState> trajectory;  // the representative start, from tau = 0
  std::vector<ProfileState> window;      // its part with tau >= tau0
  ProfileDecayReport report;
  std::vector<ProfileDecayReport> panel;
  double nu_drift_from_start = 0.0;  // max |nu(tau)/nu(0) - 1| over the full trajectory
  double max_nu_increase = 0.0;      // largest relative rise of nu between recorded states
  std::vector<CheckResult> checks;
};

/// The starting triple of a profile run: explicit alpha0, the peak of
/// |alpha| in a checkpoint, or -i (m1, m2, m3) scaled to nu_A = nu0.
ComplexTriple profile_start(const RunConfig& cfg);

ProfileRun run_profile(const RunConfig& cfg);

/// Checks applied to a finished simulation.
std::vector<CheckResult> simulation_checks(const RunConfig& cfg, const SimulationResult& result);

/// Markdown rendering of a summary document.
std::string render_report(const nlohmann::json& summary);

/// Reads <run_dir>/summary.json and writes <run_dir>/report.md.
/// Throws MissingArtifacts when the summary is absent or empty.
std::filesystem::path write_report(const std::filesystem::path& run_dir);

}  // namespace qnls
