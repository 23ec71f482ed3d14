// qnls3: batch driver for the three-wave NLS simulator.
//
//   qnls3 validate <config>
//   qnls3 simulate <config> [--out DIR]
//   qnls3 profile-ode <config> [--out DIR]
//   qnls3 identities <config> [--out DIR]
//   qnls3 report <run-dir>
//
// Exit status: 0 all checks pass, 1 a check failed or the run aborted,
// 2 configuration or input error. QNLS_THREADS sets the OpenMP thread count.

#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "qnls/commands.hpp"
#include "qnls/config.hpp"
#include "qnls/errors.hpp"

namespace {

int print_outcome(const qnls::CommandOutcome& out) {
  for (const auto& c : out.summary.value("checks", nlohmann::json::array())) {
    std::cout << (c.value("pass", false) ? "PASS " : "FAIL ") << c.value("name", "") << "  value="
              << c["value"].dump() << " threshold=" << c["threshold"].dump() << "\n";
  }
  std::cout << "results in " << out.run_dir.string() << "\n";
  return out.exit_code;
}

int run_experiment(const std::string& path, qnls::Experiment kind, const std::string& out_dir) {
  nlohmann::json patched = qnls::parse_config(path).source;
  if (patched.contains("experiment") &&
      patched["experiment"].get<std::string>() != qnls::to_string(kind)) {
    throw qnls::ConfigError("experiment: config declares '" +
                            patched["experiment"].get<std::string>() + "' but the command is '" +
                            qnls::to_string(kind) + "'");
  }
  patched["experiment"] = qnls::to_string(kind);
  if (!out_dir.empty()) patched["output"] = {{"dir", out_dir}};
  return print_outcome(qnls::run_command(qnls::parse_config_json(patched)));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-wave quadratic NLS simulator and property checks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string run_dir;

  auto* validate = app.add_subcommand("validate", "Parse and validate a config file");
  validate->add_option("config", config_path, "Run configuration (JSON)")->required();

  auto add_run = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "Run configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides output.dir)");
    return sub;
  };
  auto* simulate = add_run("simulate", "Evolve the PDE and record diagnostics");
  auto* profile = add_run("profile-ode", "Integrate the reduced profile system in log time");
  auto* identities = add_run("identities", "Run the algebraic and operator identity checks");

  auto* report = app.add_subcommand("report", "Write report.md from a run directory");
  report->add_option("run-dir", run_dir, "Directory holding summary.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : qnls::kExitConfigError;
  }

  const int threads = qnls::configure_threads_from_env();
  try {
    if (*validate) {
      const qnls::RunConfig cfg = qnls::parse_config(config_path);
      std::cout << "valid " << qnls::to_string(cfg.experiment) << " config; strict="
                << (cfg.params.strict() ? "true" : "false") << " n=" << cfg.n
                << " L=" << cfg.box_length << " dt=" << cfg.dt << " t_final=" << cfg.t_final
                << " threads=" << threads << "\n";
      return qnls::kExitPass;
    }
    if (*simulate) return run_experiment(config_path, qnls::Experiment::simulate, out_dir);
    if (*profile) return run_experiment(config_path, qnls::Experiment::profile_ode, out_dir);
    if (*identities) return run_experiment(config_path, qnls::Experiment::identities, out_dir);
    if (*report) {
      std::cout << "wrote " << qnls::write_report(run_dir).string() << "\n";
      return qnls::kExitPass;
    }
  } catch (const qnls::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return qnls::kExitConfigError;
  } catch (const qnls::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return qnls::kExitConfigError;
  } catch (const qnls::MissingArtifacts& e) {
    std::cerr << "missing artifacts: " << e.what() << "\n";
    return qnls::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return qnls::kExitCheckFailure;
  }
  return qnls::kExitPass;
}
