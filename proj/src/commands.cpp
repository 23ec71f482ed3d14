#include "qnls/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "qnls/errors.hpp"
#include "qnls/io.hpp"
#include "qnls/spectral.hpp"

#ifdef QNLS_HAVE_OPENMP
#include <omp.h>
#endif

namespace qnls {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kLyapunovTol = 1e-12;
constexpr double kNuConservationTol = 1e-8;
constexpr double kClosedFormTol = 1e-8;

// NaN and infinities are not representable in JSON; they become null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json fit_json(const FitReport& f) {
  return json{{"a", f.a},
              {"b", f.b},
              {"c", f.c},
              {"rms_residual", f.residual},
              {"rms_residual_t^-1", f.residual_plain},
              {"rms_residual_(t log t)^-1", f.residual_log},
              {"samples", f.samples},
              {"favored", f.favored}};
}

json report_json(const ProfileDecayReport& r) {
  return json{{"tau0", r.tau0},
              {"tau1", r.tau1},
              {"max_tau_nu", r.max_tau_nu},
              {"min_tau_nu_late", r.min_tau_nu_late},
              {"min_tau2_phi", r.min_tau2_phi},
              {"final_tau_nu", r.final_tau_nu},
              {"bracket", {num(r.bracket_lower), num(r.bracket_upper)}},
              {"nu_drift_rel", r.nu_drift_rel},
              {"growth_ratio", r.growth_ratio},
              {"enhanced_decay", r.enhanced_decay}};
}

bool all_pass(const std::vector<CheckResult>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

json checks_json(const std::vector<CheckResult>& checks) {
  json out = json::array();
  for (const auto& c : checks) {
    json j = to_json(c);
    j["value"] = num(c.value);
    out.push_back(std::move(j));
  }
  return out;
}

ComplexTriple scaled_to(const ComplexTriple& z, double target, const SystemParams& p) {
  const double nu = nu_A(z, p);
  if (nu == 0.0) throw ConfigError("profile: starting triple has nu_A = 0");
  return cplx(target / nu) * z;
}

std::vector<ProfileState> window_of(const std::vector<ProfileState>& traj, double tau0) {
  std::vector<ProfileState> out;
  for (const auto& s : traj) {
    if (s.tau >= tau0 - 1e-9) out.push_back(s);
  }
  return out;
}

bool all_conservative(const SystemParams& p) {
  return std::all_of(p.lambda().begin(), p.lambda().end(),
                     [](cplx l) { return l.imag() == 0.0; });
}

std::string checkpoint_name(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "ckpt_t%011.5f.bin", t);
  return buf;
}

json simulate_experiment(const RunConfig& cfg, const fs::path& dir, int& exit_code) {
  const SimulationSetup setup = simulation_setup(cfg);
  const CheckpointSink sink = [&](const FieldState& st) {
    const bool final = std::abs(st.t - cfg.t_final) <= 0.5 * cfg.dt;
    write_checkpoint(final ? dir / "final.ckpt" : dir / "checkpoints" / checkpoint_name(st.t), st,
                     cfg.params);
  };
  json summary{{"experiment", "simulate"}};
  SimulationResult result{{}, FieldState::zeros(setup.grid), std::nullopt, 0.0, 0};
  try {
    result = simulate(setup, sink);
  } catch (const DomainEscape& e) {
    summary["error"] = e.what();
    summary["domain_escape_time"] = e.time();
    summary["checks"] = checks_json({CheckResult{"domain", "solution stays inside the periodic box",
                                                 e.time(), cfg.t_final, false, json::object()}});
    exit_code = kExitCheckFailure;
    return summary;
  }
  write_atomic(dir / "diagnostics.csv", diagnostics_csv(result.series));

  const std::vector<CheckResult> checks = simulation_checks(cfg, result);
  summary["checks"] = checks_json(checks);

  const auto& rows = result.series.rows;
  json metrics{{"steps", result.steps},
               {"t_final", cfg.t_final},
               {"final_sup_u", rows.back().sup_u},
               {"final_sup_u_t", rows.back().sup_u_t},
               {"final_ledger_drift_rel", rows.back().ledger_drift_rel},
               {"max_outer_mass_fraction", result.max_outer_mass_fraction},
               {"fidelity_window_end", result.fidelity_window_end
                                           ? json(*result.fidelity_window_end)
                                           : json(nullptr)}};
  double max_drift = 0.0;
  for (const auto& r : rows) max_drift = std::max(max_drift, r.ledger_drift_rel);
  metrics["max_ledger_drift_rel"] = max_drift;

  // (1+t) sup|u| against sup nu_A(alpha), the linkage of the two decay scales.
  double link_lo = std::numeric_limits<double>::infinity();
  double link_hi = 0.0;
  for (const auto& r : rows) {
    if (r.t < 5.0 || !(r.phi > 0.0)) continue;
    const double ratio = r.sup_u_t / std::sqrt(r.phi);
    link_lo = std::min(link_lo, ratio);
    link_hi = std::max(link_hi, ratio);
  }
  if (link_hi > 0.0) metrics["linkage_ratio_range"] = {link_lo, link_hi};

  const double t0 = std::max(2.0, cfg.t_final / 4.0);
  try {
    metrics["fit"] = fit_json(fit_decay_rate(result.series, {t0, cfg.t_final}));
    metrics["fit"]["window"] = {t0, cfg.t_final};
  } catch (const InsufficientSamples& e) {
    metrics["fit"] = json{{"skipped", e.what()}};
  }
  summary["metrics"] = metrics;
  exit_code = all_pass(checks) ? kExitPass : kExitCheckFailure;
  return summary;
}

json profile_experiment(const RunConfig& cfg, const fs::path& dir, int& exit_code) {
  const ProfileRun run = run_profile(cfg);
  write_atomic(dir / "profile.csv", profile_csv(run.trajectory, cfg.params));
  json panel = json::array();
  for (const auto& r : run.panel) panel.push_back(report_json(r));
  const ComplexTriple& a0 = run.trajectory.front().alpha;
  json summary{{"experiment", "profile-ode"},
               {"alpha0", {complex_to_json(a0[0]), complex_to_json(a0[1]), complex_to_json(a0[2])}},
               {"checks", checks_json(run.checks)},
               {"metrics",
                {{"representative", report_json(run.report)},
                 {"panel", panel},
                 {"nu_drift_from_start", run.nu_drift_from_start},
                 {"max_nu_increase", run.max_nu_increase}}}};
  exit_code = all_pass(run.checks) ? kExitPass : kExitCheckFailure;
  return summary;
}

json identities_experiment(const RunConfig& cfg, int& exit_code) {
  const std::vector<CheckResult> checks = run_identities(cfg.identities, cfg.params, cfg.seed);
  exit_code = all_pass(checks) ? kExitPass : kExitCheckFailure;
  return json{{"experiment", "identities"}, {"checks", checks_json(checks)}};
}

}  // namespace

int configure_threads_from_env() {
#ifdef QNLS_HAVE_OPENMP
  if (const char* env = std::getenv("QNLS_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
  return omp_get_max_threads();
#else
  return 1;
#endif
}

ComplexTriple profile_start(const RunConfig& cfg) {
  const SystemParams& p = cfg.params;
  const ProfileSpec& ps = cfg.profile;
  if (ps.alpha0) return ComplexTriple(*ps.alpha0);
  if (!ps.alpha0_from.empty()) {
    const Checkpoint ck = read_checkpoint(ps.alpha0_from);
    if (ck.params_hash != params_hash(p)) {
      throw ConfigError("profile.alpha0_from: checkpoint was written with different coefficients");
    }
    if (!(ck.state.t >= 1.0)) throw ConfigError("profile.alpha0_from: checkpoint time must be >= 1");
    const Components alpha = compute_alpha(ck.state, p, kDiagnosticLossTol);
    const std::vector<double> nu = nu_A_grid(alpha, p);
    const auto idx = static_cast<std::size_t>(std::max_element(nu.begin(), nu.end()) - nu.begin());
    return ComplexTriple(alpha[0][idx], alpha[1][idx], alpha[2][idx]);
  }
  const cplx mi{0.0, -1.0};
  return scaled_to(ComplexTriple(mi * p.m()[0], mi * p.m()[1], mi * p.m()[2]), ps.nu0, p);
}

ProfileRun run_profile(const RunConfig& cfg) {
  const SystemParams& p = cfg.params;
  const ProfileSpec& ps = cfg.profile;
  ProfileRun run;
  const ProfileState start{profile_start(cfg), 0.0};
  run.trajectory = integrate_profile(start, ps.tau1, ps.dtau, p, ps.record_every);
  run.window = window_of(run.trajectory, ps.tau0);
  run.report = profile_decay_metrics(run.window, p);

  const double nu0 = nu_A(start.alpha, p);
  double prev = nu0;
  for (const auto& s : run.trajectory) {
    const double nu = nu_A(s.alpha, p);
    if (nu0 > 0.0) run.nu_drift_from_start = std::max(run.nu_drift_from_start, std::abs(nu / nu0 - 1.0));
    if (prev > 0.0) run.max_nu_increase = std::max(run.max_nu_increase, nu / prev - 1.0);
    prev = nu;
  }

  std::mt19937_64 rng(cfg.seed);
  for (int k = 0; k < ps.panel; ++k) {
    const ProfileState s{scaled_to(random_triple(rng), ps.nu0, p), 0.0};
    const auto traj = integrate_profile(s, ps.tau1, ps.dtau, p, ps.record_every);
    run.panel.push_back(profile_decay_metrics(window_of(traj, ps.tau0), p));
  }

  run.checks.push_back(CheckResult{"lyapunov", "nu_A(alpha) is non-increasing along the profile flow",
                                   run.max_nu_increase, kLyapunovTol,
                                   run.max_nu_increase <= kLyapunovTol, json::object()});

  if (p.strict()) {
    const DissipationConstants c = dissipation_constants(p);
    double hi = run.report.max_tau_nu;
    double lo = run.report.min_tau_nu_late;
    double lo2 = run.report.min_tau2_phi;
    for (const auto& r : run.panel) {
      hi = std::max(hi, r.max_tau_nu);
      lo = std::min(lo, r.min_tau_nu_late);
      lo2 = std::min(lo2, r.min_tau2_phi);
    }
    const double upper = 2.0 / c.c_star_lower;
    const double lower = 0.5 / c.c_star_upper;
    const double floor2 = 0.8 / (c.c_star_upper * c.c_star_upper);
    const json window{{"tau0", ps.tau0}, {"tau1", ps.tau1}, {"trajectories", 1 + ps.panel}};
    run.checks.push_back(CheckResult{"enhanced_decay_upper",
                                     "tau nu_A(alpha) stays bounded: nu_A decays like 1/log t",
                                     hi, upper, hi <= upper, window});
    run.checks.push_back(CheckResult{"enhanced_decay_lower",
                                     "tau nu_A(alpha) stays above 1/(2 C^*) on the late window", lo,
                                     lower, lo >= lower, window});
    run.checks.push_back(CheckResult{"lower_bound",
                                     "tau^2 Phi stays above 0.8 / C^*^2: no decay faster than 1/log t",
                                     lo2, floor2, lo2 >= floor2, window});
  } else if (all_conservative(p)) {
    run.checks.push_back(CheckResult{"nu_conserved",
                                     "with Im lambda = 0, nu_A(alpha) is conserved (no log gain)",
                                     run.nu_drift_from_start, kNuConservationTol,
                                     run.nu_drift_from_start <= kNuConservationTol,
                                     json{{"enhanced_decay", run.report.enhanced_decay}}});
  }

  if (p.decoupled()) {
    double worst = 0.0;
    const ProfileState& last = run.trajectory.back();
    bool any = false;
    for (int j = 0; j < 3; ++j) {
      if (!(p.lambda()[j].imag() < 0.0)) continue;
      any = true;
      const cplx exact = decoupled_closed_form(start.alpha[j], p.lambda()[j], last.tau);
      worst = std::max(worst, std::abs(last.alpha[j] - exact));
    }
    if (any) {
      run.checks.push_back(CheckResult{"closed_form",
                                       "decoupled components follow the exact single-equation profile",
                                       worst, kClosedFormTol, worst <= kClosedFormTol,
                                       json{{"tau", last.tau}}});
    }
  }
  return run;
}

std::vector<CheckResult> simulation_checks(const RunConfig& cfg, const SimulationResult& result) {
  const SimulationChecks& sc = cfg.checks;
  const auto& rows = result.series.rows;
  std::vector<CheckResult> checks;

  double drift = 0.0;
  for (const auto& r : rows) drift = std::max(drift, r.ledger_drift_rel);
  checks.push_back(CheckResult{"ledger", "the weighted mass plus accumulated dissipation is conserved",
                               drift, sc.ledger_drift, drift <= sc.ledger_drift, json::object()});

  if (cfg.t_final > sc.decay_window_start) {
    const double excess =
        monotone_excess(result.series.times(), result.series.column(&DiagnosticRecord::sup_u_t),
                        sc.decay_window_start, cfg.t_final);
    checks.push_back(CheckResult{"decay", "(1+t) sup|u| is non-increasing: sup|u| = O(1/t)", excess,
                                 sc.decay_fluctuation, excess <= sc.decay_fluctuation,
                                 json{{"window", {sc.decay_window_start, cfg.t_final}}}});
  }

  const double w0 = sc.residual_window[0];
  const double w1 = std::min(sc.residual_window[1], cfg.t_final);
  if (w1 >= 2.0 * w0 && cfg.initial.epsilon > 0.0) {
    const double ratio = residual_band_ratio(result.series, w0, w1, cfg.params.gamma());
    checks.push_back(CheckResult{"residual", "t^{1+gamma/3} ||r(t)||_inf stays in a bounded band",
                                 ratio, sc.residual_band, ratio <= sc.residual_band,
                                 json{{"window", {w0, w1}}}});
  }
  return checks;
}

std::string render_report(const json& summary) {
  if (!summary.is_object() || summary.empty()) throw MissingArtifacts("summary is empty");
  std::ostringstream os;
  os << "# Run report: " << summary.value("experiment", std::string("unknown")) << "\n\n";
  if (summary.contains("error")) os << "Run aborted: " << summary["error"].get<std::string>() << "\n\n";
  if (summary.contains("checks") && !summary["checks"].empty()) {
    os << "| check | claim | value | threshold | result |\n";
    os << "|---|---|---|---|---|\n";
    for (const auto& c : summary["checks"]) {
      os << "| " << c.value("name", "") << " | " << c.value("claim", "") << " | "
         << c["value"].dump() << " | " << c["threshold"].dump() << " | "
         << (c.value("pass", false) ? "pass" : "FAIL") << " |\n";
    }
    os << "\n";
  }
  if (summary.contains("metrics")) {
    const json& m = summary["metrics"];
    if (m.contains("representative")) {
      const json& r = m["representative"];
      os << "Empirical limit of tau nu_A(alpha) at tau = " << r["tau1"].dump() << ": "
         << r["final_tau_nu"].dump() << "\n";
      os << "Window range of tau nu_A(alpha): [" << r["min_tau_nu_late"].dump() << ", "
         << r["max_tau_nu"].dump() << "]\n";
      os << "Theoretical bracket [1/C^*, 1/C_*]: " << r["bracket"].dump() << "\n";
      os << "Enhanced decay observed: " << (r.value("enhanced_decay", false) ? "yes" : "no")
         << "\n\n";
    }
    os << "## Metrics\n\n```json\n" << m.dump(2) << "\n```\n";
  }
  return os.str();
}

fs::path write_report(const fs::path& run_dir) {
  const fs::path summary_path = run_dir / "summary.json";
  if (!fs::exists(summary_path)) throw MissingArtifacts("no summary.json in " + run_dir.string());
  const json summary = read_json(summary_path);
  const fs::path out = run_dir / "report.md";
  write_atomic(out, render_report(summary));
  return out;
}

CommandOutcome run_command(const RunConfig& cfg) {
  CommandOutcome outcome;
  outcome.run_dir = cfg.output_dir;
  if (cfg.experiment == Experiment::report) {
    write_report(outcome.run_dir);
    outcome.summary = read_json(outcome.run_dir / "summary.json");
    return outcome;
  }
  fs::create_directories(outcome.run_dir);
  write_json(outcome.run_dir / "config.json", cfg.source);

  int code = kExitPass;
  switch (cfg.experiment) {
    case Experiment::simulate:
      outcome.summary = simulate_experiment(cfg, outcome.run_dir, code);
      break;
    case Experiment::profile_ode:
      outcome.summary = profile_experiment(cfg, outcome.run_dir, code);
      break;
    case Experiment::identities:
      outcome.summary = identities_experiment(cfg, code);
      break;
    case Experiment::report:
      break;
  }
  outcome.summary["seed"] = cfg.seed;
  outcome.exit_code = code;
  write_json(outcome.run_dir / "summary.json", outcome.summary);
  write_report(outcome.run_dir);
  return outcome;
}

}  // namespace qnls
