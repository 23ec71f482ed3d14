#pragma once

// Run configuration: one JSON file describes one experiment.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qnls/evolve.hpp"
#include "qnls/model.hpp"

namespace qnls {

enum class Experiment { simulate, profile_ode, identities, report };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);

struct ProfileSpec {
  double tau0 = 10.0;  // start of the measured window
  double tau1 = 40.0;
  double dtau = 1e-3;
  std::size_t record_every = 100;
  /// Starting value at tau = 0. Defaults to -i (m1, m2, m3) scaled to nu_A = nu0.
  std::optional<CplxTriple> alpha0;
  /// Checkpoint whose alpha at the peak of nu_A seeds the run instead.
  std::string alpha0_from;
  double nu0 = 1.0;
  /// Additional random starting triples on the sphere nu_A = nu0.
  int panel = 8;
};

struct FactorizationSpec {
  std::size_t n = 256;
  double box_length = 40.0;
  std::vector<double> times{0.5, 1.0, 2.0};
  /// Data exp(-|x|^2 / (2 w^2)).
  double width = 0.7071067811865476;
  double tolerance = 1e-8;
};

struct CommutationSpec {
  std::size_t n = 512;
  double box_length = 40.0;
  double t = 1.0;
  std::array<double, 2> velocity{8.0, 0.0};
  double tolerance = 1e-6;
};

struct IdentitySpec {
  int samples = 1000;
  double tolerance = 1e-12;
  FactorizationSpec factorization;
  CommutationSpec commutation;
};

/// Thresholds applied to simulate runs.
struct SimulationChecks {
  double ledger_drift = 1e-4;
  double decay_fluctuation = 0.05;
  double decay_window_start = 5.0;
  double residual_band = 10.0;
  std::array<double, 2> residual_window{2.0, 20.0};
};

struct RunConfig {
  Experiment experiment = Experiment::simulate;
  SystemParams params;
  std::size_t n = 256;
  double box_length = 40.0;
  double dt = 1e-3;
  double t_final = 10.0;
  int diagnostics_every = 10;
  int checkpoint_every = 0;
  InitialData initial;
  BoundaryPolicy boundary;
  ProfileSpec profile;
  IdentitySpec identities;
  SimulationChecks checks;
  std::string output_dir;
  std::uint64_t seed = 20240611;
  /// The document the config was parsed from, echoed into summaries.
  nlohmann::json source;
};

/// Reads and validates a config file. Throws ParseError for malformed JSON
/// and ConfigError naming the offending field otherwise.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_json(const nlohmann::json& doc);

/// Complex numbers are written as a number or as [re, im].
cplx parse_complex(const nlohmann::json& v, const std::string& field);
nlohmann::json complex_to_json(cplx z);

SimulationSetup simulation_setup(const RunConfig& cfg);

}  // namespace qnls
