#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "qnls/commands.hpp"
#include "qnls/config.hpp"
#include "qnls/errors.hpp"
#include "qnls/io.hpp"

using namespace qnls;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  const fs::path dir = fs::temp_directory_path() / ("qnls_" + tag + "_" + std::to_string(rng() % 1000000000));
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(QNLS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json tiny_simulation(const fs::path& out) {
  return json{{"experiment", "simulate"},
              {"grid", {{"n", 32}, {"L", 20}}},
              {"time", {{"dt", 0.01}, {"t_final", 1.2}, {"diagnostics_every", 10}, {"checkpoint_every", 50}}},
              {"initial", {{"epsilon", 0.0}}},
              {"output", {{"dir", out.string()}}}};
}

}  // namespace

TEST_CASE("minimal config takes the defaults") {
  const RunConfig cfg = parse_config_json(json{{"params", json::object()}});
  CHECK(cfg.experiment == Experiment::simulate);
  CHECK(cfg.n == 256);
  CHECK(cfg.box_length == 40.0);
  CHECK(cfg.dt == 1e-3);
  CHECK(cfg.params.s() == 1.5);
  CHECK(cfg.params.gamma() == doctest::Approx(0.2));
  CHECK(cfg.params.strict());
  CHECK(cfg.output_dir == "runs/simulate");
}

TEST_CASE("config errors name the field") {
  auto message = [](const json& doc) -> std::string {
    try {
      parse_config_json(doc);
    } catch (const ConfigError& e) {
      return e.what();
    }
    return "";
  };
  CHECK(message(json{{"params", {{"m", {1, 1, 1}}}}}).find("params: mass") == 0);
  CHECK(message(json{{"grid", {{"n", 100}}}}).find("grid.n") == 0);
  CHECK(message(json{{"grid", {{"nn", 64}}}}).find("grid.nn: unknown field") == 0);
  CHECK(message(json{{"experiment", "fly"}}).find("experiment") == 0);
  CHECK(message(json{{"initial", {{"epsilon", -0.1}}}}).find("initial.epsilon") == 0);
  CHECK(message(json{{"time", {{"dt", 0.003}, {"t_final", 0.01}}}}).find("time.t_final") == 0);
  CHECK(message(json{{"params", {{"lambda", {1, 1, "x"}}}}}).find("params.lambda[2]") == 0);
  CHECK(message(json{{"boundary", {{"action", "ignore"}}}}).find("boundary.action") == 0);
  CHECK(message(json{{"profile", {{"tau0", 5}}}}).find("profile") == 0);
}

TEST_CASE("complex values and kappa auto") {
  CHECK(parse_complex(json(2.5), "x") == cplx{2.5, 0.0});
  CHECK(parse_complex(json{1, -2}, "x") == cplx{1.0, -2.0});
  CHECK_THROWS_AS(parse_complex(json{1, 2, 3}, "x"), ConfigError);
  CHECK(complex_to_json(cplx{1, -2}) == json{1.0, -2.0});

  const RunConfig cfg = parse_config_json(json{{"params", {{"mu", {1, 1, 2}}, {"kappa", "auto"}}}});
  CHECK(cfg.params.kappa()[2] == doctest::Approx(1.0));
  CHECK_THROWS_AS(parse_config_json(json{{"params", {{"mu", {1, 1, -2}}, {"kappa", "auto"}}}}), ConfigError);
}

TEST_CASE("malformed files are ParseErrors") {
  const fs::path dir = scratch_dir("parse");
  std::ofstream(dir / "bad.json") << "{\"params\": ";
  CHECK_THROWS_AS(parse_config(dir / "bad.json"), ParseError);
  CHECK_THROWS_AS(parse_config(dir / "missing.json"), ParseError);
  fs::remove_all(dir);
}

TEST_CASE("shipped fixtures parse to the acceptance parameters") {
  const RunConfig cfg = parse_config(fs::path(QNLS_CONFIG_DIR) / "canonical_strict.json");
  CHECK(cfg.experiment == Experiment::simulate);
  CHECK(cfg.params.m() == RealTriple{1.0, 1.0, 2.0});
  for (const cplx& l : cfg.params.lambda()) CHECK(l == cplx{0.0, -1.0});
  CHECK(cfg.params.mu()[2] == cplx{2.0, 0.0});
  CHECK(cfg.n == 256);
  CHECK(cfg.box_length == 40.0);
  CHECK(cfg.dt == 1e-3);
  CHECK(cfg.t_final == 10.0);
  CHECK(cfg.initial.epsilon == 0.1);

  for (const auto& entry : fs::directory_iterator(QNLS_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(parse_config(entry.path()));
  }
}

TEST_CASE("atomic writes and JSON round trip") {
  const fs::path dir = scratch_dir("io");
  write_atomic(dir / "a.txt", "hello");
  CHECK(slurp(dir / "a.txt") == "hello");
  write_atomic(dir / "a.txt", "bye");
  CHECK(slurp(dir / "a.txt") == "bye");
  const json doc{{"x", 1}, {"y", {1, 2}}};
  write_json(dir / "d.json", doc);
  CHECK(read_json(dir / "d.json") == doc);
  CHECK_THROWS_AS(read_json(dir / "none.json"), MissingArtifacts);
  std::size_t leftovers = 0;
  for (const auto& e : fs::directory_iterator(dir)) leftovers += e.path().filename().string().find(".tmp") != std::string::npos;
  CHECK(leftovers == 0);
  fs::remove_all(dir);
}

TEST_CASE("diagnostics CSV layout") {
  DiagnosticsSeries s;
  DiagnosticRecord r;
  r.t = 0.5;
  r.sup_u = 0.25;
  r.phi = std::nan("");
  s.rows.push_back(r);
  const std::string csv = diagnostics_csv(s);
  std::istringstream in(csv);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "t,sup_u,sup_u_t,sup_u_tlogt,ledger,ledger_drift_rel,phi,logt_sqrtphi,logt2_phi,r_sup,xnorm_ms0,xnorm_m0s");
  CHECK(row.rfind("0.5,0.25,", 0) == 0);
  CHECK(row.find("nan") != std::string::npos);
}

TEST_CASE("checkpoint round trip") {
  const fs::path dir = scratch_dir("ckpt");
  const SystemParams p = validate_params(ParamInputs{});
  FieldState s = FieldState::zeros(Grid2D(16, 5.0), 1.25);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d;
  for (auto& c : s.u)
    for (cplx& v : c) v = {d(rng), d(rng)};
  write_checkpoint(dir / "s.ckpt", s, p);
  const Checkpoint back = read_checkpoint(dir / "s.ckpt");
  CHECK(back.params_hash == params_hash(p));
  CHECK(back.state.t == 1.25);
  CHECK(back.state.grid == s.grid);
  for (int c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < s.u[c].size(); ++k) CHECK(back.state.u[c][k] == s.u[c][k]);

  ParamInputs other;
  other.lambda[0] = cplx{0.5, -1.0};
  CHECK(params_hash(validate_params(other)) != params_hash(p));

  const std::string bytes = slurp(dir / "s.ckpt");
  write_atomic(dir / "short.ckpt", bytes.substr(0, bytes.size() - 8));
  CHECK_THROWS_AS(read_checkpoint(dir / "short.ckpt"), ParseError);
  write_atomic(dir / "junk.ckpt", "NOTACHECKPOINT");
  CHECK_THROWS_AS(read_checkpoint(dir / "junk.ckpt"), ParseError);
  fs::remove_all(dir);
}

TEST_CASE("simulate command with zero data passes") {
  const fs::path dir = scratch_dir("sim");
  const RunConfig cfg = parse_config_json(tiny_simulation(dir / "run"));
  const CommandOutcome out = run_command(cfg);
  CHECK(out.exit_code == kExitPass);
  CHECK(fs::exists(dir / "run" / "diagnostics.csv"));
  CHECK(fs::exists(dir / "run" / "final.ckpt"));
  CHECK(fs::exists(dir / "run" / "summary.json"));
  CHECK(fs::exists(dir / "run" / "report.md"));
  CHECK(fs::exists(dir / "run" / "config.json"));
  CHECK(!fs::is_empty(dir / "run" / "checkpoints"));
  for (const auto& c : out.summary.at("checks")) CHECK(c.at("pass").get<bool>());
  CHECK(out.summary.at("metrics").at("final_sup_u") == 0.0);

  // identical config, identical series
  const std::string first = slurp(dir / "run" / "diagnostics.csv");
  run_command(cfg);
  CHECK(slurp(dir / "run" / "diagnostics.csv") == first);
  fs::remove_all(dir);
}

TEST_CASE("profile-ode command on the decoupled system") {
  const fs::path dir = scratch_dir("prof");
  const json doc{{"experiment", "profile-ode"},
                 {"params", {{"mu", {0, 0, 0}}, {"test_mode", true}}},
                 {"profile", {{"tau0", 10}, {"tau1", 40}, {"dtau", 1e-3}, {"alpha0", {10, 0, 0}}, {"panel", 0}}},
                 {"output", {{"dir", (dir / "run").string()}}}};
  const CommandOutcome out = run_command(parse_config_json(doc));
  CHECK(out.exit_code == kExitPass);
  const fs::path csv = dir / "run" / "profile.csv";
  REQUIRE(fs::exists(csv));
  CHECK(first_line(csv) == "tau,re_a1,im_a1,re_a2,im_a2,re_a3,im_a3,nu_A,tau_nu_A,tau2_phi");
  std::ifstream in(csv);
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  std::vector<double> cols;
  std::istringstream row(last);
  for (std::string cell; std::getline(row, cell, ',');) cols.push_back(std::stod(cell));
  REQUIRE(cols.size() == 10);
  CHECK(cols[0] == doctest::Approx(40.0));
  CHECK(std::abs(cols[0] * std::hypot(cols[1], cols[2]) - 1.0) <= 0.01);

  bool saw_closed_form = false;
  for (const auto& c : out.summary.at("checks")) saw_closed_form |= c.at("name") == "closed_form";
  CHECK(saw_closed_form);
  const std::string report = slurp(dir / "run" / "report.md");
  CHECK(report.find("closed_form") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("identities command and report") {
  const fs::path dir = scratch_dir("ident");
  json doc{{"experiment", "identities"},
           {"identities", {{"samples", 200},
                           {"factorization", {{"n", 128}, {"L", 30}, {"times", {1.0}}, {"tolerance", 1e-6}}},
                           {"commutation", {{"n", 256}, {"L", 40}, {"velocity", {4, 0}}, {"tolerance", 1e-4}}}}},
           {"output", {{"dir", (dir / "run").string()}}}};
  const CommandOutcome out = run_command(parse_config_json(doc));
  CHECK(out.exit_code == kExitPass);
  REQUIRE(out.summary.at("checks").size() == 4);
  const std::string report = slurp(dir / "run" / "report.md");
  for (const char* name : {"gauge", "dissipation", "factorization", "commutation"}) CHECK(report.find(name) != std::string::npos);

  fs::remove(dir / "run" / "report.md");
  write_report(dir / "run");
  CHECK(slurp(dir / "run" / "report.md") == report);

  write_json(dir / "empty" / "summary.json", json::object());
  CHECK_THROWS_AS(write_report(dir / "empty"), MissingArtifacts);
  CHECK_THROWS_AS(write_report(dir / "nowhere"), MissingArtifacts);
  CHECK_THROWS_AS(render_report(json::object()), MissingArtifacts);
  fs::remove_all(dir);
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch_dir("cli");
  const fs::path good = dir / "good.json";
  write_json(good, tiny_simulation(dir / "run"));
  CHECK(run_cli("validate " + good.string()) == 0);
  CHECK(run_cli("simulate " + good.string()) == 0);
  CHECK(run_cli("report " + (dir / "run").string()) == 0);
  CHECK(run_cli("report " + (dir / "missing").string()) == 2);

  json bad = tiny_simulation(dir / "run");
  bad["params"] = {{"m", {1, 1, 1}}};
  write_json(dir / "bad.json", bad);
  CHECK(run_cli("validate " + (dir / "bad.json").string()) == 2);
  CHECK(run_cli("simulate " + (dir / "bad.json").string()) == 2);
  CHECK(run_cli("profile-ode " + good.string()) == 2);  // experiment mismatch
  CHECK(run_cli("simulate " + (dir / "absent.json").string()) == 2);

  json failing = tiny_simulation(dir / "fail");
  failing["initial"] = {{"epsilon", 1.0}};
  failing["grid"] = {{"n", 32}, {"L", 6}};
  failing["time"] = {{"dt", 0.01}, {"t_final", 0.1}};
  failing["boundary"] = {{"action", "abort"}};
  write_json(dir / "fail.json", failing);
  CHECK(run_cli("simulate " + (dir / "fail.json").string()) == 1);
  fs::remove_all(dir);
}
