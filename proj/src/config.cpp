#include "qnls/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "qnls/errors.hpp"

namespace qnls {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw ConfigError(field + ": " + msg);
}

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& known) {
  if (!obj.is_object()) fail(where, "must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!known.count(key)) fail(where.empty() ? key : where + "." + key, "unknown field");
  }
}

double get_number(const json& obj, const char* key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(where + "." + key, "must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(where + "." + key, "must be finite");
  return d;
}

long get_integer(const json& obj, const char* key, const std::string& where, long fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(where + "." + key, "must be an integer");
  return v.get<long>();
}

RealTriple get_real_triple(const json& obj, const char* key, const std::string& where,
                           RealTriple fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 3) fail(where + "." + key, "must be an array of 3 numbers");
  RealTriple out{};
  for (std::size_t j = 0; j < 3; ++j) {
    if (!v[j].is_number()) fail(where + "." + key, "must be an array of 3 numbers");
    out[j] = v[j].get<double>();
  }
  return out;
}

CplxTriple get_complex_triple(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 3) fail(field, "must be an array of 3 complex values");
  return {parse_complex(v[0], field + "[0]"), parse_complex(v[1], field + "[1]"),
          parse_complex(v[2], field + "[2]")};
}

ParamInputs parse_params(const json& obj) {
  reject_unknown(obj, "params", {"m", "lambda", "mu", "kappa", "s", "gamma", "test_mode"});
  ParamInputs in;
  in.m = get_real_triple(obj, "m", "params", in.m);
  if (obj.contains("lambda")) in.lambda = get_complex_triple(obj.at("lambda"), "params.lambda");
  if (obj.contains("mu")) in.mu = get_complex_triple(obj.at("mu"), "params.mu");
  if (obj.contains("kappa")) {
    const json& k = obj.at("kappa");
    if (k.is_string()) {
      if (k.get<std::string>() != "auto") fail("params.kappa", "must be 3 numbers or \"auto\"");
      const auto found = find_kappa(in.mu);
      if (!found) fail("params.kappa", "no positive kappa satisfies the mu relation for this mu");
      in.kappa = *found;
    } else {
      in.kappa = get_real_triple(obj, "kappa", "params", in.kappa);
    }
  }
  in.s = get_number(obj, "s", "params", in.s);
  in.gamma = get_number(obj, "gamma", "params", in.gamma);
  if (obj.contains("test_mode")) {
    if (!obj.at("test_mode").is_boolean()) fail("params.test_mode", "must be a boolean");
    in.test_mode = obj.at("test_mode").get<bool>();
  }
  return in;
}

InitialData parse_initial(const json& obj) {
  reject_unknown(obj, "initial", {"profile", "epsilon", "scales", "width", "velocity"});
  InitialData d;
  if (obj.contains("profile")) {
    if (!obj.at("profile").is_string()) fail("initial.profile", "must be a string");
    d.profile = obj.at("profile").get<std::string>();
    if (d.profile != "gaussian") fail("initial.profile", "unknown profile '" + d.profile + "'");
  }
  d.epsilon = get_number(obj, "epsilon", "initial", d.epsilon);
  if (d.epsilon < 0.0) fail("initial.epsilon", "must be >= 0");
  d.scales = get_real_triple(obj, "scales", "initial", d.scales);
  d.width = get_number(obj, "width", "initial", d.width);
  if (!(d.width > 0.0)) fail("initial.width", "must be > 0");
  if (obj.contains("velocity")) {
    const json& v = obj.at("velocity");
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      fail("initial.velocity", "must be an array of 2 numbers");
    }
    d.velocity = {v[0].get<double>(), v[1].get<double>()};
  }
  return d;
}

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::simulate:
      return "simulate";
    case Experiment::profile_ode:
      return "profile-ode";
    case Experiment::identities:
      return "identities";
    case Experiment::report:
      return "report";
  }
  return "unknown";
}

Experiment experiment_from_string(const std::string& name) {
  if (name == "simulate") return Experiment::simulate;
  if (name == "profile-ode") return Experiment::profile_ode;
  if (name == "identities") return Experiment::identities;
  if (name == "report") return Experiment::report;
  fail("experiment", "unrecognised kind '" + name + "'");
}

cplx parse_complex(const json& v, const std::string& field) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  fail(field, "complex values are a number or [re, im]");
}

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return parse_config_json(doc);
}

RunConfig parse_config_json(const json& doc) {
  reject_unknown(doc, "", {"experiment", "params", "grid", "time", "initial", "boundary", "profile",
                           "identities", "checks", "output", "seed", "description"});

  Experiment kind = Experiment::simulate;
  if (doc.contains("experiment")) {
    if (!doc.at("experiment").is_string()) fail("experiment", "must be a string");
    kind = experiment_from_string(doc.at("experiment").get<std::string>());
  }

  const ParamInputs inputs = doc.contains("params") ? parse_params(doc.at("params")) : ParamInputs{};
  std::optional<SystemParams> params;
  try {
    params = validate_params(inputs);
  } catch (const Error& e) {
    fail("params", e.what());
  }

  RunConfig cfg{.experiment = kind, .params = *params};
  cfg.source = doc;

  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    reject_unknown(g, "grid", {"n", "L"});
    const long n = get_integer(g, "n", "grid", static_cast<long>(cfg.n));
    if (n < 16 || (n & (n - 1)) != 0) fail("grid.n", "must be a power of two >= 16");
    cfg.n = static_cast<std::size_t>(n);
    cfg.box_length = get_number(g, "L", "grid", cfg.box_length);
    if (!(cfg.box_length > 0.0)) fail("grid.L", "must be > 0");
  }

  if (doc.contains("time")) {
    const json& t = doc.at("time");
    reject_unknown(t, "time", {"dt", "t_final", "diagnostics_every", "checkpoint_every"});
    cfg.dt = get_number(t, "dt", "time", cfg.dt);
    if (!(cfg.dt > 0.0)) fail("time.dt", "must be > 0");
    cfg.t_final = get_number(t, "t_final", "time", cfg.t_final);
    if (!(cfg.t_final >= 0.0)) fail("time.t_final", "must be >= 0");
    const double ratio = cfg.t_final / cfg.dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-6 * std::max(1.0, ratio)) {
      fail("time.t_final", "must be an integer multiple of dt");
    }
    cfg.diagnostics_every = static_cast<int>(get_integer(t, "diagnostics_every", "time", 10));
    if (cfg.diagnostics_every < 1) fail("time.diagnostics_every", "must be >= 1");
    cfg.checkpoint_every = static_cast<int>(get_integer(t, "checkpoint_every", "time", 0));
    if (cfg.checkpoint_every < 0) fail("time.checkpoint_every", "must be >= 0");
  }

  if (doc.contains("initial")) cfg.initial = parse_initial(doc.at("initial"));

  if (doc.contains("boundary")) {
    const json& b = doc.at("boundary");
    reject_unknown(b, "boundary", {"threshold", "action"});
    cfg.boundary.threshold = get_number(b, "threshold", "boundary", cfg.boundary.threshold);
    if (!(cfg.boundary.threshold > 0.0)) fail("boundary.threshold", "must be > 0");
    if (b.contains("action")) {
      const json& a = b.at("action");
      if (!a.is_string() || (a != "abort" && a != "report")) {
        fail("boundary.action", "must be \"abort\" or \"report\"");
      }
      cfg.boundary.abort = a == "abort";
    }
  }

  if (doc.contains("profile")) {
    const json& pr = doc.at("profile");
    reject_unknown(pr, "profile",
                   {"tau0", "tau1", "dtau", "record_every", "alpha0", "alpha0_from", "nu0", "panel"});
    ProfileSpec& ps = cfg.profile;
    ps.tau0 = get_number(pr, "tau0", "profile", ps.tau0);
    ps.tau1 = get_number(pr, "tau1", "profile", ps.tau1);
    if (!(ps.tau0 >= 10.0 && ps.tau1 >= 2.0 * ps.tau0)) {
      fail("profile", "window must satisfy tau1 >= 2 tau0 >= 20");
    }
    ps.dtau = get_number(pr, "dtau", "profile", ps.dtau);
    if (!(ps.dtau > 0.0)) fail("profile.dtau", "must be > 0");
    const long every = get_integer(pr, "record_every", "profile", static_cast<long>(ps.record_every));
    if (every < 1) fail("profile.record_every", "must be >= 1");
    ps.record_every = static_cast<std::size_t>(every);
    if (pr.contains("alpha0")) ps.alpha0 = get_complex_triple(pr.at("alpha0"), "profile.alpha0");
    if (pr.contains("alpha0_from")) {
      if (!pr.at("alpha0_from").is_string()) fail("profile.alpha0_from", "must be a path string");
      ps.alpha0_from = pr.at("alpha0_from").get<std::string>();
    }
    if (ps.alpha0 && !ps.alpha0_from.empty()) {
      fail("profile", "alpha0 and alpha0_from are mutually exclusive");
    }
    ps.nu0 = get_number(pr, "nu0", "profile", ps.nu0);
    if (!(ps.nu0 > 0.0)) fail("profile.nu0", "must be > 0");
    ps.panel = static_cast<int>(get_integer(pr, "panel", "profile", ps.panel));
    if (ps.panel < 0) fail("profile.panel", "must be >= 0");
  }

  if (doc.contains("identities")) {
    const json& id = doc.at("identities");
    reject_unknown(id, "identities", {"samples", "tolerance", "factorization", "commutation"});
    IdentitySpec& is = cfg.identities;
    is.samples = static_cast<int>(get_integer(id, "samples", "identities", is.samples));
    if (is.samples < 1) fail("identities.samples", "must be >= 1");
    is.tolerance = get_number(id, "tolerance", "identities", is.tolerance);
    if (id.contains("factorization")) {
      const json& f = id.at("factorization");
      const std::string w = "identities.factorization";
      reject_unknown(f, w, {"n", "L", "times", "width", "tolerance"});
      is.factorization.n = static_cast<std::size_t>(get_integer(f, "n", w, 256));
      is.factorization.box_length = get_number(f, "L", w, is.factorization.box_length);
      if (f.contains("times")) {
        if (!f.at("times").is_array()) fail(w + ".times", "must be an array of numbers");
        is.factorization.times.clear();
        for (const auto& v : f.at("times")) {
          if (!v.is_number() || v.get<double>() <= 0.0) fail(w + ".times", "entries must be > 0");
          is.factorization.times.push_back(v.get<double>());
        }
      }
      is.factorization.width = get_number(f, "width", w, is.factorization.width);
      is.factorization.tolerance = get_number(f, "tolerance", w, is.factorization.tolerance);
    }
    if (id.contains("commutation")) {
      const json& c = id.at("commutation");
      const std::string w = "identities.commutation";
      reject_unknown(c, w, {"n", "L", "t", "velocity", "tolerance"});
      is.commutation.n = static_cast<std::size_t>(get_integer(c, "n", w, 512));
      is.commutation.box_length = get_number(c, "L", w, is.commutation.box_length);
      is.commutation.t = get_number(c, "t", w, is.commutation.t);
      if (is.commutation.t == 0.0) fail(w + ".t", "must be nonzero");
      if (c.contains("velocity")) {
        const json& v = c.at("velocity");
        if (!v.is_array() || v.size() != 2) fail(w + ".velocity", "must be an array of 2 numbers");
        is.commutation.velocity = {v[0].get<double>(), v[1].get<double>()};
      }
      is.commutation.tolerance = get_number(c, "tolerance", w, is.commutation.tolerance);
    }
  }

  if (doc.contains("checks")) {
    const json& c = doc.at("checks");
    reject_unknown(c, "checks", {"ledger_drift", "decay_fluctuation", "decay_window_start",
                                 "residual_band", "residual_window"});
    SimulationChecks& sc = cfg.checks;
    sc.ledger_drift = get_number(c, "ledger_drift", "checks", sc.ledger_drift);
    sc.decay_fluctuation = get_number(c, "decay_fluctuation", "checks", sc.decay_fluctuation);
    sc.decay_window_start = get_number(c, "decay_window_start", "checks", sc.decay_window_start);
    sc.residual_band = get_number(c, "residual_band", "checks", sc.residual_band);
    if (c.contains("residual_window")) {
      const json& v = c.at("residual_window");
      if (!v.is_array() || v.size() != 2) fail("checks.residual_window", "must be [t0, t1]");
      sc.residual_window = {v[0].get<double>(), v[1].get<double>()};
    }
  }

  if (doc.contains("output")) {
    const json& o = doc.at("output");
    reject_unknown(o, "output", {"dir"});
    if (o.contains("dir")) {
      if (!o.at("dir").is_string()) fail("output.dir", "must be a string");
      cfg.output_dir = o.at("dir").get<std::string>();
    }
  }
  if (cfg.output_dir.empty()) cfg.output_dir = "runs/" + to_string(cfg.experiment);

  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) fail("seed", "must be a non-negative integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }
  return cfg;
}

SimulationSetup simulation_setup(const RunConfig& cfg) {
  return SimulationSetup{cfg.params,
                         Grid2D(cfg.n, cfg.box_length),
                         cfg.dt,
                         cfg.t_final,
                         cfg.diagnostics_every,
                         cfg.checkpoint_every,
                         cfg.initial,
                         cfg.boundary};
}

}  // namespace qnls
