#include "qnls/identities.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qnls/spectral.hpp"

namespace qnls {

using nlohmann::json;

json to_json(const CheckResult& c) {
  return json{{"name", c.name},           {"claim", c.claim}, {"value", c.value},
              {"threshold", c.threshold}, {"pass", c.pass},   {"detail", c.detail}};
}

ComplexTriple random_triple(std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  return ComplexTriple({g(rng), g(rng)}, {g(rng), g(rng)}, {g(rng), g(rng)});
}

SystemParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mag(0.25, 3.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::bernoulli_distribution flip(0.3);
  ParamInputs in;
  for (;;) {
    const double m1 = mag(rng) * (flip(rng) ? -1.0 : 1.0);
    const double m2 = mag(rng) * (flip(rng) ? -1.0 : 1.0);
    if (std::abs(m1 + m2) > 0.1) {
      in.m = {m1, m2, m1 + m2};
      break;
    }
  }
  for (int j = 0; j < 3; ++j) {
    in.lambda[j] = {unit(rng), -std::abs(unit(rng)) - 0.05};
    in.kappa[j] = mag(rng);
  }
  in.mu[0] = {unit(rng), unit(rng)};
  in.mu[1] = {unit(rng), unit(rng)};
  in.mu[2] = std::conj((in.kappa[0] * in.mu[0] + in.kappa[1] * in.mu[1]) / in.kappa[2]);
  return validate_params(in);
}

CheckResult check_gauge(int samples, std::uint64_t seed, double tolerance) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const SystemParams p = random_params(rng);
    const ComplexTriple z = random_triple(rng);
    const double theta = 4.0 * angle(rng);
    const ComplexTriple lhs = eval_F(gauge_rotate(z, theta, p), p);
    const ComplexTriple rhs = gauge_rotate(eval_F(z, p), theta, p);
    const double n = z.norm();
    worst = std::max(worst, (lhs - rhs).norm() / (1.0 + n * n));
  }
  return CheckResult{"gauge", "F commutes with the gauge rotation under mass resonance", worst,
                     tolerance, worst <= tolerance, json{{"samples", samples}}};
}

CheckResult check_dissipation(int samples, std::uint64_t seed, double tolerance) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const SystemParams p = random_params(rng);
    const ComplexTriple z = random_triple(rng);
    const double lhs = dissipation_pairing(z, p).pairing.imag();
    const double rhs = dissipation_closed_form(z, p);
    const double n = z.norm();
    worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + n * n * n));
  }
  return CheckResult{"dissipation", "Im<F(z), Az> equals sum kappa_j Im lambda_j |z_j|^3", worst,
                     tolerance, worst <= tolerance, json{{"samples", samples}}};
}

CheckResult check_factorization(const FactorizationSpec& spec, const SystemParams& p) {
  const Grid2D grid(spec.n, spec.box_length);
  Components phi{ComplexGrid(grid.n()), ComplexGrid(grid.n()), ComplexGrid(grid.n())};
  const double inv2w2 = 1.0 / (2.0 * spec.width * spec.width);
  for (std::size_t i = 0; i < grid.n(); ++i) {
    for (std::size_t j = 0; j < grid.n(); ++j) {
      const double r2 = grid.x(i) * grid.x(i) + grid.x(j) * grid.x(j);
      for (auto& c : phi) c(i, j) = std::exp(-r2 * inv2w2);
    }
  }
  const double scale = sup_norm(phi);
  double worst = 0.0;
  json per_time = json::array();
  for (double t : spec.times) {
    Components lhs;
    for (int c = 0; c < 3; ++c) lhs[c] = free_propagate(phi[c], grid, t, p.m()[c]);
    const Components g = apply_G(apply_M(phi, grid, t, +1, p), grid, Direction::forward, p);
    const Components rhs = apply_M(apply_D(g, grid, t), grid, t, +1, p);
    Components diff = lhs;
    for (int c = 0; c < 3; ++c) {
      for (std::size_t idx = 0; idx < diff[c].size(); ++idx) diff[c][idx] -= rhs[c][idx];
    }
    const double err = sup_norm(diff) / scale;
    worst = std::max(worst, err);
    per_time.push_back(json{{"t", t}, {"relative_sup_error", err}});
  }
  return CheckResult{"factorization", "U(t) = M(t) D(t) G M(t) on Gaussian data", worst,
                     spec.tolerance, worst <= spec.tolerance,
                     json{{"n", spec.n}, {"L", spec.box_length}, {"width", spec.width},
                          {"times", per_time}}};
}

namespace {

// Relative L2 gap of the two sides of the commutation identity for data
// exp(-|x|^2/2) exp(i m_j v.x).
double commutation_gap(const Grid2D& grid, double t, std::array<double, 2> v, const SystemParams& p) {
  const double s = p.s();
  Components phi{ComplexGrid(grid.n()), ComplexGrid(grid.n()), ComplexGrid(grid.n())};
  ComplexGrid weight(grid.n());
  for (std::size_t i = 0; i < grid.n(); ++i) {
    for (std::size_t j = 0; j < grid.n(); ++j) {
      const double x = grid.x(i);
      const double y = grid.x(j);
      const double r2 = x * x + y * y;
      weight(i, j) = std::pow(r2, 0.5 * s);
      for (int c = 0; c < 3; ++c) {
        phi[c](i, j) = std::polar(std::exp(-0.5 * r2), p.m()[c] * (v[0] * x + v[1] * y));
      }
    }
  }
  const Components chirped = apply_M(phi, grid, t, -1, p);
  Components lhs;
  Components rhs;
  for (int c = 0; c < 3; ++c) {
    lhs[c] = free_propagate(phi[c], grid, -t, p.m()[c]);
    for (std::size_t idx = 0; idx < lhs[c].size(); ++idx) lhs[c][idx] *= weight[idx];
    lhs[c] = free_propagate(lhs[c], grid, t, p.m()[c]);
    rhs[c] = fractional_laplacian(chirped[c], grid, s);
    const double factor = std::pow(std::abs(t) / std::abs(p.m()[c]), s);
    for (cplx& z : rhs[c]) z *= factor;
  }
  rhs = apply_M(rhs, grid, t, +1, p);
  double num = 0.0;
  double den = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (std::size_t idx = 0; idx < lhs[c].size(); ++idx) {
      num += std::norm(lhs[c][idx] - rhs[c][idx]);
      den += std::norm(rhs[c][idx]);
    }
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

}  // namespace

CheckResult check_commutation(const CommutationSpec& spec, const SystemParams& p) {
  const Grid2D grid(spec.n, spec.box_length);
  const double gap = commutation_gap(grid, spec.t, spec.velocity, p);
  const double centered = commutation_gap(grid, spec.t, {0.0, 0.0}, p);
  return CheckResult{
      "commutation", "U(t)|x|^s U(-t) = M(t) (|t|/|m|)^s (-Delta)^{s/2} M(-t)", gap,
      spec.tolerance, gap <= spec.tolerance,
      json{{"n", spec.n},
           {"L", spec.box_length},
           {"t", spec.t},
           {"s", p.s()},
           {"velocity", {spec.velocity[0], spec.velocity[1]}},
           {"centered_gaussian_gap", centered}}};
}

std::vector<CheckResult> run_identities(const IdentitySpec& spec, const SystemParams& p,
                                        std::uint64_t seed) {
  return {check_gauge(spec.samples, seed, spec.tolerance),
          check_dissipation(spec.samples, seed, spec.tolerance),
          check_factorization(spec.factorization, p), check_commutation(spec.commutation, p)};
}

}  // namespace qnls
