#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qnls/errors.hpp"
#include "qnls/evolve.hpp"
#include "qnls/spectral.hpp"

using namespace qnls;

namespace {

SystemParams canonical() { return validate_params(ParamInputs{}); }

SystemParams unit_masses_like(double m) {
  ParamInputs raw;
  raw.m = {m, m, 2.0 * m};
  return validate_params(raw);
}

// exp(-|x|^2 / 2) on the space grid.
ComplexGrid gaussian(const Grid2D& g) {
  ComplexGrid f(g.n());
  for (std::size_t i = 0; i < g.n(); ++i)
    for (std::size_t j = 0; j < g.n(); ++j) f(i, j) = std::exp(-0.5 * (g.x(i) * g.x(i) + g.x(j) * g.x(j)));
  return f;
}

// exp(-|xi|^2 / 2) on the frequency grid.
ComplexGrid gaussian_spectrum(const Grid2D& g) {
  ComplexGrid f(g.n());
  for (std::size_t i = 0; i < g.n(); ++i)
    for (std::size_t j = 0; j < g.n(); ++j) f(i, j) = std::exp(-0.5 * (g.xi(i) * g.xi(i) + g.xi(j) * g.xi(j)));
  return f;
}

ComplexGrid random_field(const Grid2D& g, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  ComplexGrid f(g.n());
  for (cplx& v : f) v = {d(rng), d(rng)};
  return f;
}

double max_diff(const ComplexGrid& a, const ComplexGrid& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

double max_abs(const ComplexGrid& a) {
  double m = 0.0;
  for (const cplx& v : a) m = std::max(m, std::abs(v));
  return m;
}

double freq_l2(const ComplexGrid& f, const Grid2D& g) {
  double acc = 0.0;
  for (const cplx& v : f) acc += std::norm(v);
  return std::sqrt(acc) * g.dxi();
}

}  // namespace

TEST_CASE("Gaussian transform matches the closed form") {
  const Grid2D g(256, 40.0);
  const ComplexGrid spec = transform(gaussian(g), g, Direction::forward);
  CHECK(max_diff(spec, gaussian_spectrum(g)) <= 1e-10);
}

TEST_CASE("transform round trip and Parseval") {
  const Grid2D g(64, 12.0);
  std::mt19937_64 rng(1);
  const ComplexGrid f = random_field(g, rng);
  const ComplexGrid spec = transform(f, g, Direction::forward);
  CHECK(max_diff(transform(spec, g, Direction::inverse), f) <= 1e-13);
  CHECK(freq_l2(spec, g) == doctest::Approx(l2_norm(f, g)).epsilon(1e-13));

  const ComplexGrid one(g.n(), 1.0);
  const ComplexGrid delta = transform(one, g, Direction::forward);
  CHECK(std::abs(delta(0, 0) - g.box_length() * g.box_length() / (2.0 * std::numbers::pi)) <= 1e-11);
  double rest = 0.0;
  for (std::size_t k = 1; k < delta.size(); ++k) rest = std::max(rest, std::abs(delta[k]));
  CHECK(rest <= 1e-12);

  CHECK_THROWS_AS(transform(ComplexGrid(32), g, Direction::forward), ShapeMismatch);
}

TEST_CASE("free Gaussian evolution") {
  const Grid2D g(256, 40.0);
  const double t = 1.0;
  const ComplexGrid out = free_propagate(gaussian(g), g, t, 1.0);
  const cplx a{1.0, t};
  ComplexGrid exact(g.n());
  for (std::size_t i = 0; i < g.n(); ++i)
    for (std::size_t j = 0; j < g.n(); ++j)
      exact(i, j) = std::exp(-(g.x(i) * g.x(i) + g.x(j) * g.x(j)) / (2.0 * a)) / a;
  CHECK(max_diff(out, exact) <= 1e-9);
  const cplx centre = out(g.n() / 2, g.n() / 2);
  CHECK(std::abs(centre - 1.0 / cplx(1.0, 1.0)) <= 1e-9);
  CHECK(std::abs(std::abs(centre) - std::sqrt(0.5)) <= 1e-9);
}

TEST_CASE("free propagation: identity, semigroup, unitarity") {
  const Grid2D g(64, 16.0);
  std::mt19937_64 rng(2);
  const ComplexGrid f = random_field(g, rng);
  CHECK(max_diff(free_propagate(f, g, 0.0, 1.0), f) == 0.0);
  const ComplexGrid ab = free_propagate(free_propagate(f, g, 0.3, 2.0), g, 0.45, 2.0);
  CHECK(max_diff(ab, free_propagate(f, g, 0.75, 2.0)) <= 1e-12 * max_abs(f));

  const FieldState s{g, {f, random_field(g, rng), random_field(g, rng)}, 0.0};
  const SystemParams p = canonical();
  const FieldState later = free_propagate(s, 2.5, p);
  CHECK(later.t == 2.5);
  for (int c = 0; c < 3; ++c) {
    CHECK(std::abs(l2_norm(later.u[c], g) / l2_norm(s.u[c], g) - 1.0) <= 1e-13);
    const double before = weighted_norm(s.u[c], g, WeightedSpace::Hs0, 1.5);
    const double after = weighted_norm(later.u[c], g, WeightedSpace::Hs0, 1.5);
    CHECK(std::abs(after / before - 1.0) <= 1e-12);
  }
}

TEST_CASE("apply_M phases") {
  const Grid2D g(64, 64.0);  // dx = 1, x_33 = 1, x_32 = 0
  const SystemParams p = canonical();
  Components ones{ComplexGrid(64, 1.0), ComplexGrid(64, 1.0), ComplexGrid(64, 1.0)};
  const Components m = apply_M(ones, g, 1.0, +1, p);
  CHECK(std::abs(m[2](33, 32) - std::polar(1.0, 1.0)) <= 1e-15);
  CHECK(std::abs(m[0](33, 32) - std::polar(1.0, 0.5)) <= 1e-15);

  std::mt19937_64 rng(3);
  const Components r{random_field(g, rng), random_field(g, rng), random_field(g, rng)};
  const Components fwd = apply_M(r, g, 0.7, +1, p);
  const Components back = apply_M(fwd, g, 0.7, -1, p);
  for (int c = 0; c < 3; ++c) {
    CHECK(max_diff(back[c], r[c]) <= 1e-14 * max_abs(r[c]));
    for (std::size_t k = 0; k < r[c].size(); ++k) CHECK(std::abs(std::abs(fwd[c][k]) - std::abs(r[c][k])) <= 1e-14 * std::abs(r[c][k]) + 1e-300);
  }
  CHECK_THROWS_AS(apply_M(r, g, 0.0, +1, p), ZeroTime);
}

TEST_CASE("apply_G on Gaussian data") {
  const Grid2D g(256, 40.0);
  const ComplexGrid phi = gaussian(g);
  for (double m : {1.0, 2.0, -1.0, 0.5, 1.5}) {
    CAPTURE(m);
    const ComplexGrid gp = apply_G(phi, g, Direction::forward, m);
    CHECK(std::abs(gp(0, 0) - cplx(0.0, -m)) <= 1e-10);
    CHECK(freq_l2(gp, g) == doctest::Approx(l2_norm(phi, g)).epsilon(1e-10));
    // -i m exp(-m^2 |xi|^2 / 2)
    double err = 0.0;
    for (std::size_t i = 0; i < g.n(); ++i)
      for (std::size_t j = 0; j < g.n(); ++j) {
        const double k2 = g.xi(i) * g.xi(i) + g.xi(j) * g.xi(j);
        err = std::max(err, std::abs(gp(i, j) - cplx(0.0, -m) * std::exp(-0.5 * m * m * k2)));
      }
    CHECK(err <= 1e-9);
    const ComplexGrid back = apply_G(gp, g, Direction::inverse, m);
    CHECK(max_diff(back, phi) <= 1e-10);
  }
  CHECK_THROWS_AS(apply_G(phi, g, Direction::forward, 0.0), InvalidArgument);
}

TEST_CASE("apply_G refuses rescalings that lose mass") {
  const Grid2D g(64, 10.0);
  ComplexGrid wide(64);
  for (std::size_t i = 0; i < 64; ++i)
    for (std::size_t j = 0; j < 64; ++j) wide(i, j) = std::exp(-0.02 * (g.x(i) * g.x(i) + g.x(j) * g.x(j)));
  CHECK_THROWS_AS(apply_G(wide, g, Direction::forward, 4.0), ScalingOutOfRange);
  CHECK_NOTHROW(apply_G(wide, g, Direction::forward, 4.0, 1.0));
}

TEST_CASE("apply_D is the band-limited dilation") {
  const Grid2D g(256, 40.0);
  const Components psi{gaussian_spectrum(g), gaussian_spectrum(g), gaussian_spectrum(g)};
  for (double t : {0.5, 1.0, 2.0}) {
    const Components d = apply_D(psi, g, t);
    double err = 0.0;
    for (std::size_t i = 0; i < g.n(); ++i)
      for (std::size_t j = 0; j < g.n(); ++j) {
        const double r2 = (g.x(i) * g.x(i) + g.x(j) * g.x(j)) / (t * t);
        err = std::max(err, std::abs(d[1](i, j) - std::exp(-0.5 * r2) / t));
      }
    CHECK(err <= 1e-9);
  }
  CHECK_THROWS_AS(apply_D(psi, g, 0.0), ZeroTime);
}

TEST_CASE("W(t) approaches the identity") {
  const Grid2D g(256, 40.0);
  const SystemParams p = canonical();
  const Components psi{gaussian_spectrum(g), gaussian_spectrum(g), gaussian_spectrum(g)};
  auto gap = [&](double t) {
    const Components w = apply_W(psi, g, t, p);
    double m = 0.0;
    for (int c = 0; c < 3; ++c) m = std::max(m, max_diff(w[c], psi[c]));
    return m;
  };
  const double g4 = gap(4.0);
  const double g16 = gap(16.0);
  const double g64 = gap(64.0);
  CHECK(g4 > g16);
  CHECK(g16 > g64);
  CHECK(gap(1e6) <= 1e-4 * max_abs(psi[0]));

  const Components explicit_w = apply_G(apply_M(apply_G(psi, g, Direction::inverse, p), g, 4.0, +1, p), g,
                                        Direction::forward, p);
  const Components w4 = apply_W(psi, g, 4.0, p);
  for (int c = 0; c < 3; ++c) CHECK(max_diff(w4[c], explicit_w[c]) <= 1e-12);
}

TEST_CASE("weighted norms") {
  const Grid2D g(256, 40.0);
  const ComplexGrid f = gaussian(g);
  const double root_pi = std::sqrt(std::numbers::pi);
  CHECK(std::abs(weighted_norm(f, g, WeightedSpace::Hs0, 0.0) - root_pi) <= 1e-8);
  CHECK(std::abs(weighted_norm(f, g, WeightedSpace::H0s, 0.0) - root_pi) <= 1e-8);
  CHECK(std::abs(weighted_norm(f, g, WeightedSpace::Hs0, 0.0) - weighted_norm(f, g, WeightedSpace::H0s, 0.0)) <= 1e-13);
  CHECK(std::abs(l2_norm(f, g) - root_pi) <= 1e-8);

  const Grid2D small(32, 8.0);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    const ComplexGrid r = random_field(small, rng);
    CHECK(weighted_norm(r, small, WeightedSpace::Hs0, 1.5) >= weighted_norm(r, small, WeightedSpace::Hs0, 0.0));
    CHECK(weighted_norm(r, small, WeightedSpace::H0s, 1.5) >= weighted_norm(r, small, WeightedSpace::H0s, 0.0));
  }
  CHECK_THROWS_AS(weighted_norm(f, g, WeightedSpace::Hs0, 2.0), InvalidArgument);
}

TEST_CASE("fractional Laplacian of a Gaussian") {
  // (-Delta) e^{-|x|^2/2} = (2 - |x|^2) e^{-|x|^2/2}
  const Grid2D g(256, 40.0);
  const ComplexGrid lap = fractional_laplacian(gaussian(g), g, 2.0);
  double err = 0.0;
  for (std::size_t i = 0; i < g.n(); ++i)
    for (std::size_t j = 0; j < g.n(); ++j) {
      const double r2 = g.x(i) * g.x(i) + g.x(j) * g.x(j);
      err = std::max(err, std::abs(lap(i, j) - (2.0 - r2) * std::exp(-0.5 * r2)));
    }
  CHECK(err <= 1e-9);
}

TEST_CASE("compute_alpha") {
  const Grid2D g(256, 40.0);
  const SystemParams p = canonical();
  const FieldState phi{g, {gaussian(g), gaussian(g), gaussian(g)}, 0.0};
  const Components a1 = compute_alpha(free_propagate(phi, 1.0, p), p);
  const Components a4 = compute_alpha(free_propagate(phi, 4.0, p), p);
  for (int c = 0; c < 3; ++c) {
    CHECK(max_diff(a1[c], a4[c]) <= 1e-10);
    CHECK(std::abs(a1[c](0, 0) - cplx(0.0, -p.m()[c])) <= 1e-10);
  }
  const Components zero = compute_alpha(FieldState::zeros(g, 2.0), p);
  for (int c = 0; c < 3; ++c) CHECK(max_abs(zero[c]) == 0.0);
  CHECK_THROWS_AS(compute_alpha(FieldState::zeros(g, 0.5), p), InvalidArgument);
}

TEST_CASE("non-integer masses use the interpolating G") {
  const Grid2D g(128, 30.0);
  const SystemParams p = unit_masses_like(0.75);
  const ComplexGrid phi = gaussian(g);
  const FieldState s{g, {phi, phi, phi}, 0.0};
  const Components a = compute_alpha(free_propagate(s, 1.5, p), p);
  for (int c = 0; c < 3; ++c) CHECK(std::abs(a[c](0, 0) - cplx(0.0, -p.m()[c])) <= 1e-10);
}

// The ratio ||F(phi)||_{H^{s,0}} / (||phi||_inf ||phi||_{H^{s,0}}) stays
// bounded over random band-limited fields.
TEST_CASE("fractional Leibniz ratio stays bounded") {
  const Grid2D g(64, 20.0);
  const SystemParams p = canonical();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d;
  std::uniform_real_distribution<double> amp(0.05, 5.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double a = amp(rng);
    Components phi;
    for (int c = 0; c < 3; ++c) {
      ComplexGrid spec(g.n());
      for (std::size_t i = 0; i < g.n(); ++i)
        for (std::size_t j = 0; j < g.n(); ++j) {
          const double k2 = g.xi(i) * g.xi(i) + g.xi(j) * g.xi(j);
          if (k2 <= 9.0) spec(i, j) = a * cplx(d(rng), d(rng));
        }
      phi[c] = transform(spec, g, Direction::inverse);
    }
    const double num = weighted_norm(apply_F(phi, p), g, WeightedSpace::Hs0, p.s());
    const double den = sup_norm(phi) * weighted_norm(phi, g, WeightedSpace::Hs0, p.s());
    worst = std::max(worst, num / den);
  }
  MESSAGE("max Leibniz ratio " << worst);
  CHECK(worst < 100.0);
}
