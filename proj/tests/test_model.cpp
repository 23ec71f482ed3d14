#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qnls/errors.hpp"
#include "qnls/identities.hpp"
#include "qnls/model.hpp"

using namespace qnls;

namespace {

SystemParams canonical() { return validate_params(ParamInputs{}); }

bool close(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

TEST_CASE("validate_params accepts the canonical coefficients") {
  const SystemParams p = canonical();
  CHECK(p.strict());
  CHECK(p.s() == 1.5);
  CHECK(p.gamma() == doctest::Approx(0.2));
}

TEST_CASE("validate_params names the failing assumption") {
  ParamInputs raw;
  raw.m = {1.0, 1.0, 1.0};
  CHECK_THROWS_AS(validate_params(raw), MassResonanceViolated);

  raw = ParamInputs{};
  raw.lambda[2] = cplx{0.0, 1.0};
  CHECK_THROWS_AS(validate_params(raw), DissipativityViolated);

  raw = ParamInputs{};
  raw.mu[2] = cplx{3.0, 0.0};
  CHECK_THROWS_AS(validate_params(raw), MuKappaMismatch);

  raw = ParamInputs{};
  raw.s = 2.0;
  CHECK_THROWS_AS(validate_params(raw), RegularityRangeError);
  raw.s = 1.5;
  raw.gamma = 0.25;
  CHECK_THROWS_AS(validate_params(raw), RegularityRangeError);
  raw.gamma = 0.0;
  CHECK_THROWS_AS(validate_params(raw), RegularityRangeError);

  raw = ParamInputs{};
  raw.kappa[0] = 0.0;
  CHECK_THROWS_AS(validate_params(raw), ParameterError);
}

TEST_CASE("zero coefficients need test mode") {
  ParamInputs raw;
  raw.mu = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(validate_params(raw), ZeroCoefficient);
  raw.test_mode = true;
  const SystemParams p = validate_params(raw);
  CHECK(p.decoupled());
  CHECK_FALSE(p.linear());
  raw.lambda = {0.0, 0.0, 0.0};
  CHECK(validate_params(raw).linear());
}

TEST_CASE("find_kappa") {
  const auto k = find_kappa({1.0, 1.0, 2.0});
  REQUIRE(k.has_value());
  CHECK((*k)[0] == doctest::Approx(1.0));
  CHECK((*k)[1] == doctest::Approx(1.0));
  CHECK((*k)[2] == doctest::Approx(1.0));

  CHECK_FALSE(find_kappa({1.0, 1.0, -2.0}).has_value());

  const CplxTriple mu{cplx{0, 1}, cplx{0, -1}, 1.0};
  if (const auto k2 = find_kappa(mu)) {
    const cplx lhs = (*k2)[0] * mu[0] + (*k2)[1] * mu[1];
    const cplx rhs = (*k2)[2] * std::conj(mu[2]);
    CHECK(std::abs(lhs - rhs) <= 1e-10);
    CHECK(std::max({(*k2)[0], (*k2)[1], (*k2)[2]}) == doctest::Approx(1.0));
  }

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int i = 0; i < 200; ++i) {
    const RealTriple kappa{u(rng), u(rng), u(rng)};
    const cplx mu1{u(rng) - 1.0, u(rng) - 1.0};
    const cplx mu2{u(rng) - 1.0, u(rng) - 1.0};
    const cplx mu3 = std::conj((kappa[0] * mu1 + kappa[1] * mu2) / kappa[2]);
    const auto found = find_kappa({mu1, mu2, mu3});
    REQUIRE(found.has_value());
    const cplx res = (*found)[0] * mu1 + (*found)[1] * mu2 - (*found)[2] * std::conj(mu3);
    CHECK(std::abs(res) <= 1e-10);
    CHECK((*found)[0] > 0.0);
    CHECK((*found)[1] > 0.0);
    CHECK((*found)[2] > 0.0);
  }
}

TEST_CASE("eval_F hand values") {
  const SystemParams p = canonical();
  const ComplexTriple zero;
  CHECK(eval_F(zero, p).norm() == 0.0);

  const ComplexTriple one(1.0, 1.0, 1.0);
  const ComplexTriple f = eval_F(one, p);
  CHECK(close(f[0], {1, -1}, 1e-15));
  CHECK(close(f[1], {1, -1}, 1e-15));
  CHECK(close(f[2], {2, -1}, 1e-15));

  const ComplexTriple rotated = gauge_rotate(one, std::numbers::pi, p);
  CHECK(close(rotated[0], -1.0, 1e-15));
  CHECK(close(rotated[1], -1.0, 1e-15));
  CHECK(close(rotated[2], 1.0, 1e-15));

  const ComplexTriple lhs = eval_F(rotated, p);
  const ComplexTriple rhs = gauge_rotate(f, std::numbers::pi, p);
  CHECK(close(lhs[0], {-1, 1}, 1e-15));
  CHECK(close(lhs[1], {-1, 1}, 1e-15));
  CHECK(close(lhs[2], {2, -1}, 1e-15));
  CHECK((lhs - rhs).norm() <= 1e-15);
}

TEST_CASE("gauge_rotate preserves moduli") {
  const SystemParams p = canonical();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> th(-10.0, 10.0);
  const ComplexTriple z = random_triple(rng);
  CHECK((gauge_rotate(z, 0.0, p) - z).norm() == 0.0);
  for (int i = 0; i < 100; ++i) {
    const ComplexTriple w = random_triple(rng, 3.0);
    const ComplexTriple r = gauge_rotate(w, th(rng), p);
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(std::abs(r[j]) - std::abs(w[j])) <= 1e-14);
  }
}

TEST_CASE("dissipation_pairing hand values") {
  const SystemParams p = canonical();
  const DissipationPairing d = dissipation_pairing(ComplexTriple(1.0, 1.0, 1.0), p);
  CHECK(close(d.pairing, {4, -3}, 1e-14));
  CHECK(d.nu == doctest::Approx(std::sqrt(3.0)));

  const DissipationPairing d1 = dissipation_pairing(ComplexTriple(1.0, 0.0, 0.0), p);
  CHECK(close(d1.pairing, {0, -1}, 1e-15));

  const DissipationPairing d0 = dissipation_pairing(ComplexTriple(), p);
  CHECK(d0.pairing == cplx{});
  CHECK(d0.nu == 0.0);
}

TEST_CASE("random invariants over valid parameters") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> th(-20.0, 20.0);
  for (int i = 0; i < 1000; ++i) {
    const SystemParams p = random_params(rng);
    const ComplexTriple z = random_triple(rng, 2.0);
    const double theta = th(rng);
    const double n2 = z.norm() * z.norm();

    const ComplexTriple gap = eval_F(gauge_rotate(z, theta, p), p) - gauge_rotate(eval_F(z, p), theta, p);
    CHECK(gap.norm() <= 1e-12 * (1.0 + n2));

    const double ident = dissipation_pairing(z, p).pairing.imag() - dissipation_closed_form(z, p);
    CHECK(std::abs(ident) <= 1e-12 * (1.0 + n2 * z.norm()));

    const auto& k = p.kappa();
    const double kmin = std::min({k[0], k[1], k[2]});
    const double kmax = std::max({k[0], k[1], k[2]});
    const double nu = nu_A(z, p);
    CHECK(std::sqrt(kmin) * z.norm() <= nu * (1.0 + 1e-15));
    CHECK(nu <= std::sqrt(kmax) * z.norm() * (1.0 + 1e-15));
  }
}

TEST_CASE("Im lambda = 0 makes the pairing real") {
  ParamInputs raw;
  raw.lambda = {1.0, cplx{-2.0, 0.0}, 0.5};
  const SystemParams p = validate_params(raw);
  CHECK_FALSE(p.strict());
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const ComplexTriple z = random_triple(rng, 2.0);
    CHECK(std::abs(dissipation_pairing(z, p).pairing.imag()) <= 1e-13 * (1.0 + std::pow(z.norm(), 3)));
  }
  CHECK_THROWS_AS(dissipation_constants(p), NotStrict);
}

TEST_CASE("dissipation constants closed forms") {
  const DissipationConstants c = dissipation_constants(canonical());
  CHECK(c.c_star_lower == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(c.c_star_upper == doctest::Approx(1.0).epsilon(1e-14));

  ParamInputs raw;
  raw.lambda = {cplx{0, -2}, cplx{0, -2}, cplx{0, -2}};
  raw.mu = {1.0, 1.0, 2.0};
  const DissipationConstants c2 = dissipation_constants(validate_params(raw));
  CHECK(c2.c_star_lower == doctest::Approx(2.0 * c.c_star_lower));
  CHECK(c2.c_star_upper == doctest::Approx(2.0 * c.c_star_upper));
}

// Brute-force check of the sandwich -C^* nu^3 <= Im<F, Az> <= -C_* nu^3 on
// points of the unit nu_A-sphere, including the coordinate axes and diagonals.
TEST_CASE("dissipation sandwich on the unit sphere") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 4; ++trial) {
    SystemParams p = trial == 0 ? canonical() : random_params(rng);
    if (!p.strict()) {
      ParamInputs raw = p.inputs();
      for (auto& l : raw.lambda) l = cplx{l.real(), std::min(l.imag(), -0.05)};
      p = validate_params(raw);
    }
    const DissipationConstants c = dissipation_constants(p);
    double worst = 0.0;
    auto probe = [&](const ComplexTriple& z) {
      const double nu = nu_A(z, p);
      if (nu == 0.0) return;
      const ComplexTriple w = cplx{1.0 / nu} * z;
      const double im = dissipation_pairing(w, p).pairing.imag();
      worst = std::min({worst, -c.c_star_lower - im, im + c.c_star_upper});
    };
    for (int i = 0; i < 100000; ++i) probe(ComplexTriple(cplx{g(rng), g(rng)}, cplx{g(rng), g(rng)}, cplx{g(rng), g(rng)}));
    for (int mask = 1; mask < 8; ++mask) {
      probe(ComplexTriple((mask & 1) ? 1.0 : 0.0, (mask & 2) ? 1.0 : 0.0, (mask & 4) ? 1.0 : 0.0));
    }
    CHECK(worst >= -1e-10);
  }
}

TEST_CASE("ComplexTriple rejects non-finite components") {
  CHECK_THROWS(ComplexTriple(std::nan(""), 0.0, 0.0));
  CHECK_THROWS(ComplexTriple(0.0, cplx{0.0, INFINITY}, 0.0));
}
