#pragma once

// The identity suite: gauge equivariance, the dissipation identity, the
// factorization of the free propagator and the |x|^s commutation identity.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "qnls/config.hpp"
#include "qnls/grid.hpp"
#include "qnls/model.hpp"

namespace qnls {

struct CheckResult {
  std::string name;
  std::string claim;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  nlohmann::json detail = nlohmann::json::object();
};

nlohmann::json to_json(const CheckResult& c);

/// Random coefficients satisfying every structural assumption: masses of
/// either sign with m3 = m1 + m2, Im lambda <= 0, and mu3 chosen to satisfy
/// the kappa relation for random kappa.
SystemParams random_params(std::mt19937_64& rng);
ComplexTriple random_triple(std::mt19937_64& rng, double scale = 1.0);

/// max ||F(E z) - E F(z)|| / (1 + |z|^2) over random (z, theta, params).
CheckResult check_gauge(int samples, std::uint64_t seed, double tolerance);
/// max |Im<F(z), Az> - sum kappa_j Im lambda_j |z_j|^3| / (1 + |z|^3).
CheckResult check_dissipation(int samples, std::uint64_t seed, double tolerance);

/// Relative sup error between U(t) phi and M(t) D(t) G M(t) phi over the
/// configured times, for Gaussian phi.
CheckResult check_factorization(const FactorizationSpec& spec, const SystemParams& p);

/// Relative L2 error between U(t)|x|^s U(-t) phi and
/// M(t) (|t|/|m|)^s (-Delta)^{s/2} M(-t) phi for a moving Gaussian packet.
CheckResult check_commutation(const CommutationSpec& spec, const SystemParams& p);

/// The four checks above, in that order.
std::vector<CheckResult> run_identities(const IdentitySpec& spec, const SystemParams& p,
                                        std::uint64_t seed);

}  // namespace qnls
