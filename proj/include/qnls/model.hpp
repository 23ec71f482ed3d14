#pragma once

// Coefficients of the three-wave quadratic NLS system, its nonlinearity F,
// the gauge action and the weighted dissipation pairing.

#include <array>
#include <complex>
#include <cstddef>
#include <optional>

namespace qnls {

using cplx = std::complex<double>;
using RealTriple = std::array<double, 3>;
using CplxTriple = std::array<cplx, 3>;

/// Tolerance used for the exact-arithmetic assumption checks.
inline constexpr double kAssumptionTol = 1e-12;

/// A point value z = (z1, z2, z3) of the field. Components are always finite.
class ComplexTriple {
 public:
  ComplexTriple() = default;
  ComplexTriple(cplx z1, cplx z2, cplx z3);
  explicit ComplexTriple(const CplxTriple& z) : ComplexTriple(z[0], z[1], z[2]) {}

  const cplx& z1() const noexcept { return z_[0]; }
  const cplx& z2() const noexcept { return z_[1]; }
  const cplx& z3() const noexcept { return z_[2]; }
  const cplx& operator[](std::size_t j) const noexcept { return z_[j]; }
  const CplxTriple& values() const noexcept { return z_; }

  /// Euclidean norm |z| on C^3.
  double norm() const noexcept;

  friend ComplexTriple operator+(const ComplexTriple& a, const ComplexTriple& b);
  friend ComplexTriple operator-(const ComplexTriple& a, const ComplexTriple& b);
  friend ComplexTriple operator*(cplx c, const ComplexTriple& a);

 private:
  CplxTriple z_{};
};

/// <z, w> = sum_j z_j conj(w_j).
cplx inner(const ComplexTriple& z, const ComplexTriple& w) noexcept;

/// Unvalidated coefficient bundle as read from a config file.
struct ParamInputs {
  RealTriple m{1.0, 1.0, 2.0};
  CplxTriple lambda{cplx{0, -1}, cplx{0, -1}, cplx{0, -1}};
  CplxTriple mu{cplx{1, 0}, cplx{1, 0}, cplx{2, 0}};
  RealTriple kappa{1.0, 1.0, 1.0};
  double s = 1.5;
  double gamma = 0.2;
  // Allows zero lambda/mu so decoupled and linear configurations can run.
  bool test_mode = false;
};

/// Validated coefficients. Only validate_params can build one.
class SystemParams {
 public:
  const RealTriple& m() const noexcept { return m_; }
  const CplxTriple& lambda() const noexcept { return lambda_; }
  const CplxTriple& mu() const noexcept { return mu_; }
  const RealTriple& kappa() const noexcept { return kappa_; }
  /// True iff Im lambda_j < 0 for every j.
  bool strict() const noexcept { return strict_; }
  double s() const noexcept { return s_; }
  double gamma() const noexcept { return gamma_; }
  bool test_mode() const noexcept { return test_mode_; }
  /// True when F vanishes identically (test mode only).
  bool linear() const noexcept;
  /// True when mu = 0 (test mode only).
  bool decoupled() const noexcept;

  ParamInputs inputs() const;

 private:
  friend SystemParams validate_params(const ParamInputs& raw);
  SystemParams() = default;

  RealTriple m_{};
  CplxTriple lambda_{};
  CplxTriple mu_{};
  RealTriple kappa_{};
  bool strict_ = false;
  double s_ = 1.5;
  double gamma_ = 0.2;
  bool test_mode_ = false;
};

/// Checks mass resonance, dissipativity, the mu/kappa relation and the
/// regularity window. Throws the ParameterError subclass naming the failure.
SystemParams validate_params(const ParamInputs& raw);

/// Best-effort search for kappa > 0 with kappa1 mu1 + kappa2 mu2 = kappa3 conj(mu3).
/// The result is normalised so that max kappa_j = 1.
std::optional<RealTriple> find_kappa(const CplxTriple& mu);

/// F(z) exactly as written: lambda_j |z_j| z_j plus the quadratic coupling.
ComplexTriple eval_F(const ComplexTriple& z, const SystemParams& p);

/// E_theta z = (e^{i m_j theta} z_j).
ComplexTriple gauge_rotate(const ComplexTriple& z, double theta, const SystemParams& p);

/// nu_A(z) = sqrt(sum kappa_j |z_j|^2).
double nu_A(const ComplexTriple& z, const SystemParams& p) noexcept;

struct DissipationPairing {
  cplx pairing;  // <F(z), A z>
  double nu;     // nu_A(z)
};

DissipationPairing dissipation_pairing(const ComplexTriple& z, const SystemParams& p);

/// sum_j kappa_j Im(lambda_j) |z_j|^3, the closed form of Im <F(z), Az>.
double dissipation_closed_form(const ComplexTriple& z, const SystemParams& p) noexcept;

struct DissipationConstants {
  double c_star_lower;  // C_*
  double c_star_upper;  // C^*
  double kappa_min;
  double kappa_max;
};

/// Separable closed forms
///   C_* = min_j(-Im lambda_j) / sqrt(kappa1 + kappa2 + kappa3)
///   C^* = max_j(-Im lambda_j) / sqrt(min_j kappa_j)
/// valid (not necessarily tight) for -C^* nu^3 <= Im<F,Az> <= -C_* nu^3.
/// Throws NotStrict unless every Im lambda_j < 0.
DissipationConstants dissipation_constants(const SystemParams& p);

}  // namespace qnls
