#include "qnls/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "qnls/errors.hpp"

namespace qnls {

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

std::string fmt(cplx z) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i)";
  return os.str();
}

}  // namespace

ComplexTriple::ComplexTriple(cplx z1, cplx z2, cplx z3) : z_{z1, z2, z3} {
  if (!finite(z1) || !finite(z2) || !finite(z3)) {
    throw NonFinite("ComplexTriple: non-finite component");
  }
}

double ComplexTriple::norm() const noexcept {
  return std::sqrt(std::norm(z_[0]) + std::norm(z_[1]) + std::norm(z_[2]));
}

ComplexTriple operator+(const ComplexTriple& a, const ComplexTriple& b) {
  return {a.z_[0] + b.z_[0], a.z_[1] + b.z_[1], a.z_[2] + b.z_[2]};
}

ComplexTriple operator-(const ComplexTriple& a, const ComplexTriple& b) {
  return {a.z_[0] - b.z_[0], a.z_[1] - b.z_[1], a.z_[2] - b.z_[2]};
}

ComplexTriple operator*(cplx c, const ComplexTriple& a) {
  return {c * a.z_[0], c * a.z_[1], c * a.z_[2]};
}

cplx inner(const ComplexTriple& z, const ComplexTriple& w) noexcept {
  return z[0] * std::conj(w[0]) + z[1] * std::conj(w[1]) + z[2] * std::conj(w[2]);
}

bool SystemParams::linear() const noexcept {
  for (int j = 0; j < 3; ++j) {
    if (lambda_[j] != cplx{} || mu_[j] != cplx{}) return false;
  }
  return true;
}

bool SystemParams::decoupled() const noexcept {
  return mu_[0] == cplx{} && mu_[1] == cplx{} && mu_[2] == cplx{};
}

ParamInputs SystemParams::inputs() const {
  ParamInputs in;
  in.m = m_;
  in.lambda = lambda_;
  in.mu = mu_;
  in.kappa = kappa_;
  in.s = s_;
  in.gamma = gamma_;
  in.test_mode = test_mode_;
  return in;
}

SystemParams validate_params(const ParamInputs& raw) {
  for (int j = 0; j < 3; ++j) {
    if (!std::isfinite(raw.m[j]) || !finite(raw.lambda[j]) || !finite(raw.mu[j]) ||
        !std::isfinite(raw.kappa[j])) {
      throw NonFinite("coefficients must be finite");
    }
  }
  if (!std::isfinite(raw.s) || !std::isfinite(raw.gamma)) {
    throw NonFinite("s and gamma must be finite");
  }

  for (int j = 0; j < 3; ++j) {
    if (raw.m[j] == 0.0) {
      throw ZeroCoefficient("mass m" + std::to_string(j + 1) + " must be nonzero");
    }
  }
  const double mscale = 1.0 + std::max({std::abs(raw.m[0]), std::abs(raw.m[1]), std::abs(raw.m[2])});
  if (std::abs(raw.m[0] + raw.m[1] - raw.m[2]) > kAssumptionTol * mscale) {
    std::ostringstream os;
    os.precision(17);
    os << "mass resonance m1 + m2 = m3 violated: " << raw.m[0] << " + " << raw.m[1]
       << " != " << raw.m[2];
    throw MassResonanceViolated(os.str());
  }

  if (!raw.test_mode) {
    for (int j = 0; j < 3; ++j) {
      if (raw.lambda[j] == cplx{} || raw.mu[j] == cplx{}) {
        throw ZeroCoefficient("lambda and mu must be nonzero outside test mode (component " +
                              std::to_string(j + 1) + ")");
      }
    }
  }

  for (int j = 0; j < 3; ++j) {
    if (raw.lambda[j].imag() > 0.0) {
      throw DissipativityViolated("dissipativity Im lambda_j <= 0 violated: lambda" +
                                  std::to_string(j + 1) + " = " + fmt(raw.lambda[j]));
    }
  }

  for (int j = 0; j < 3; ++j) {
    if (!(raw.kappa[j] > 0.0)) {
      throw MuKappaMismatch("kappa" + std::to_string(j + 1) + " must be positive");
    }
  }
  const cplx lhs = raw.kappa[0] * raw.mu[0] + raw.kappa[1] * raw.mu[1];
  const cplx rhs = raw.kappa[2] * std::conj(raw.mu[2]);
  double muscale = 1.0;
  for (int j = 0; j < 3; ++j) muscale = std::max(muscale, raw.kappa[j] * std::abs(raw.mu[j]));
  if (std::abs(lhs - rhs) > kAssumptionTol * muscale) {
    throw MuKappaMismatch("kappa1 mu1 + kappa2 mu2 = kappa3 conj(mu3) violated: " + fmt(lhs) +
                          " != " + fmt(rhs));
  }

  if (!(raw.s > 1.0 && raw.s < 2.0)) {
    throw RegularityRangeError("regularity exponent s must satisfy 1 < s < 2");
  }
  if (!(raw.gamma > 0.0 && raw.gamma < (raw.s - 1.0) / 2.0 && 1.0 + 2.0 * raw.gamma < raw.s)) {
    throw RegularityRangeError("rate exponent gamma must satisfy 0 < gamma < (s - 1)/2");
  }

  SystemParams p;
  p.m_ = raw.m;
  p.lambda_ = raw.lambda;
  p.mu_ = raw.mu;
  p.kappa_ = raw.kappa;
  p.s_ = raw.s;
  p.gamma_ = raw.gamma;
  p.test_mode_ = raw.test_mode;
  p.strict_ = std::all_of(raw.lambda.begin(), raw.lambda.end(),
                          [](cplx l) { return l.imag() < 0.0; });
  return p;
}

std::optional<RealTriple> find_kappa(const CplxTriple& mu) {
  for (const auto& v : mu) {
    if (!finite(v)) return std::nullopt;
  }
  // kappa1 mu1 + kappa2 mu2 - kappa3 conj(mu3) = 0 as two real rows.
  const RealTriple re{mu[0].real(), mu[1].real(), -mu[2].real()};
  const RealTriple im{mu[0].imag(), mu[1].imag(), mu[2].imag()};

  double scale = 0.0;
  for (int j = 0; j < 3; ++j) scale = std::max({scale, std::abs(re[j]), std::abs(im[j])});
  if (scale == 0.0) return RealTriple{1.0, 1.0, 1.0};

  const RealTriple cross{re[1] * im[2] - re[2] * im[1], re[2] * im[0] - re[0] * im[2],
                         re[0] * im[1] - re[1] * im[0]};
  const double cross_norm = std::sqrt(cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]);

  RealTriple kappa{};
  if (cross_norm > 1e-12 * scale * scale) {
    // Rank 2: one-dimensional null space.
    const double sign = cross[0] + cross[1] + cross[2] >= 0.0 ? 1.0 : -1.0;
    for (int j = 0; j < 3; ++j) {
      kappa[j] = sign * cross[j] / cross_norm;
      if (!(kappa[j] > 1e-12)) return std::nullopt;
    }
  } else {
    // Rank 1: the constraint is a single row a . kappa = 0.
    const RealTriple& a =
        std::max({std::abs(re[0]), std::abs(re[1]), std::abs(re[2])}) >=
                std::max({std::abs(im[0]), std::abs(im[1]), std::abs(im[2])})
            ? re
            : im;
    int npos = 0;
    int nneg = 0;
    for (double v : a) {
      if (v > 1e-12 * scale) ++npos;
      if (v < -1e-12 * scale) ++nneg;
    }
    if (npos == 0 || nneg == 0) {
      if (npos + nneg > 0) return std::nullopt;
    }
    for (int j = 0; j < 3; ++j) {
      if (a[j] > 1e-12 * scale) {
        kappa[j] = 1.0 / (npos * a[j]);
      } else if (a[j] < -1e-12 * scale) {
        kappa[j] = 1.0 / (nneg * -a[j]);
      } else {
        kappa[j] = 1.0;
      }
    }
  }

  const double kmax = std::max({kappa[0], kappa[1], kappa[2]});
  for (double& k : kappa) k /= kmax;

  const cplx residual = kappa[0] * mu[0] + kappa[1] * mu[1] - kappa[2] * std::conj(mu[2]);
  const double muscale = std::max({std::abs(mu[0]), std::abs(mu[1]), std::abs(mu[2])});
  if (std::abs(residual) > 1e-10 * muscale) return std::nullopt;
  return kappa;
}

ComplexTriple eval_F(const ComplexTriple& z, const SystemParams& p) {
  const auto& l = p.lambda();
  const auto& mu = p.mu();
  return {l[0] * std::abs(z[0]) * z[0] + mu[0] * std::conj(z[1]) * z[2],
          l[1] * std::abs(z[1]) * z[1] + mu[1] * std::conj(z[0]) * z[2],
          l[2] * std::abs(z[2]) * z[2] + mu[2] * z[0] * z[1]};
}

ComplexTriple gauge_rotate(const ComplexTriple& z, double theta, const SystemParams& p) {
  const auto& m = p.m();
  return {std::polar(1.0, m[0] * theta) * z[0], std::polar(1.0, m[1] * theta) * z[1],
          std::polar(1.0, m[2] * theta) * z[2]};
}

double nu_A(const ComplexTriple& z, const SystemParams& p) noexcept {
  const auto& k = p.kappa();
  return std::sqrt(k[0] * std::norm(z[0]) + k[1] * std::norm(z[1]) + k[2] * std::norm(z[2]));
}

DissipationPairing dissipation_pairing(const ComplexTriple& z, const SystemParams& p) {
  const ComplexTriple f = eval_F(z, p);
  const auto& k = p.kappa();
  cplx pairing{};
  for (int j = 0; j < 3; ++j) pairing += f[j] * k[j] * std::conj(z[j]);
  return {pairing, nu_A(z, p)};
}

double dissipation_closed_form(const ComplexTriple& z, const SystemParams& p) noexcept {
  double acc = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double a = std::abs(z[j]);
    acc += p.kappa()[j] * p.lambda()[j].imag() * a * a * a;
  }
  return acc;
}

DissipationConstants dissipation_constants(const SystemParams& p) {
  if (!p.strict()) {
    throw NotStrict("dissipation constants need Im lambda_j < 0 for all j");
  }
  const auto& k = p.kappa();
  const auto& l = p.lambda();
  const double dmin = std::min({-l[0].imag(), -l[1].imag(), -l[2].imag()});
  const double dmax = std::max({-l[0].imag(), -l[1].imag(), -l[2].imag()});
  const double kmin = std::min({k[0], k[1], k[2]});
  const double kmax = std::max({k[0], k[1], k[2]});
  return {dmin / std::sqrt(k[0] + k[1] + k[2]), dmax / std::sqrt(kmin), kmin, kmax};
}

}  // namespace qnls
