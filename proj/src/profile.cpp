#include "qnls/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qnls/errors.hpp"

namespace qnls {

namespace {

constexpr cplx kMinusI{0.0, -1.0};

ComplexTriple rhs(const ComplexTriple& a, const SystemParams& p) { return kMinusI * eval_F(a, p); }

// Growth ratio below which tau nu is considered to have settled.
constexpr double kEnhancedGrowthLimit = 1.5;

}  // namespace

ProfileState profile_step(const ProfileState& state, double dtau, const SystemParams& p) {
  if (!(dtau > 0.0) || !std::isfinite(dtau)) throw InvalidArgument("profile_step: dtau must be > 0");
  const ComplexTriple& a = state.alpha;
  const ComplexTriple k1 = rhs(a, p);
  const ComplexTriple k2 = rhs(a + cplx(0.5 * dtau) * k1, p);
  const ComplexTriple k3 = rhs(a + cplx(0.5 * dtau) * k2, p);
  const ComplexTriple k4 = rhs(a + cplx(dtau) * k3, p);
  const ComplexTriple inc = cplx(dtau / 6.0) * (k1 + cplx(2.0) * k2 + cplx(2.0) * k3 + k4);
  return ProfileState{a + inc, state.tau + dtau};
}

std::vector<ProfileState> integrate_profile(const ProfileState& start, double tau_end, double dtau,
                                            const SystemParams& p, std::size_t record_every) {
  if (!(dtau > 0.0)) throw InvalidArgument("integrate_profile: dtau must be > 0");
  if (!(tau_end >= start.tau)) throw InvalidArgument("integrate_profile: tau_end before start");
  if (record_every == 0) record_every = 1;
  const double span = tau_end - start.tau;
  const auto steps = static_cast<std::size_t>(std::ceil(span / dtau - 1e-9));
  std::vector<ProfileState> out{start};
  ProfileState cur = start;
  for (std::size_t k = 1; k <= steps; ++k) {
    // Step sizes come from the index so rounding does not accumulate in tau.
    const double target = k == steps ? tau_end : start.tau + static_cast<double>(k) * dtau;
    cur = profile_step(cur, target - cur.tau, p);
    cur.tau = target;
    if (k % record_every == 0 || k == steps) out.push_back(cur);
  }
  return out;
}

cplx decoupled_closed_form(cplx alpha1, cplx lambda, double tau) {
  if (!(lambda.imag() < 0.0)) throw NonDissipative("decoupled profile needs Im lambda < 0");
  if (!(tau >= 0.0)) throw InvalidArgument("decoupled_closed_form: tau must be >= 0");
  const double d = 1.0 - std::abs(alpha1) * lambda.imag() * tau;
  const double phase = (lambda.real() / lambda.imag()) * std::log(d);
  return alpha1 / d * std::polar(1.0, phase);
}

ProfileDecayReport profile_decay_metrics(const std::vector<ProfileState>& trajectory,
                                         const SystemParams& p) {
  if (trajectory.size() < 2) throw InsufficientSpan("profile trajectory has fewer than 2 states");
  ProfileDecayReport rep;
  rep.tau0 = trajectory.front().tau;
  rep.tau1 = trajectory.back().tau;
  if (!(rep.tau0 >= 10.0 && rep.tau1 >= 2.0 * rep.tau0)) {
    throw InsufficientSpan("profile trajectory must span [tau0, tau1] with tau1 >= 2 tau0 >= 20");
  }
  const double nu0 = nu_A(trajectory.front().alpha, p);
  rep.max_tau_nu = 0.0;
  rep.min_tau_nu_late = std::numeric_limits<double>::infinity();
  rep.min_tau2_phi = std::numeric_limits<double>::infinity();
  for (const auto& st : trajectory) {
    const double nu = nu_A(st.alpha, p);
    const double tn = st.tau * nu;
    rep.max_tau_nu = std::max(rep.max_tau_nu, tn);
    if (st.tau >= 0.5 * rep.tau1) rep.min_tau_nu_late = std::min(rep.min_tau_nu_late, tn);
    rep.min_tau2_phi = std::min(rep.min_tau2_phi, tn * tn);
    if (nu0 > 0.0) rep.nu_drift_rel = std::max(rep.nu_drift_rel, std::abs(nu / nu0 - 1.0));
  }
  rep.final_tau_nu = rep.tau1 * nu_A(trajectory.back().alpha, p);
  rep.growth_ratio = nu0 > 0.0 ? rep.final_tau_nu / (rep.tau0 * nu0) : 0.0;
  rep.enhanced_decay = nu0 > 0.0 && rep.growth_ratio < kEnhancedGrowthLimit;
  if (p.strict()) {
    const DissipationConstants c = dissipation_constants(p);
    rep.bracket_lower = 1.0 / c.c_star_upper;
    rep.bracket_upper = 1.0 / c.c_star_lower;
  } else {
    rep.bracket_lower = rep.bracket_upper = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

}  // namespace qnls
