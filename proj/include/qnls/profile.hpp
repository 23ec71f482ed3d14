#pragma once

// The reduced profile system i d(alpha)/d(tau) = F(alpha) in logarithmic time
// tau = log t, integrated by RK4, with the exact decoupled solution as oracle.

#include <vector>

#include "qnls/model.hpp"

namespace qnls {

struct ProfileState {
  ComplexTriple alpha;
  double tau = 0.0;
};

/// One classical RK4 step of d(alpha)/d(tau) = -i F(alpha).
ProfileState profile_step(const ProfileState& state, double dtau, const SystemParams& p);

/// Steps from `start` to `tau_end` with step `dtau` (the last step is
/// shortened to land on tau_end). Every `record_every`-th state is kept, plus
/// the first and last.
std::vector<ProfileState> integrate_profile(const ProfileState& start, double tau_end, double dtau,
                                            const SystemParams& p, std::size_t record_every = 1);

/// Exact solution of i a' = lambda |a| a:
///   a(tau) = a0 / D * exp(i (Re lambda / Im lambda) log D),  D = 1 - |a0| Im(lambda) tau.
/// Throws NonDissipative unless Im lambda < 0.
cplx decoupled_closed_form(cplx alpha1, cplx lambda, double tau);

struct ProfileDecayReport {
  double tau0 = 0.0;
  double tau1 = 0.0;
  double max_tau_nu = 0.0;       // over the whole trajectory
  double min_tau_nu_late = 0.0;  // over [tau1/2, tau1]
  double min_tau2_phi = 0.0;     // over the whole trajectory
  double final_tau_nu = 0.0;
  /// [1/C^*, 1/C_*]; NaN when the parameters are not strict.
  double bracket_lower = 0.0;
  double bracket_upper = 0.0;
  /// max |nu(tau) / nu(tau0) - 1|.
  double nu_drift_rel = 0.0;
  /// tau1 nu(tau1) / (tau0 nu(tau0)); about 1 with enhanced decay, tau1/tau0 without.
  double growth_ratio = 0.0;
  bool enhanced_decay = false;
};

/// Decay metrics of a trajectory spanning [tau0, tau1] with tau1 >= 2 tau0 >= 20.
/// Throws InsufficientSpan otherwise.
ProfileDecayReport profile_decay_metrics(const std::vector<ProfileState>& trajectory,
                                         const SystemParams& p);

}  // namespace qnls
