#pragma once

// Measured quantities tying a simulation to the decay estimates: the
// conservation ledger, sup-norm decay metrics, the X_T-norm ingredients, the
// residual r(t, xi) of the profile equation, Phi(t) and decay-rate fits.

#include <string>
#include <utility>
#include <vector>

#include "qnls/grid.hpp"
#include "qnls/model.hpp"

namespace qnls {

/// One diagnostics row. Quantities built from alpha (phi, r) need t >= 1 and
/// are NaN before that.
struct DiagnosticRecord {
  double t = 0.0;
  double sup_u = 0.0;        // grid max of |u|_{C^3}
  double sup_u_t = 0.0;      // (1+t) sup|u|
  double sup_u_tlogt = 0.0;  // (1+t) log(2+t) sup|u|
  double ledger = 0.0;
  double ledger_drift_rel = 0.0;
  double phi = 0.0;  // max over grid xi of nu_A(alpha)^2
  double logt_sqrtphi = 0.0;
  double logt2_phi = 0.0;
  double r_sup = 0.0;
  double xnorm_ms0 = 0.0;  // (1+t)^{-gamma/3} ||u||_{H^{s,0}}
  double xnorm_m0s = 0.0;  // (1+t)^{-gamma/3} ||U(-t)u||_{H^{0,s}}
  double cubic_integral = 0.0;
  double weighted_mass = 0.0;
  double boundary_density = 0.0;
  double outer_mass_fraction = 0.0;
};

struct DiagnosticsSeries {
  std::vector<DiagnosticRecord> rows;

  std::vector<double> column(double DiagnosticRecord::*field) const;
  std::vector<double> times() const { return column(&DiagnosticRecord::t); }
};

/// sum_j kappa_j ||u_j||_{L2}^2.
double weighted_mass(const FieldState& state, const SystemParams& p);

/// 2 sum_j kappa_j Im(lambda_j) ||u_j||_{L3}^3, the instantaneous rate of
/// change of weighted_mass.
double cubic_rate(const FieldState& state, const SystemParams& p);

/// Trapezoid accumulation of cubic_rate over the diagnostics cadence.
class CubicIntegral {
 public:
  void add(double t, double rate);
  double value() const noexcept { return value_; }

 private:
  bool started_ = false;
  double last_t_ = 0.0;
  double last_rate_ = 0.0;
  double value_ = 0.0;
};

/// sum_j kappa_j ||u_j(t)||^2 - accumulated_cubic; constant in the continuum.
double ledger(const FieldState& state, double accumulated_cubic, const SystemParams& p);

struct SupNormMetrics {
  double sup = 0.0;
  double sup_t = 0.0;
  double sup_tlogt = 0.0;
  double xnorm_ms0 = 0.0;
  double xnorm_m0s = 0.0;
  /// (1+t) sup|u| + xnorm_ms0 + xnorm_m0s, the X_T time slice.
  double xt_slice = 0.0;
};

SupNormMetrics sup_norm_metrics(const FieldState& state, const SystemParams& p);

struct Residual {
  Components field;  // frequency grid
  double sup = 0.0;  // grid max of |r|_{C^3}
};

/// r = G U(-t) F(u) - F(alpha)/t. Requires t >= 1.
Residual residual_r(const FieldState& state, const SystemParams& p);

struct PhiSample {
  double t = 0.0;
  double phi = 0.0;
  double logt_sqrtphi = 0.0;
  double logt2_phi = 0.0;
};

PhiSample phi_at(const FieldState& state, const SystemParams& p);
std::vector<PhiSample> phi_series(const std::vector<FieldState>& states, const SystemParams& p);

/// Pointwise nu_A over a frequency-grid triple of arrays.
std::vector<double> nu_A_grid(const Components& alpha, const SystemParams& p);

/// max over the edge row/column of |u|_{C^3}^2 (the periodic seam).
double boundary_density(const FieldState& state);
/// Share of L2 mass outside |x|_inf > L/4.
double outer_mass_fraction(const FieldState& state);

/// Full diagnostics row for a state.
DiagnosticRecord diagnose_state(const FieldState& state, double accumulated_cubic,
                                double initial_ledger, const SystemParams& p);

/// max over t2 in [t0, t1] of f(t2) / min_{t0 <= t1' <= t2} f(t1') - 1; zero
/// when f never rises above its running minimum.
double monotone_excess(const std::vector<double>& t, const std::vector<double>& f, double t0,
                       double t1);

/// max/min of t^{1 + gamma/3} r_sup over rows with t in [t0, t1]. Returns 1
/// when r vanishes identically and NaN with fewer than two rows.
double residual_band_ratio(const DiagnosticsSeries& series, double t0, double t1, double gamma);

struct FitReport {
  double a = 0.0;  // power of (1+t)
  double b = 0.0;  // power of log(2+t)
  double c = 0.0;
  double residual = 0.0;  // rms of the free fit
  double residual_plain = 0.0;  // rms with (a, b) = (1, 0), c fitted
  double residual_log = 0.0;    // rms with (a, b) = (1, 1), c fitted
  std::size_t samples = 0;
  std::string favored;  // "t^-1" or "(t log t)^-1"
};

/// Least squares log y = -a log(1+t) - b log log(2+t) + c on [t0, t1].
/// Requires t1 >= 2 t0 >= 4 and at least 20 samples in the window.
FitReport fit_decay_rate(const std::vector<double>& t, const std::vector<double>& y,
                         std::pair<double, double> window);
FitReport fit_decay_rate(const DiagnosticsSeries& series, std::pair<double, double> window);

}  // namespace qnls
