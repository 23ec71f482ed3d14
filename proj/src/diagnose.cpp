#include "qnls/diagnose.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "qnls/errors.hpp"
#include "qnls/spectral.hpp"

namespace qnls {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double l3_cubed(const ComplexGrid& f, const Grid2D& grid) {
  double acc = 0.0;
  for (const cplx& v : f) {
    const double a = std::abs(v);
    acc += a * a * a;
  }
  return acc * grid.dx() * grid.dx();
}

double sup_nu_A(const Components& alpha, const SystemParams& p) {
  const std::vector<double> nu = nu_A_grid(alpha, p);
  return nu.empty() ? 0.0 : *std::max_element(nu.begin(), nu.end());
}

}  // namespace

std::vector<double> DiagnosticsSeries::column(double DiagnosticRecord::*field) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.*field);
  return out;
}

double weighted_mass(const FieldState& state, const SystemParams& p) {
  double acc = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double n = l2_norm(state.u[j], state.grid);
    acc += p.kappa()[j] * n * n;
  }
  return acc;
}

double cubic_rate(const FieldState& state, const SystemParams& p) {
  double acc = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double im = p.lambda()[j].imag();
    if (im == 0.0) continue;
    acc += p.kappa()[j] * im * l3_cubed(state.u[j], state.grid);
  }
  return 2.0 * acc;
}

void CubicIntegral::add(double t, double rate) {
  if (started_) {
    if (t < last_t_) throw InvalidArgument("CubicIntegral: times must be non-decreasing");
    value_ += 0.5 * (t - last_t_) * (rate + last_rate_);
  }
  started_ = true;
  last_t_ = t;
  last_rate_ = rate;
}

double ledger(const FieldState& state, double accumulated_cubic, const SystemParams& p) {
  return weighted_mass(state, p) - accumulated_cubic;
}

SupNormMetrics sup_norm_metrics(const FieldState& state, const SystemParams& p) {
  SupNormMetrics m;
  const double t = state.t;
  m.sup = sup_norm(state.u);
  m.sup_t = (1.0 + t) * m.sup;
  m.sup_tlogt = (1.0 + t) * std::log(2.0 + t) * m.sup;
  const double damp = std::pow(1.0 + t, -p.gamma() / 3.0);
  m.xnorm_ms0 = damp * weighted_norm(state.u, state.grid, WeightedSpace::Hs0, p.s());
  const FieldState back = free_propagate(state, -t, p);
  m.xnorm_m0s = damp * weighted_norm(back.u, state.grid, WeightedSpace::H0s, p.s());
  m.xt_slice = m.sup_t + m.xnorm_ms0 + m.xnorm_m0s;
  return m;
}

std::vector<double> nu_A_grid(const Components& alpha, const SystemParams& p) {
  const std::size_t size = alpha[0].size();
  std::vector<double> out(size);
  const auto& k = p.kappa();
  for (std::size_t idx = 0; idx < size; ++idx) {
    out[idx] = std::sqrt(k[0] * std::norm(alpha[0][idx]) + k[1] * std::norm(alpha[1][idx]) +
                         k[2] * std::norm(alpha[2][idx]));
  }
  return out;
}

namespace {

Residual residual_given_alpha(const FieldState& state, const Components& alpha,
                              const SystemParams& p) {
  const double t = state.t;
  FieldState nonlinear{state.grid, apply_F(state.u, p), t};
  const FieldState back = free_propagate(nonlinear, -t, p);
  Components r = apply_G(back.u, state.grid, Direction::forward, p, kDiagnosticLossTol);
  const Components f_alpha = apply_F(alpha, p);
  for (int j = 0; j < 3; ++j) {
    for (std::size_t idx = 0; idx < r[j].size(); ++idx) r[j][idx] -= f_alpha[j][idx] / t;
  }
  const double sup = sup_norm(r);
  return Residual{std::move(r), sup};
}

PhiSample phi_given_alpha(double t, const Components& alpha, const SystemParams& p) {
  const double nu = sup_nu_A(alpha, p);
  const double lt = std::log(t);
  return PhiSample{t, nu * nu, lt * nu, lt * lt * nu * nu};
}

}  // namespace

Residual residual_r(const FieldState& state, const SystemParams& p) {
  if (!(state.t >= 1.0)) throw InvalidArgument("residual_r requires t >= 1");
  return residual_given_alpha(state, compute_alpha(state, p, kDiagnosticLossTol), p);
}

PhiSample phi_at(const FieldState& state, const SystemParams& p) {
  if (!(state.t >= 1.0)) throw InvalidArgument("phi_at requires t >= 1");
  return phi_given_alpha(state.t, compute_alpha(state, p, kDiagnosticLossTol), p);
}

std::vector<PhiSample> phi_series(const std::vector<FieldState>& states, const SystemParams& p) {
  std::vector<PhiSample> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(phi_at(s, p));
  return out;
}

double boundary_density(const FieldState& state) {
  const std::size_t n = state.grid.n();
  double best = 0.0;
  auto density = [&](std::size_t i, std::size_t j) {
    return std::norm(state.u[0](i, j)) + std::norm(state.u[1](i, j)) + std::norm(state.u[2](i, j));
  };
  for (std::size_t k = 0; k < n; ++k) best = std::max({best, density(0, k), density(k, 0)});
  return best;
}

double outer_mass_fraction(const FieldState& state) {
  const std::size_t n = state.grid.n();
  const double r = 0.25 * state.grid.box_length();
  double total = 0.0;
  double outer = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool out_i = std::abs(state.grid.x(i)) > r;
    for (std::size_t j = 0; j < n; ++j) {
      const double w = std::norm(state.u[0](i, j)) + std::norm(state.u[1](i, j)) +
                       std::norm(state.u[2](i, j));
      total += w;
      if (out_i || std::abs(state.grid.x(j)) > r) outer += w;
    }
  }
  return total > 0.0 ? outer / total : 0.0;
}

DiagnosticRecord diagnose_state(const FieldState& state, double accumulated_cubic,
                                double initial_ledger, const SystemParams& p) {
  DiagnosticRecord row;
  row.t = state.t;
  const SupNormMetrics m = sup_norm_metrics(state, p);
  row.sup_u = m.sup;
  row.sup_u_t = m.sup_t;
  row.sup_u_tlogt = m.sup_tlogt;
  row.xnorm_ms0 = m.xnorm_ms0;
  row.xnorm_m0s = m.xnorm_m0s;
  row.weighted_mass = weighted_mass(state, p);
  row.cubic_integral = accumulated_cubic;
  row.ledger = row.weighted_mass - accumulated_cubic;
  const double diff = std::abs(row.ledger - initial_ledger);
  row.ledger_drift_rel = initial_ledger != 0.0 ? diff / std::abs(initial_ledger) : diff;
  row.boundary_density = boundary_density(state);
  row.outer_mass_fraction = outer_mass_fraction(state);
  row.phi = row.logt_sqrtphi = row.logt2_phi = row.r_sup = kNaN;
  if (state.t >= 1.0) {
    // Left NaN once G can no longer resolve U(-t) u, or U(-t) F(u) for r.
    std::optional<Components> alpha;
    try {
      alpha = compute_alpha(state, p, kDiagnosticLossTol);
    } catch (const ScalingOutOfRange&) {
    }
    if (alpha) {
      const PhiSample phi = phi_given_alpha(state.t, *alpha, p);
      row.phi = phi.phi;
      row.logt_sqrtphi = phi.logt_sqrtphi;
      row.logt2_phi = phi.logt2_phi;
      try {
        row.r_sup = residual_given_alpha(state, *alpha, p).sup;
      } catch (const ScalingOutOfRange&) {
      }
    }
  }
  return row;
}

double monotone_excess(const std::vector<double>& t, const std::vector<double>& f, double t0,
                       double t1) {
  double running = std::numeric_limits<double>::infinity();
  double excess = 0.0;
  for (std::size_t i = 0; i < t.size() && i < f.size(); ++i) {
    if (t[i] < t0 || t[i] > t1) continue;
    running = std::min(running, f[i]);
    if (running > 0.0) excess = std::max(excess, f[i] / running - 1.0);
  }
  return excess;
}

double residual_band_ratio(const DiagnosticsSeries& series, double t0, double t1, double gamma) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  std::size_t count = 0;
  for (const auto& r : series.rows) {
    if (r.t < t0 || r.t > t1 || !std::isfinite(r.r_sup)) continue;
    const double v = std::pow(r.t, 1.0 + gamma / 3.0) * r.r_sup;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    ++count;
  }
  if (count < 2) return kNaN;
  if (hi == 0.0) return 1.0;
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

FitReport fit_decay_rate(const std::vector<double>& t, const std::vector<double>& y,
                         std::pair<double, double> window) {
  if (t.size() != y.size()) throw InvalidArgument("fit_decay_rate: t and y differ in length");
  const auto [t0, t1] = window;
  if (!(t0 >= 2.0 && t1 >= 2.0 * t0)) {
    throw InsufficientSamples("fit_decay_rate: window must satisfy t1 >= 2 t0 >= 4");
  }
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= t0 && t[i] <= t1 && y[i] > 0.0 && std::isfinite(y[i])) keep.push_back(i);
  }
  if (keep.size() < 20) {
    throw InsufficientSamples("fit_decay_rate: " + std::to_string(keep.size()) +
                              " usable samples in window, need 20");
  }
  const auto rows = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd a(rows, 3);
  Eigen::VectorXd rhs(rows);
  Eigen::VectorXd lt(rows), llt(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double ti = t[keep[static_cast<std::size_t>(r)]];
    lt(r) = std::log(1.0 + ti);
    llt(r) = std::log(std::log(2.0 + ti));
    a(r, 0) = -lt(r);
    a(r, 1) = -llt(r);
    a(r, 2) = 1.0;
    rhs(r) = std::log(y[keep[static_cast<std::size_t>(r)]]);
  }
  const Eigen::Vector3d coef = a.colPivHouseholderQr().solve(rhs);

  auto rms = [rows](const Eigen::VectorXd& v) { return std::sqrt(v.squaredNorm() / rows); };
  // With (a, b) pinned only the intercept is fitted: it is the mean offset.
  auto pinned = [&](double pa, double pb) {
    const Eigen::VectorXd base = rhs + pa * lt + pb * llt;
    const double c = base.mean();
    return rms((base.array() - c).matrix());
  };

  FitReport rep;
  rep.a = coef(0);
  rep.b = coef(1);
  rep.c = coef(2);
  rep.residual = rms(a * coef - rhs);
  rep.residual_plain = pinned(1.0, 0.0);
  rep.residual_log = pinned(1.0, 1.0);
  rep.samples = keep.size();
  rep.favored = rep.residual_log < rep.residual_plain ? "(t log t)^-1" : "t^-1";
  return rep;
}

FitReport fit_decay_rate(const DiagnosticsSeries& series, std::pair<double, double> window) {
  return fit_decay_rate(series.times(), series.column(&DiagnosticRecord::sup_u), window);
}

}  // namespace qnls
