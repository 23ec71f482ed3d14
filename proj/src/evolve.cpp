#include "qnls/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qnls/errors.hpp"
#include "qnls/fft.hpp"
#include "qnls/spectral.hpp"

namespace qnls {

namespace {

// Coefficients unpacked into plain doubles for the pointwise kernel.
struct Coeffs {
  double lr[3], li[3], mr[3], mi[3];

  explicit Coeffs(const SystemParams& p) {
    for (int j = 0; j < 3; ++j) {
      lr[j] = p.lambda()[j].real();
      li[j] = p.lambda()[j].imag();
      mr[j] = p.mu()[j].real();
      mi[j] = p.mu()[j].imag();
    }
  }
};

// out = -i F(z), z and out stored as (re1, im1, re2, im2, re3, im3).
inline void rhs(const Coeffs& c, const double* z, double* out) {
  const double a1 = std::sqrt(z[0] * z[0] + z[1] * z[1]);
  const double a2 = std::sqrt(z[2] * z[2] + z[3] * z[3]);
  const double a3 = std::sqrt(z[4] * z[4] + z[5] * z[5]);

  // conj(z2) z3, conj(z1) z3, z1 z2
  const double w1r = z[2] * z[4] + z[3] * z[5];
  const double w1i = z[2] * z[5] - z[3] * z[4];
  const double w2r = z[0] * z[4] + z[1] * z[5];
  const double w2i = z[0] * z[5] - z[1] * z[4];
  const double w3r = z[0] * z[2] - z[1] * z[3];
  const double w3i = z[0] * z[3] + z[1] * z[2];

  const double f1r = a1 * (c.lr[0] * z[0] - c.li[0] * z[1]) + c.mr[0] * w1r - c.mi[0] * w1i;
  const double f1i = a1 * (c.lr[0] * z[1] + c.li[0] * z[0]) + c.mr[0] * w1i + c.mi[0] * w1r;
  const double f2r = a2 * (c.lr[1] * z[2] - c.li[1] * z[3]) + c.mr[1] * w2r - c.mi[1] * w2i;
  const double f2i = a2 * (c.lr[1] * z[3] + c.li[1] * z[2]) + c.mr[1] * w2i + c.mi[1] * w2r;
  const double f3r = a3 * (c.lr[2] * z[4] - c.li[2] * z[5]) + c.mr[2] * w3r - c.mi[2] * w3i;
  const double f3i = a3 * (c.lr[2] * z[5] + c.li[2] * z[4]) + c.mr[2] * w3i + c.mi[2] * w3r;

  out[0] = f1i;
  out[1] = -f1r;
  out[2] = f2i;
  out[3] = -f2r;
  out[4] = f3i;
  out[5] = -f3r;
}

inline void rk4(const Coeffs& c, double* z, double h, int substeps) {
  double k1[6], k2[6], k3[6], k4[6], tmp[6];
  for (int s = 0; s < substeps; ++s) {
    rhs(c, z, k1);
    for (int q = 0; q < 6; ++q) tmp[q] = z[q] + 0.5 * h * k1[q];
    rhs(c, tmp, k2);
    for (int q = 0; q < 6; ++q) tmp[q] = z[q] + 0.5 * h * k2[q];
    rhs(c, tmp, k3);
    for (int q = 0; q < 6; ++q) tmp[q] = z[q] + h * k3[q];
    rhs(c, tmp, k4);
    for (int q = 0; q < 6; ++q) z[q] += (h / 6.0) * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
  }
}

constexpr double kNegligible = 1e-30;
constexpr int kBlock = 16;

// Structure-of-arrays RK4 over kBlock points so the inner loops vectorise.
// z[q][b] holds real coordinate q of point b.
struct Block {
  double v[6][kBlock];
};

inline void rhs_block(const Coeffs& c, const Block& z, Block& out) {
  for (int b = 0; b < kBlock; ++b) {
    double zz[6];
    double o[6];
    for (int q = 0; q < 6; ++q) zz[q] = z.v[q][b];
    rhs(c, zz, o);
    for (int q = 0; q < 6; ++q) out.v[q][b] = o[q];
  }
}

inline void rk4_block(const Coeffs& c, Block& z, double h, int substeps) {
  Block k1, k2, k3, k4, tmp;
  for (int s = 0; s < substeps; ++s) {
    rhs_block(c, z, k1);
    for (int q = 0; q < 6; ++q)
      for (int b = 0; b < kBlock; ++b) tmp.v[q][b] = z.v[q][b] + 0.5 * h * k1.v[q][b];
    rhs_block(c, tmp, k2);
    for (int q = 0; q < 6; ++q)
      for (int b = 0; b < kBlock; ++b) tmp.v[q][b] = z.v[q][b] + 0.5 * h * k2.v[q][b];
    rhs_block(c, tmp, k3);
    for (int q = 0; q < 6; ++q)
      for (int b = 0; b < kBlock; ++b) tmp.v[q][b] = z.v[q][b] + h * k3.v[q][b];
    rhs_block(c, tmp, k4);
    for (int q = 0; q < 6; ++q)
      for (int b = 0; b < kBlock; ++b)
        z.v[q][b] += (h / 6.0) * (k1.v[q][b] + 2.0 * k2.v[q][b] + 2.0 * k3.v[q][b] + k4.v[q][b]);
  }
}

}  // namespace

int nonlinear_substeps(double dt) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw InvalidArgument("nonlinear_flow: dt must be >= 0");
  const double count = std::ceil(dt / kMaxNonlinearSubstep - 1e-9);
  return std::max(1, static_cast<int>(count));
}

ComplexTriple nonlinear_flow(const ComplexTriple& z, double dt, const SystemParams& p) {
  const int substeps = nonlinear_substeps(dt);
  if (dt == 0.0) return z;
  const Coeffs c(p);
  double buf[6] = {z[0].real(), z[0].imag(), z[1].real(), z[1].imag(), z[2].real(), z[2].imag()};
  rk4(c, buf, dt / substeps, substeps);
  return ComplexTriple({buf[0], buf[1]}, {buf[2], buf[3]}, {buf[4], buf[5]});
}

void nonlinear_flow_inplace(Components& u, double dt, const SystemParams& p) {
  const int substeps = nonlinear_substeps(dt);
  if (dt == 0.0 || p.linear()) return;
  const Coeffs c(p);
  const double h = dt / substeps;
  const auto size = static_cast<long>(u[0].size());
  double* comp[3] = {reinterpret_cast<double*>(u[0].data()), reinterpret_cast<double*>(u[1].data()),
                     reinterpret_cast<double*>(u[2].data())};
  const long blocks = (size + kBlock - 1) / kBlock;
#ifdef QNLS_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long blk = 0; blk < blocks; ++blk) {
    const long first = blk * kBlock;
    const int count = static_cast<int>(std::min<long>(kBlock, size - first));
    Block z{};
    double peak = 0.0;
    for (int b = 0; b < count; ++b) {
      for (int j = 0; j < 3; ++j) {
        z.v[2 * j][b] = comp[j][2 * (first + b)];
        z.v[2 * j + 1][b] = comp[j][2 * (first + b) + 1];
        peak = std::max({peak, std::abs(z.v[2 * j][b]), std::abs(z.v[2 * j + 1][b])});
      }
    }
    if (peak < kNegligible) continue;
    rk4_block(c, z, h, substeps);
    for (int b = 0; b < count; ++b) {
      for (int j = 0; j < 3; ++j) {
        comp[j][2 * (first + b)] = z.v[2 * j][b];
        comp[j][2 * (first + b) + 1] = z.v[2 * j + 1][b];
      }
    }
  }
}

StrangStepper::StrangStepper(const Grid2D& grid, const SystemParams& p, double dt)
    : grid_(grid), params_(p), dt_(dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("strang_step: dt must be > 0");
  const std::size_t n = grid.n();
  const double inv_count = 1.0 / static_cast<double>(n * n);
  for (int c = 0; c < 3; ++c) {
    half_[c] = ComplexGrid(n);
    full_[c] = ComplexGrid(n);
    const double rate = -1.0 / (2.0 * p.m()[c]);
    for (std::size_t i = 0; i < n; ++i) {
      const double xi2 = grid.xi(i) * grid.xi(i);
      for (std::size_t j = 0; j < n; ++j) {
        const double k2 = xi2 + grid.xi(j) * grid.xi(j);
        half_[c](i, j) = std::polar(inv_count, 0.5 * dt * rate * k2);
        full_[c](i, j) = std::polar(inv_count, dt * rate * k2);
      }
    }
  }
}

void StrangStepper::linear(FieldState& state, const std::array<ComplexGrid, 3>& mult) const {
  const FftPlan& plan = FftPlan::get(grid_.n());
  for (int c = 0; c < 3; ++c) {
    plan.forward(state.u[c].data());
    double* d = reinterpret_cast<double*>(state.u[c].data());
    const double* m = reinterpret_cast<const double*>(mult[c].data());
    const std::size_t size = state.u[c].size();
    for (std::size_t idx = 0; idx < 2 * size; idx += 2) {
      const double re = d[idx] * m[idx] - d[idx + 1] * m[idx + 1];
      const double im = d[idx] * m[idx + 1] + d[idx + 1] * m[idx];
      d[idx] = re;
      d[idx + 1] = im;
    }
    plan.backward(state.u[c].data());
  }
}

void StrangStepper::step(FieldState& state) const { advance(state, 1); }

void StrangStepper::advance(FieldState& state, std::size_t steps) const {
  if (steps == 0) return;
  require_shape(state.u, grid_);
  const double t0 = state.t;
  linear(state, half_);
  for (std::size_t s = 0; s < steps; ++s) {
    nonlinear_flow_inplace(state.u, dt_, params_);
    linear(state, s + 1 < steps ? full_ : half_);
  }
  state.t = t0 + static_cast<double>(steps) * dt_;
}

FieldState strang_step(const FieldState& state, double dt, const SystemParams& p) {
  StrangStepper stepper(state.grid, p, dt);
  FieldState out = state;
  stepper.step(out);
  return out;
}

FieldState make_initial_state(const Grid2D& grid, const InitialData& init, const SystemParams& p) {
  if (!(init.epsilon >= 0.0) || !std::isfinite(init.epsilon)) {
    throw InvalidArgument("initial data: epsilon must be finite and >= 0");
  }
  if (init.profile != "gaussian") {
    throw InvalidArgument("initial data: unknown profile '" + init.profile + "'");
  }
  if (!(init.width > 0.0)) throw InvalidArgument("initial data: width must be > 0");
  FieldState state = FieldState::zeros(grid, 0.0);
  const std::size_t n = grid.n();
  const double inv2w2 = 1.0 / (2.0 * init.width * init.width);
  for (int c = 0; c < 3; ++c) {
    const double amp = init.epsilon * init.scales[c];
    const double k1 = p.m()[c] * init.velocity[0];
    const double k2 = p.m()[c] * init.velocity[1];
    for (std::size_t i = 0; i < n; ++i) {
      const double x = grid.x(i);
      for (std::size_t j = 0; j < n; ++j) {
        const double y = grid.x(j);
        state.u[c](i, j) = std::polar(amp * std::exp(-(x * x + y * y) * inv2w2), k1 * x + k2 * y);
      }
    }
  }
  return state;
}

namespace {

void require_finite(const FieldState& state) {
  for (const auto& comp : state.u) {
    for (const cplx& v : comp) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw NonFinite("solution became non-finite at t=" + std::to_string(state.t));
      }
    }
  }
}

}  // namespace

SimulationResult simulate(const SimulationSetup& setup, const CheckpointSink& sink) {
  if (!(setup.dt > 0.0) || !(setup.t_final >= 0.0)) {
    throw InvalidArgument("simulate: need dt > 0 and t_final >= 0");
  }
  if (setup.diagnostics_every < 1) throw InvalidArgument("simulate: diagnostics_every must be >= 1");
  const double ratio = setup.t_final / setup.dt;
  const auto total = static_cast<std::size_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(total)) > 1e-6 * std::max(1.0, ratio)) {
    throw InvalidArgument("simulate: t_final must be an integer multiple of dt");
  }

  const SystemParams& p = setup.params;
  SimulationResult result{{}, make_initial_state(setup.grid, setup.initial, p), std::nullopt, 0.0, total};
  FieldState& state = result.final_state;
  const StrangStepper stepper(setup.grid, p, setup.dt);

  CubicIntegral cubic;
  double initial_ledger = 0.0;

  auto record = [&](std::size_t step) {
    state.t = static_cast<double>(step) * setup.dt;
    require_finite(state);
    cubic.add(state.t, cubic_rate(state, p));
    if (step == 0) initial_ledger = ledger(state, 0.0, p);
    DiagnosticRecord row = diagnose_state(state, cubic.value(), initial_ledger, p);
    result.max_outer_mass_fraction = std::max(result.max_outer_mass_fraction, row.outer_mass_fraction);
    if (row.boundary_density > setup.boundary.threshold) {
      if (setup.boundary.abort) {
        throw DomainEscape("boundary density " + std::to_string(row.boundary_density) +
                               " exceeds " + std::to_string(setup.boundary.threshold) +
                               " at t=" + std::to_string(state.t),
                           state.t);
      }
      if (!result.fidelity_window_end) result.fidelity_window_end = state.t;
    }
    result.series.rows.push_back(row);
  };

  record(0);
  const auto every = static_cast<std::size_t>(setup.diagnostics_every);
  const auto ckpt = static_cast<std::size_t>(std::max(0, setup.checkpoint_every));
  std::size_t done = 0;
  while (done < total) {
    std::size_t next = std::min(total, (done / every + 1) * every);
    if (ckpt > 0) next = std::min(next, (done / ckpt + 1) * ckpt);
    stepper.advance(state, next - done);
    done = next;
    state.t = static_cast<double>(done) * setup.dt;
    if (done % every == 0 || done == total) record(done);
    if (sink && ckpt > 0 && done % ckpt == 0 && done != total) sink(state);
  }
  if (sink) sink(state);
  return result;
}

}  // namespace qnls
