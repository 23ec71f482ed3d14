#pragma once

// Strang splitting for i u_t + Lambda u = F(u): exact spectral linear flow
// around a pointwise RK4 flow of i z' = F(z).

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qnls/diagnose.hpp"
#include "qnls/grid.hpp"
#include "qnls/model.hpp"

namespace qnls {

/// RK4 substep cap inside the nonlinear flow.
inline constexpr double kMaxNonlinearSubstep = 1e-3;

/// ceil(dt / 1e-3) RK4 substeps, at least one.
int nonlinear_substeps(double dt);

/// Flow of i z' = F(z) over dt by classical RK4.
ComplexTriple nonlinear_flow(const ComplexTriple& z, double dt, const SystemParams& p);

/// Applies nonlinear_flow at every grid point.
void nonlinear_flow_inplace(Components& u, double dt, const SystemParams& p);

/// Precomputed spectral multipliers for a fixed (grid, params, dt).
class StrangStepper {
 public:
  StrangStepper(const Grid2D& grid, const SystemParams& p, double dt);

  /// Half linear, full nonlinear, half linear.
  void step(FieldState& state) const;
  /// `steps` Strang steps with the adjacent half linear flows fused.
  void advance(FieldState& state, std::size_t steps) const;

  double dt() const noexcept { return dt_; }

 private:
  void linear(FieldState& state, const std::array<ComplexGrid, 3>& mult) const;

  Grid2D grid_;
  SystemParams params_;
  double dt_;
  std::array<ComplexGrid, 3> half_;
  std::array<ComplexGrid, 3> full_;
};

FieldState strang_step(const FieldState& state, double dt, const SystemParams& p);

/// phi_j(x) = epsilon * scale_j * exp(-|x|^2 / (2 w^2)) * exp(i m_j v.x).
struct InitialData {
  std::string profile = "gaussian";
  double epsilon = 0.1;
  RealTriple scales{1.0, 1.0, 1.0};
  double width = 1.0;
  std::array<double, 2> velocity{0.0, 0.0};
};

FieldState make_initial_state(const Grid2D& grid, const InitialData& init, const SystemParams& p);

struct BoundaryPolicy {
  double threshold = 1e-6;
  /// Abort with DomainEscape; otherwise only record when the threshold was crossed.
  bool abort = true;
};

struct SimulationSetup {
  SystemParams params;
  Grid2D grid;
  double dt = 1e-3;
  double t_final = 10.0;
  int diagnostics_every = 10;
  int checkpoint_every = 0;  // steps; 0 keeps only the final state
  InitialData initial;
  BoundaryPolicy boundary;
};

struct SimulationResult {
  DiagnosticsSeries series;
  FieldState final_state;
  std::optional<double> fidelity_window_end;  // first diagnostic time over the threshold
  double max_outer_mass_fraction = 0.0;
  std::size_t steps = 0;
};

using CheckpointSink = std::function<void(const FieldState&)>;

/// Evolves from t = 0 to t_final, recording diagnostics every
/// `diagnostics_every` steps and handing checkpoints to `sink`.
/// Throws DomainEscape, NonFinite or InvalidArgument.
SimulationResult simulate(const SimulationSetup& setup, const CheckpointSink& sink = {});

}  // namespace qnls
