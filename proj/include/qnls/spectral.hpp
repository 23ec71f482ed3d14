#pragma once

// Fourier machinery on the periodic grid: the 1/(2 pi)-normalised transform,
// the free propagator U(t), the modulation M(t), the dilation D(t), the scaled
// transform G, W(t) = G M(t) G^{-1}, weighted Sobolev norms and the profile
// alpha = G U(-t) u.

#include <span>
#include <vector>

#include "qnls/grid.hpp"
#include "qnls/model.hpp"

namespace qnls {

enum class Direction { forward, inverse };

enum class WeightedSpace {
  Hs0,  // (1 - Delta)^{s/2} in frequency
  H0s,  // (1 + |x|^2)^{s/2} in space
};

/// Relative L2 mass a G rescaling may discard before ScalingOutOfRange.
inline constexpr double kScalingLossTol = 1e-6;
/// Looser limit used by run diagnostics, where the nonlinearity leaves
/// small spatial tails on U(-t) u.
inline constexpr double kDiagnosticLossTol = 1e-3;

/// Discrete version of f^(xi) = (1/2pi) \int e^{-i y.xi} f(y) dy:
/// forward returns (dx^2 / 2pi) * sum_y e^{-i y.xi_k} f(y) at the grid
/// frequencies; inverse undoes it exactly.
ComplexGrid transform(const ComplexGrid& f, const Grid2D& grid, Direction dir);

/// Evaluates the discrete transform sum of the space samples `c` at
/// arbitrary per-axis frequencies: out(a, b) = (dx^2/2pi) sum e^{-i(nu_a x + nu_b y)} c.
/// This is the band-limited interpolant of transform(c); nodes with
/// |nu| > pi/dx lie outside the band and yield zero.
ComplexGrid evaluate_transform_at(const ComplexGrid& c, const Grid2D& grid,
                                  std::span<const double> nodes);

/// exp(i t Delta / (2 m)) for one component.
ComplexGrid free_propagate(const ComplexGrid& f, const Grid2D& grid, double dt, double mass);
FieldState free_propagate(const FieldState& state, double dt, const SystemParams& p);

/// Component j multiplied by exp(sign * i m_j |x|^2 / (2t)). Throws ZeroTime.
Components apply_M(const Components& u, const Grid2D& grid, double t, int sign,
                   const SystemParams& p);

/// (G phi)_j(xi) = -i m_j phi^_j(m_j xi) and its inverse.
ComplexGrid apply_G(const ComplexGrid& f, const Grid2D& grid, Direction dir, double mass,
                    double loss_tol = kScalingLossTol);
Components apply_G(const Components& u, const Grid2D& grid, Direction dir, const SystemParams& p,
                   double loss_tol = kScalingLossTol);

/// (D(t) psi)(x) = psi(x/t) / t, mapping a frequency-grid function to the
/// space grid by band-limited resampling. Throws ZeroTime.
Components apply_D(const Components& psi, const Grid2D& grid, double t);

/// W(t) = G M(t) G^{-1} on frequency-grid data.
Components apply_W(const Components& psi, const Grid2D& grid, double t, const SystemParams& p);

/// (-Delta)^{s/2} as the |xi|^s multiplier.
ComplexGrid fractional_laplacian(const ComplexGrid& f, const Grid2D& grid, double s);

double weighted_norm(const ComplexGrid& f, const Grid2D& grid, WeightedSpace space, double s);
/// sqrt of the sum of squared component norms.
double weighted_norm(const Components& u, const Grid2D& grid, WeightedSpace space, double s);

/// Grid L2 norm sqrt(sum |f|^2 dx^2).
double l2_norm(const ComplexGrid& f, const Grid2D& grid);
/// Grid max of |u|_{C^3}.
double sup_norm(const Components& u);

/// alpha(t, xi) = G(U(-t) u(t)) on the frequency grid. Requires t >= 1.
Components compute_alpha(const FieldState& state, const SystemParams& p,
                        double loss_tol = kScalingLossTol);

/// Pointwise F(u) on the grid.
Components apply_F(const Components& u, const SystemParams& p);

}  // namespace qnls
