#include "qnls/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qnls/errors.hpp"
#include "qnls/fft.hpp"

namespace qnls {

namespace {

using RowMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double parity(std::size_t i) { return (i & 1U) ? -1.0 : 1.0; }

// sqrt of the share of sum |v|^2 lying where max(|c_i|, |c_j|) > radius,
// with c the space or frequency coordinates of the grid.
double outside_fraction(const ComplexGrid& v, const Grid2D& grid, bool frequency, double radius) {
  const std::size_t n = grid.n();
  std::vector<double> coord(n);
  for (std::size_t i = 0; i < n; ++i) coord[i] = std::abs(frequency ? grid.xi(i) : grid.x(i));
  const double r = radius * (1.0 + 1e-12);
  double total = 0.0;
  double outside = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = std::norm(v(i, j));
      total += w;
      if (coord[i] > r || coord[j] > r) outside += w;
    }
  }
  return total > 0.0 ? std::sqrt(outside / total) : 0.0;
}

void check_loss(double fraction, double mass, const char* where, double tol) {
  if (fraction > tol) {
    std::ostringstream os;
    os << where << ": rescaling by m=" << mass << " discards a relative L2 share of " << fraction
       << " (limit " << tol << ")";
    throw ScalingOutOfRange(os.str());
  }
}

// Integer q with |x - q| tiny, or 0 when x is not an integer.
long as_integer(double x) {
  const double q = std::round(x);
  if (q == 0.0 || std::abs(x - q) > 1e-12 * std::max(1.0, std::abs(x))) return 0;
  return static_cast<long>(q);
}

// out(k) = spec(q * k) on the frequency grid, zero outside the band.
ComplexGrid remap_frequencies(const ComplexGrid& spec, const Grid2D& grid, long q, cplx factor) {
  const std::size_t n = grid.n();
  const long half = static_cast<long>(n / 2);
  std::vector<long> src(n);
  for (std::size_t k = 0; k < n; ++k) {
    const long target = q * grid.freq_index(k);
    src[k] = (target > half || target < -half) ? -1
                                                : (target + static_cast<long>(n)) % static_cast<long>(n);
  }
  ComplexGrid out(n);
  for (std::size_t a = 0; a < n; ++a) {
    if (src[a] < 0) continue;
    for (std::size_t b = 0; b < n; ++b) {
      if (src[b] < 0) continue;
      out(a, b) = factor * spec(static_cast<std::size_t>(src[a]), static_cast<std::size_t>(src[b]));
    }
  }
  return out;
}

}  // namespace

ComplexGrid transform(const ComplexGrid& f, const Grid2D& grid, Direction dir) {
  require_shape(f, grid);
  const std::size_t n = grid.n();
  const FftPlan& plan = FftPlan::get(n);
  ComplexGrid out = f;
  if (dir == Direction::forward) {
    plan.forward(out.data());
    const double scale = grid.dx() * grid.dx() / kTwoPi;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) out(i, j) *= scale * parity(i + j);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) out(i, j) *= parity(i + j);
    }
    plan.backward(out.data());
    const double scale = kTwoPi / (grid.dx() * grid.dx() * static_cast<double>(n * n));
    for (cplx& v : out) v *= scale;
  }
  return out;
}

ComplexGrid evaluate_transform_at(const ComplexGrid& c, const Grid2D& grid,
                                  std::span<const double> nodes) {
  require_shape(c, grid);
  const auto n = static_cast<Eigen::Index>(grid.n());
  const auto nout = static_cast<Eigen::Index>(nodes.size());
  const double band = grid.xi_nyquist() * (1.0 + 1e-12);

  RowMatrix kernel = RowMatrix::Zero(nout, n);
  for (Eigen::Index a = 0; a < nout; ++a) {
    const double nu = nodes[static_cast<std::size_t>(a)];
    if (std::abs(nu) > band) continue;
    for (Eigen::Index i = 0; i < n; ++i) {
      kernel(a, i) = std::polar(1.0, -nu * grid.x(static_cast<std::size_t>(i)));
    }
  }
  Eigen::Map<const RowMatrix> samples(c.data(), n, n);
  const RowMatrix partial = kernel * samples;
  const RowMatrix full = partial * kernel.transpose();

  ComplexGrid out(static_cast<std::size_t>(nout));
  const double scale = grid.dx() * grid.dx() / kTwoPi;
  for (Eigen::Index a = 0; a < nout; ++a) {
    for (Eigen::Index b = 0; b < nout; ++b) {
      out(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) = scale * full(a, b);
    }
  }
  return out;
}

ComplexGrid free_propagate(const ComplexGrid& f, const Grid2D& grid, double dt, double mass) {
  require_shape(f, grid);
  if (dt == 0.0) return f;
  const std::size_t n = grid.n();
  const FftPlan& plan = FftPlan::get(n);
  ComplexGrid out = f;
  plan.forward(out.data());
  const double inv_count = 1.0 / static_cast<double>(n * n);
  const double rate = -dt / (2.0 * mass);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi2 = grid.xi(i) * grid.xi(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double k2 = xi2 + grid.xi(j) * grid.xi(j);
      out(i, j) *= std::polar(inv_count, rate * k2);
    }
  }
  plan.backward(out.data());
  return out;
}

FieldState free_propagate(const FieldState& state, double dt, const SystemParams& p) {
  FieldState out{state.grid, {}, state.t + dt};
  for (int j = 0; j < 3; ++j) out.u[j] = free_propagate(state.u[j], state.grid, dt, p.m()[j]);
  return out;
}

Components apply_M(const Components& u, const Grid2D& grid, double t, int sign,
                   const SystemParams& p) {
  require_shape(u, grid);
  if (t == 0.0) throw ZeroTime("M(t) is undefined at t = 0");
  if (sign != 1 && sign != -1) throw InvalidArgument("apply_M: sign must be +1 or -1");
  const std::size_t n = grid.n();
  Components out = u;
  for (int c = 0; c < 3; ++c) {
    const double rate = sign * p.m()[c] / (2.0 * t);
    for (std::size_t i = 0; i < n; ++i) {
      const double x2 = grid.x(i) * grid.x(i);
      for (std::size_t j = 0; j < n; ++j) {
        const double r2 = x2 + grid.x(j) * grid.x(j);
        out[c](i, j) *= std::polar(1.0, rate * r2);
      }
    }
  }
  return out;
}

ComplexGrid apply_G(const ComplexGrid& f, const Grid2D& grid, Direction dir, double mass,
                    double loss_tol) {
  require_shape(f, grid);
  if (mass == 0.0) throw InvalidArgument("apply_G: mass must be nonzero");
  const std::size_t n = grid.n();
  const double am = std::abs(mass);
  const cplx minus_i_m{0.0, -mass};

  if (dir == Direction::forward) {
    if (am > 1.0) {
      check_loss(outside_fraction(f, grid, false, 0.5 * grid.box_length() / am), mass, "G", loss_tol);
    }
    ComplexGrid spec = transform(f, grid, Direction::forward);
    if (am < 1.0) check_loss(outside_fraction(spec, grid, true, am * grid.xi_nyquist()), mass, "G", loss_tol);
    if (const long q = as_integer(mass); q != 0) {
      return remap_frequencies(spec, grid, q, minus_i_m);
    }
    std::vector<double> nodes(n);
    for (std::size_t k = 0; k < n; ++k) nodes[k] = mass * grid.xi(k);
    ComplexGrid out = evaluate_transform_at(f, grid, nodes);
    for (cplx& v : out) v *= minus_i_m;
    return out;
  }

  // Inverse: phi^(xi) = (i/m) psi(xi/m), then back to space.
  const cplx i_over_m{0.0, 1.0 / mass};
  if (am > 1.0) check_loss(outside_fraction(f, grid, true, grid.xi_nyquist() / am), mass, "G^-1", loss_tol);
  ComplexGrid dual = transform(f, grid, Direction::inverse);
  if (am < 1.0) {
    check_loss(outside_fraction(dual, grid, false, 0.5 * am * grid.box_length()), mass, "G^-1", loss_tol);
  }
  ComplexGrid spec;
  if (const long q = as_integer(1.0 / mass); q != 0) {
    spec = remap_frequencies(f, grid, q, i_over_m);
  } else {
    std::vector<double> nodes(n);
    for (std::size_t k = 0; k < n; ++k) nodes[k] = grid.xi(k) / mass;
    spec = evaluate_transform_at(dual, grid, nodes);
    for (cplx& v : spec) v *= i_over_m;
  }
  return transform(spec, grid, Direction::inverse);
}

Components apply_G(const Components& u, const Grid2D& grid, Direction dir, const SystemParams& p,
                   double loss_tol) {
  return {apply_G(u[0], grid, dir, p.m()[0], loss_tol), apply_G(u[1], grid, dir, p.m()[1], loss_tol),
          apply_G(u[2], grid, dir, p.m()[2], loss_tol)};
}

Components apply_D(const Components& psi, const Grid2D& grid, double t) {
  require_shape(psi, grid);
  if (t == 0.0) throw ZeroTime("D(t) is undefined at t = 0");
  const std::size_t n = grid.n();
  std::vector<double> nodes(n);
  for (std::size_t i = 0; i < n; ++i) nodes[i] = grid.x(i) / t;
  Components out;
  for (int c = 0; c < 3; ++c) {
    const ComplexGrid dual = transform(psi[c], grid, Direction::inverse);
    out[c] = evaluate_transform_at(dual, grid, nodes);
    for (cplx& v : out[c]) v /= t;
  }
  return out;
}

Components apply_W(const Components& psi, const Grid2D& grid, double t, const SystemParams& p) {
  const Components phi = apply_G(psi, grid, Direction::inverse, p);
  return apply_G(apply_M(phi, grid, t, +1, p), grid, Direction::forward, p);
}

ComplexGrid fractional_laplacian(const ComplexGrid& f, const Grid2D& grid, double s) {
  ComplexGrid spec = transform(f, grid, Direction::forward);
  const std::size_t n = grid.n();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double k2 = grid.xi(i) * grid.xi(i) + grid.xi(j) * grid.xi(j);
      spec(i, j) *= k2 == 0.0 ? 0.0 : std::pow(k2, 0.5 * s);
    }
  }
  return transform(spec, grid, Direction::inverse);
}

double l2_norm(const ComplexGrid& f, const Grid2D& grid) {
  require_shape(f, grid);
  double acc = 0.0;
  for (const cplx& v : f) acc += std::norm(v);
  return std::sqrt(acc) * grid.dx();
}

double weighted_norm(const ComplexGrid& f, const Grid2D& grid, WeightedSpace space, double s) {
  require_shape(f, grid);
  if (!(s >= 0.0 && s < 2.0)) throw InvalidArgument("weighted_norm: need 0 <= s < 2");
  const std::size_t n = grid.n();
  double acc = 0.0;
  if (space == WeightedSpace::Hs0) {
    const ComplexGrid spec = transform(f, grid, Direction::forward);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double k2 = grid.xi(i) * grid.xi(i) + grid.xi(j) * grid.xi(j);
        acc += std::pow(1.0 + k2, s) * std::norm(spec(i, j));
      }
    }
    return std::sqrt(acc) * grid.dxi();
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double r2 = grid.x(i) * grid.x(i) + grid.x(j) * grid.x(j);
      acc += std::pow(1.0 + r2, s) * std::norm(f(i, j));
    }
  }
  return std::sqrt(acc) * grid.dx();
}

double weighted_norm(const Components& u, const Grid2D& grid, WeightedSpace space, double s) {
  double acc = 0.0;
  for (const auto& c : u) {
    const double v = weighted_norm(c, grid, space, s);
    acc += v * v;
  }
  return std::sqrt(acc);
}

double sup_norm(const Components& u) {
  double best = 0.0;
  const std::size_t size = u[0].size();
  for (std::size_t idx = 0; idx < size; ++idx) {
    const double v = std::norm(u[0][idx]) + std::norm(u[1][idx]) + std::norm(u[2][idx]);
    best = std::max(best, v);
  }
  return std::sqrt(best);
}

Components compute_alpha(const FieldState& state, const SystemParams& p, double loss_tol) {
  if (!(state.t >= 1.0)) throw InvalidArgument("compute_alpha requires t >= 1");
  const FieldState back = free_propagate(state, -state.t, p);
  return apply_G(back.u, state.grid, Direction::forward, p, loss_tol);
}

Components apply_F(const Components& u, const SystemParams& p) {
  Components out{ComplexGrid(u[0].n()), ComplexGrid(u[1].n()), ComplexGrid(u[2].n())};
  const std::size_t size = u[0].size();
  for (std::size_t idx = 0; idx < size; ++idx) {
    const ComplexTriple f = eval_F(ComplexTriple(u[0][idx], u[1][idx], u[2][idx]), p);
    out[0][idx] = f[0];
    out[1][idx] = f[1];
    out[2][idx] = f[2];
  }
  return out;
}

}  // namespace qnls
