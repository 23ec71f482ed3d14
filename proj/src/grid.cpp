#include "qnls/grid.hpp"

#include <cmath>
#include <string>

#include "qnls/errors.hpp"

namespace qnls {

Grid2D::Grid2D(std::size_t n, double box_length) : n_(n), length_(box_length) {
  if (n < 16 || (n & (n - 1)) != 0) {
    throw InvalidArgument("grid size must be a power of two >= 16, got " + std::to_string(n));
  }
  if (!(box_length > 0.0) || !std::isfinite(box_length)) {
    throw InvalidArgument("box length must be positive");
  }
  dx_ = length_ / static_cast<double>(n_);
  dxi_ = 2.0 * 3.14159265358979323846 / length_;
}

FieldState FieldState::zeros(const Grid2D& grid, double t) {
  return FieldState{grid, {ComplexGrid(grid.n()), ComplexGrid(grid.n()), ComplexGrid(grid.n())}, t};
}

void require_shape(const ComplexGrid& c, const Grid2D& grid) {
  if (c.n() != grid.n() || c.size() != grid.size()) {
    throw ShapeMismatch("array of size " + std::to_string(c.n()) + " does not match grid n=" +
                        std::to_string(grid.n()));
  }
}

void require_shape(const Components& c, const Grid2D& grid) {
  for (const auto& comp : c) require_shape(comp, grid);
}

void FieldState::validate() const {
  require_shape(u, grid);
  if (!std::isfinite(t) || t < 0.0) throw NonFinite("field time must be finite and >= 0");
  for (const auto& comp : u) {
    for (const cplx& v : comp) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw NonFinite("field contains non-finite values at t=" + std::to_string(t));
      }
    }
  }
}

}  // namespace qnls
