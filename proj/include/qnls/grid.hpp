#pragma once

// Periodic square grid standing in for R^2, plus the sample containers that
// live on it.

#include <array>
#include <complex>
#include <cstddef>
#include <new>
#include <span>
#include <vector>

namespace qnls {

using cplx = std::complex<double>;

/// 64-byte aligned allocator so FFTW plans can be reused on any array.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t count) {
    return static_cast<T*>(::operator new(count * sizeof(T), kAlign));
  }
  void deallocate(T* ptr, std::size_t) noexcept { ::operator delete(ptr, kAlign); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

/// n x n points on [-L/2, L/2)^2 with dual frequencies 2 pi k / L.
/// Frequency index k is stored in FFT order (0..n/2-1, then -n/2..-1).
class Grid2D {
 public:
  Grid2D(std::size_t n, double box_length);

  std::size_t n() const noexcept { return n_; }
  std::size_t size() const noexcept { return n_ * n_; }
  double box_length() const noexcept { return length_; }
  double dx() const noexcept { return dx_; }
  double dxi() const noexcept { return dxi_; }
  /// Largest representable frequency per axis, pi / dx.
  double xi_nyquist() const noexcept { return 3.14159265358979323846 / dx_; }

  double x(std::size_t i) const noexcept { return -0.5 * length_ + static_cast<double>(i) * dx_; }
  /// Signed integer frequency of FFT-order index k.
  long freq_index(std::size_t k) const noexcept {
    return k < n_ / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n_);
  }
  double xi(std::size_t k) const noexcept { return static_cast<double>(freq_index(k)) * dxi_; }

  bool operator==(const Grid2D& other) const noexcept {
    return n_ == other.n_ && length_ == other.length_;
  }

 private:
  std::size_t n_;
  double length_;
  double dx_;
  double dxi_;
};

/// n x n complex samples, row-major: element (i, j) sits at (x_i, y_j) in
/// physical space or at (xi_i, xi_j) on the frequency grid.
class ComplexGrid {
 public:
  using Storage = std::vector<cplx, AlignedAllocator<cplx>>;

  ComplexGrid() = default;
  explicit ComplexGrid(std::size_t n, cplx fill = {}) : n_(n), data_(n * n, fill) {}

  std::size_t n() const noexcept { return n_; }
  std::size_t size() const noexcept { return data_.size(); }

  cplx& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }
  cplx& operator[](std::size_t idx) noexcept { return data_[idx]; }
  const cplx& operator[](std::size_t idx) const noexcept { return data_[idx]; }

  cplx* data() noexcept { return data_.data(); }
  const cplx* data() const noexcept { return data_.data(); }
  std::span<cplx> span() noexcept { return data_; }
  std::span<const cplx> span() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

 private:
  std::size_t n_ = 0;
  Storage data_;
};

using Components = std::array<ComplexGrid, 3>;

/// The solution u(t, .) sampled on a grid.
struct FieldState {
  Grid2D grid;
  Components u;
  double t = 0.0;

  /// Zero field of the right shape.
  static FieldState zeros(const Grid2D& grid, double t = 0.0);

  /// Throws ShapeMismatch or NonFinite when the invariants fail.
  void validate() const;
};

/// Throws ShapeMismatch unless every component matches the grid.
void require_shape(const Components& c, const Grid2D& grid);
void require_shape(const ComplexGrid& c, const Grid2D& grid);

}  // namespace qnls
