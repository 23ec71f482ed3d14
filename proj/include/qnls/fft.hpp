#pragma once

#include <complex>
#include <cstddef>

namespace qnls {

/// Unnormalised in-place 2D FFT of an n x n row-major array, one cached plan
/// per size. Plans use FFTW_MEASURE unless QNLS_FFT_PLANNER=estimate;
/// QNLS_FFT_WISDOM names a wisdom file that is loaded before and saved after
/// planning, which pins the measured algorithm across runs.
class FftPlan {
 public:
  static const FftPlan& get(std::size_t n);

  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan();

  /// X_k = sum_i x_i exp(-2 pi i ik/n), per axis. `data` must be 64-byte aligned.
  void forward(std::complex<double>* data) const;
  /// x_i = sum_k X_k exp(+2 pi i ik/n), per axis (no 1/n^2).
  void backward(std::complex<double>* data) const;

  std::size_t n() const noexcept { return n_; }

 private:
  explicit FftPlan(std::size_t n);

  std::size_t n_;
  void* forward_ = nullptr;
  void* backward_ = nullptr;
};

}  // namespace qnls
