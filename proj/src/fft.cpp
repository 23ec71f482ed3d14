#include "qnls/fft.hpp"

#include <fftw3.h>

#include <cstdlib>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace qnls {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

unsigned planner_flags() {
  const char* mode = std::getenv("QNLS_FFT_PLANNER");
  if (mode != nullptr && std::strcmp(mode, "estimate") == 0) return FFTW_ESTIMATE;
  return FFTW_MEASURE;
}

const char* wisdom_path() {
  const char* path = std::getenv("QNLS_FFT_WISDOM");
  return (path != nullptr && *path != '\0') ? path : nullptr;
}

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n) {
  const int ni = static_cast<int>(n);
  const char* wisdom = wisdom_path();
  if (wisdom != nullptr) fftw_import_wisdom_from_filename(wisdom);
  const unsigned flags = planner_flags();
  auto* scratch = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n * n));
  if (scratch == nullptr) throw std::bad_alloc();
  forward_ = fftw_plan_dft_2d(ni, ni, scratch, scratch, FFTW_FORWARD, flags);
  backward_ = fftw_plan_dft_2d(ni, ni, scratch, scratch, FFTW_BACKWARD, flags);
  fftw_free(scratch);
  if (wisdom != nullptr) fftw_export_wisdom_to_filename(wisdom);
  if (forward_ == nullptr || backward_ == nullptr) {
    throw std::runtime_error("FFTW plan creation failed");
  }
}

FftPlan::~FftPlan() {
  std::lock_guard lock(planner_mutex());
  if (forward_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  if (backward_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(backward_));
}

const FftPlan& FftPlan::get(std::size_t n) {
  std::mutex& mtx = planner_mutex();
  static std::map<std::size_t, std::unique_ptr<FftPlan>> cache;
  std::lock_guard lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, std::unique_ptr<FftPlan>(new FftPlan(n))).first;
  }
  return *it->second;
}

void FftPlan::forward(std::complex<double>* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(forward_), p, p);
}

void FftPlan::backward(std::complex<double>* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(backward_), p, p);
}

}  // namespace qnls
