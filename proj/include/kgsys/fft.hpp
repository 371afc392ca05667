#pragma once

#include <fftw3.h>

#include <complex>
#include <memory>
#include <mutex>
#include <vector>

namespace kgsys {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;

namespace detail {

// FFTW's planner is not re-entrant; execution with new-array execute is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

/// Unnormalized in-place complex DFT of a fixed length.
///
/// Plans are made once with FFTW_ESTIMATE (deterministic) and FFTW_UNALIGNED so
/// that a single plan can be executed on any buffer of the right length.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n) {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    cvec scratch(n);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_1d(static_cast<int>(n), p, p, FFTW_FORWARD, flags);
    backward_ = fftw_plan_dft_1d(static_cast<int>(n), p, p, FFTW_BACKWARD, flags);
  }
  ~FftPlan() {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::size_t size() const { return n_; }

  // X_k = sum_m x_m e^{-2 pi i mk/n}
  void forward(cplx* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(forward_, p, p);
  }
  // x_m = sum_k X_k e^{+2 pi i mk/n}
  void backward(cplx* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(backward_, p, p);
  }

 private:
  std::size_t n_;
  fftw_plan forward_{};
  fftw_plan backward_{};
};

}  // namespace kgsys
