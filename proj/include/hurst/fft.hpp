#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <vector>

namespace hurst::fft {

using cvec = std::vector<std::complex<double>>;

namespace detail {
// FFTW planning is not thread-safe; execution of a private plan is.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class Plan {
 public:
  Plan(cvec& data, int sign) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    plan_ = fftw_plan_dft_1d(static_cast<int>(data.size()), p, p, sign, FFTW_ESTIMATE);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  ~Plan() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  void run() { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};
}  // namespace detail

/// In-place unnormalized DFT: X_k = sum_j x_j exp(-2 pi i jk / M).
inline void forward(cvec& data) {
  if (data.empty()) return;
  detail::Plan(data, FFTW_FORWARD).run();
}

/// In-place inverse DFT including the 1/M factor.
inline void inverse(cvec& data) {
  if (data.empty()) return;
  detail::Plan(data, FFTW_BACKWARD).run();
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& z : data) z *= scale;
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace hurst::fft
