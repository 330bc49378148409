#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "hurst/error.hpp"

namespace hurst {

/// Hurst exponent H, strictly inside (0, 1).
class HurstParam {
 public:
  explicit HurstParam(double h) : h_(h) {
    if (!(h > 0.0 && h < 1.0))
      throw domain_error("Hurst parameter must lie in (0,1), got " + std::to_string(h));
  }
  double value() const noexcept { return h_; }
  operator double() const noexcept { return h_; }

 private:
  double h_;
};

/// Centered symbol parameter alpha = H - 1/2, strictly inside (-1/2, 1/2).
class SymbolParam {
 public:
  explicit SymbolParam(double alpha) : alpha_(alpha) {
    if (!(alpha > -0.5 && alpha < 0.5))
      throw domain_error("symbol parameter must lie in (-1/2,1/2), got " + std::to_string(alpha));
  }
  static SymbolParam from_hurst(HurstParam h) { return SymbolParam(h.value() - 0.5); }

  double value() const noexcept { return alpha_; }
  operator double() const noexcept { return alpha_; }
  HurstParam hurst() const { return HurstParam(alpha_ + 0.5); }
  double minus() const noexcept { return std::max(-alpha_, 0.0); }
  double plus() const noexcept { return std::max(alpha_, 0.0); }

 private:
  double alpha_;
};

/// Cutoff of the periodized power series in the spectral density.
/// Terms with |k| > k_max are replaced by an Euler-Maclaurin tail with
/// `tail_order` Bernoulli corrections (1..4).
struct SinaiTruncation {
  int k_max = 256;
  int tail_order = 2;

  void validate() const {
    if (k_max < 16) throw domain_error("SinaiTruncation: k_max must be >= 16");
    if (tail_order < 1 || tail_order > 4)
      throw domain_error("SinaiTruncation: tail_order must be in [1,4]");
  }
};

/// Truncation used inside quadrature loops; the 4-term tail keeps it at
/// round-off level with far fewer explicit terms.
inline constexpr SinaiTruncation kQuadratureTruncation{16, 4};

}  // namespace hurst
