#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <string>

#include "hurst/error.hpp"

namespace hurst::quad {

namespace detail {

template <class F>
double simpson_step(const F& f, double a, double fa, double b, double fb, double m, double fm,
                    double whole, double tol, double global_tol, int depth, int& max_depth_hit) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0) {
    // Weak endpoint singularities exhaust the halved tolerance long before
    // their contribution matters; only a visible error is a failure.
    if (std::abs(delta) > global_tol) ++max_depth_hit;
    return left + right + delta / 15.0;
  }
  // The second test stops refinement once the correction is at round-off.
  if (std::abs(delta) <= 15.0 * tol || std::abs(delta) <= 1e-15 * (std::abs(left) + std::abs(right)))
    return left + right + delta / 15.0;
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, global_tol, depth - 1, max_depth_hit) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, global_tol, depth - 1, max_depth_hit);
}

}  // namespace detail

/// Adaptive Simpson with Richardson extrapolation on [a, b]. The interval
/// is pre-split into `panels` pieces so that localized features are seen.
/// Throws numeric_error when the recursion bottoms out on any subinterval.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol = 1e-10, int max_depth = 48,
                        int panels = 16) {
  double total = 0.0;
  int hits = 0;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double hi = (p + 1 == panels) ? b : lo + h;
    const double mid = 0.5 * (lo + hi);
    const double flo = f(lo);
    const double fhi = f(hi);
    const double fmid = f(mid);
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    total += detail::simpson_step(f, lo, flo, hi, fhi, mid, fmid, whole, tol / panels, 1e-3 * tol, max_depth, hits);
  }
  if (!std::isfinite(total))
    throw numeric_error("adaptive_simpson: non-finite integral on [" + std::to_string(a) + ", " +
                        std::to_string(b) + "]");
  if (hits > 0)
    throw numeric_error("adaptive_simpson: depth limit reached on " + std::to_string(hits) +
                        " subintervals of [" + std::to_string(a) + ", " + std::to_string(b) +
                        "], tol=" + std::to_string(tol));
  return total;
}

/// Composite 20-point Gauss-Legendre on [0, 1] with panels graded
/// geometrically toward 0 (ratio 1/2). Handles integrable power and
/// logarithmic singularities at the left endpoint, which is never sampled.
/// Works for any value type supporting `+=` and scalar `*`.
template <class T, class F>
T graded_gauss_unit(const F& f, int levels = 44, int uniform_panels = 4) {
  using rule = boost::math::quadrature::gauss<double, 20>;
  const auto& x = rule::abscissa();
  const auto& w = rule::weights();
  T sum{};
  auto panel = [&](double lo, double hi) {
    const double c = 0.5 * (lo + hi);
    const double r = 0.5 * (hi - lo);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] == 0.0) {
        sum += f(c) * (w[i] * r);
      } else {
        sum += f(c - r * x[i]) * (w[i] * r);
        sum += f(c + r * x[i]) * (w[i] * r);
      }
    }
  };
  // [0.5, 1] split uniformly, then [2^-k-1, 2^-k] down to 2^-levels.
  for (int p = 0; p < uniform_panels; ++p) {
    const double lo = 0.5 + 0.5 * p / uniform_panels;
    panel(lo, lo + 0.5 / uniform_panels);
  }
  double hi = 0.5;
  for (int k = 1; k < levels; ++k) {
    const double lo = 0.5 * hi;
    panel(lo, hi);
    hi = lo;
  }
  return sum;
}

}  // namespace hurst::quad
