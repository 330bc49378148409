#pragma once

// Spectral density of fractional Gaussian noise, its autocovariance, and
// ratio integrals of the centered symbol g_alpha = f_{1/2 + alpha}.
//
// Normalization: the density is scaled so that (1/2pi) * int_T f_H = 1,
// i.e. unit-spacing noise has unit variance. Every quantity below
// (autocovariance, ratio integral, Szego constant) uses this convention.

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "hurst/error.hpp"
#include "hurst/jet.hpp"
#include "hurst/params.hpp"
#include "hurst/quadrature.hpp"

namespace hurst {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Closed form of the normalizing constant, Gamma(2H+1) sin(pi H).
inline double unit_variance_constant(double h) { return std::sin(kPi * h) * std::tgamma(2.0 * h + 1.0); }

namespace detail {

inline double inv_pow(double u, double s) { return std::pow(u, -s); }
inline Jet inv_pow(double u, const Jet& s) { return exp(-s * std::log(u)); }

inline double rising(double s, int m) {
  double r = 1.0;
  for (int i = 0; i < m; ++i) r *= s + i;
  return r;
}
inline Jet rising(const Jet& s, int m) {
  Jet r(1.0);
  for (int i = 0; i < m; ++i) r *= s + Jet(static_cast<double>(i));
  return r;
}

// Euler-Maclaurin remainder sum_{k > K} (2 pi k -/+ t)^{-s}, expressed through
// u = 2 pi K -/+ t.
template <class T>
T em_tail(const T& s, double u, int order) {
  static constexpr double bernoulli[] = {1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0};
  static constexpr double factorial[] = {2.0, 24.0, 720.0, 40320.0};
  T tail = inv_pow(u, s - T(1.0)) / ((s - T(1.0)) * T(kTwoPi)) - inv_pow(u, s) * T(0.5);
  double two_pi_pow = kTwoPi;
  for (int j = 1; j <= order; ++j) {
    const int m = 2 * j - 1;
    tail += rising(s, m) * inv_pow(u, s + T(static_cast<double>(m))) *
            T(bernoulli[j - 1] / factorial[j - 1] * two_pi_pow);
    two_pi_pow *= kTwoPi * kTwoPi;
  }
  return tail;
}

}  // namespace detail

/// Periodic images of the power singularity: sum_{k != 0} |t - 2 pi k|^{-s}
/// for t in [0, pi]. Templated so the exponent may carry derivatives.
template <class T>
T image_sum(const T& s, double t, SinaiTruncation trunc = {}) {
  T sum(0.0);
  for (int k = trunc.k_max; k >= 1; --k) {
    const double base = kTwoPi * k;
    sum += detail::inv_pow(base - t, s) + detail::inv_pow(base + t, s);
  }
  const double edge = kTwoPi * trunc.k_max;
  sum += detail::em_tail(s, edge - t, trunc.tail_order) + detail::em_tail(s, edge + t, trunc.tail_order);
  return sum;
}

namespace detail {

// Reduce lambda to |lambda| within [0, pi].
inline double fold_frequency(double lambda) {
  if (!std::isfinite(lambda)) throw domain_error("frequency must be finite");
  double t = std::remainder(lambda, kTwoPi);
  return std::abs(t);
}

// (2 sin(t/2) / t)^2 with the removable point at 0.
inline double sinc_half_sq(double t) {
  if (t < 1e-8) return 1.0 - t * t / 12.0;
  const double r = 2.0 * std::sin(0.5 * t) / t;
  return r * r;
}

}  // namespace detail

/// Spectral density f_H(lambda) = C_H |e^{i lambda} - 1|^2 sum_k |lambda - 2 pi k|^{-(2H+1)}.
/// At lambda = 0 the density vanishes for H < 1/2 and is singular for H > 1/2.
inline double sinai_density(HurstParam h, double lambda, SinaiTruncation trunc = {}) {
  trunc.validate();
  const double t = detail::fold_frequency(lambda);
  const double hv = h.value();
  if (t == 0.0) {
    if (hv > 0.5) throw domain_error("sinai_density: singular point lambda=0 for H > 1/2");
    return hv < 0.5 ? 0.0 : 1.0;
  }
  const double s = 2.0 * hv + 1.0;
  // C |2 sin(t/2)|^2 (t^-s + R) = C (2 sin(t/2)/t)^2 t^{2-s} (1 + t^s R)
  const double tail = std::pow(t, s) * image_sum(s, t, trunc);
  return unit_variance_constant(hv) * detail::sinc_half_sq(t) * std::pow(t, 2.0 - s) * (1.0 + tail);
}

/// Centered symbol g_alpha = f_{1/2 + alpha}.
inline double symbol_g(SymbolParam alpha, double t, SinaiTruncation trunc = {}) {
  return sinai_density(alpha.hurst(), t, trunc);
}

/// C_H from the normalization (1/2 pi) int_T f_H = 1, by quadrature of the
/// unnormalized series. The endpoint power t^{1-2H} is removed with
/// t = pi x^p, p = 1/(2 - 2H).
inline double norming_constant(HurstParam h, SinaiTruncation trunc = {}, double tol = 1e-12) {
  trunc.validate();
  const double hv = h.value();
  const double s = 2.0 * hv + 1.0;
  const double p = 1.0 / (2.0 - 2.0 * hv);
  const double scale = p * std::pow(kPi, 2.0 - s);
  auto integrand = [&](double x) {
    const double t = kPi * std::pow(x, p);
    const double tail = t > 0.0 ? std::pow(t, s) * image_sum(s, t, trunc) : 0.0;
    return scale * detail::sinc_half_sq(t) * (1.0 + tail);
  };
  double mass = 0.0;
  try {
    mass = quad::adaptive_simpson(integrand, 0.0, 1.0, tol);
  } catch (const numeric_error& e) {
    throw numeric_error(std::string("norming_constant(H=") + std::to_string(hv) + "): " + e.what());
  }
  return 1.0 / mass;
}

/// Autocovariance of unit-spacing, unit-variance fractional Gaussian noise:
/// (|j+1|^{2H} - 2|j|^{2H} + |j-1|^{2H}) / 2.
inline double autocov(HurstParam h, std::size_t lag) {
  const double two_h = 2.0 * h.value();
  if (lag == 0) return 1.0;
  if (lag == 1) return 0.5 * (std::pow(2.0, two_h) - 2.0);
  // Second difference written with expm1/log1p to avoid cancellation at large lags.
  const double j = static_cast<double>(lag);
  const double x = 1.0 / j;
  const double bracket = std::expm1(two_h * std::log1p(x)) + std::expm1(two_h * std::log1p(-x));
  return 0.5 * std::pow(j, two_h) * bracket;
}

/// Lag-covariance sequence gamma_H(0..n-1); the generator of T_n(f_H).
struct AutocovSeq {
  HurstParam h;
  std::vector<double> gammas;

  std::size_t size() const noexcept { return gammas.size(); }
};

inline AutocovSeq make_autocov(HurstParam h, std::size_t n) {
  AutocovSeq seq{h, std::vector<double>(n)};
  for (std::size_t j = 0; j < n; ++j) seq.gammas[j] = autocov(h, j);
  return seq;
}

namespace detail {

// log C_H as a jet in H.
inline Jet log_norming_constant(const Jet& h) {
  const double sp = std::sin(kPi * h.v);
  const double cp = std::cos(kPi * h.v);
  const Jet log_sin = chain(h, std::log(sp), kPi * cp / sp, -kPi * kPi / (sp * sp));
  const double z = 2.0 * h.v + 1.0;
  const Jet two_h_plus_one{z, 2.0 * h.d1, 2.0 * h.d2};
  const Jet log_gamma = chain(two_h_plus_one, std::lgamma(z), boost::math::digamma(z), boost::math::trigamma(z));
  return log_sin + log_gamma;
}

inline void check_ratio_domain(double alpha, double beta, double margin) {
  if (!(alpha - beta > -0.5 + margin))
    throw domain_error("divergent integral: need alpha - beta > -1/2 (alpha=" + std::to_string(alpha) +
                       ", beta=" + std::to_string(beta) + ")");
}

}  // namespace detail

/// F(alpha, beta) = (1/2 pi) int_T g_beta / g_alpha.
///
/// The |t|^{2(alpha-beta)} endpoint behaviour is removed by t = pi x^p with
/// p = 1/(1 + 2(alpha - beta)); what remains is bounded and is integrated by
/// adaptive Simpson.
inline double f_ratio_integral(SymbolParam alpha, SymbolParam beta, double tol = 1e-10) {
  const double a = alpha.value();
  const double b = beta.value();
  detail::check_ratio_domain(a, b, 0.0);
  if (a == b) return 1.0;
  const double sa = 2.0 * a + 2.0;
  const double sb = 2.0 * b + 2.0;
  const double p = 1.0 / (1.0 + 2.0 * (a - b));
  const double scale = p * unit_variance_constant(b + 0.5) / unit_variance_constant(a + 0.5) *
                       std::pow(kPi, 2.0 * (a - b));
  auto integrand = [&](double x) {
    if (x == 0.0) return scale;
    const double log_t = std::log(kPi) + p * std::log(x);
    const double t = std::exp(log_t);
    const double num = 1.0 + std::exp(sb * log_t) * image_sum(sb, t, kQuadratureTruncation);
    const double den = 1.0 + std::exp(sa * log_t) * image_sum(sa, t, kQuadratureTruncation);
    return scale * num / den;
  };
  try {
    return quad::adaptive_simpson(integrand, 0.0, 1.0, tol);
  } catch (const numeric_error& e) {
    throw numeric_error(std::string("f_ratio_integral: ") + e.what());
  }
}

/// F(alpha, beta) and its first two derivatives in alpha.
struct RatioDerivatives {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
};

/// Derivatives of F(., beta) at alpha with beta = h_hat - 1/2, obtained by
/// differentiating under the integral sign (jets in alpha) and integrating
/// with graded Gauss-Legendre, which tolerates the log t factors that
/// differentiation introduces at the endpoint.
inline RatioDerivatives f_ratio_derivatives(SymbolParam alpha, HurstParam h_hat) {
  const double a = alpha.value();
  const double b = h_hat.value() - 0.5;
  detail::check_ratio_domain(a, b, 1e-3);
  const double sb = 2.0 * b + 2.0;
  const double p = 1.0 / (1.0 + 2.0 * (a - b));
  const Jet A = Jet::variable(a);
  const Jet sa = A * Jet(2.0) + Jet(2.0);
  const Jet log_c_ratio = Jet(std::log(unit_variance_constant(b + 0.5))) -
                          detail::log_norming_constant(A + Jet(0.5));
  const Jet log_pi_term = (A - Jet(b)) * Jet(2.0 * std::log(kPi));
  const double log_pi = std::log(kPi);

  auto integrand = [&](double x) {
    const double log_x = std::log(x);
    const double log_t = log_pi + p * log_x;
    const double t = std::exp(log_t);
    // x^{2p(alpha - alpha0)}: unit value, derivatives from log x.
    const Jet x_power{1.0, 2.0 * p * log_x, 4.0 * p * p * log_x * log_x};
    const double num = 1.0 + std::exp(sb * log_t) * image_sum(sb, t, kQuadratureTruncation);
    const Jet den = Jet(1.0) + exp(sa * Jet(log_t)) * image_sum(sa, t, kQuadratureTruncation);
    const Jet log_integrand = log_c_ratio + log_pi_term + Jet(std::log(num)) - log(den);
    return exp(log_integrand) * x_power * Jet(p);
  };
  const Jet result = quad::graded_gauss_unit<Jet>(integrand);
  RatioDerivatives out{result.v, result.d1, result.d2};
  if (a == b) out.value = 1.0;
  return out;
}

/// log G(H) = (1/2 pi) int_T log f_H, the Szego constant. The log|2 sin(t/2)|
/// part integrates to zero and is dropped analytically.
inline double log_szego_constant(HurstParam h, double tol = 1e-13) {
  const double hv = h.value();
  const double s = 2.0 * hv + 1.0;
  auto integrand = [&](double t) {
    if (t == 0.0) return 0.0;
    return 0.5 * s * std::log(detail::sinc_half_sq(t)) +
           std::log1p(std::pow(t, s) * image_sum(s, t, kQuadratureTruncation));
  };
  double integral = 0.0;
  try {
    integral = quad::adaptive_simpson(integrand, 0.0, kPi, tol);
  } catch (const numeric_error& e) {
    throw numeric_error(std::string("log_szego_constant: ") + e.what());
  }
  return std::log(unit_variance_constant(hv)) + integral / kPi;
}

}  // namespace hurst
