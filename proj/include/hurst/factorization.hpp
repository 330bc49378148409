#pragma once

// Outer factorization of the centred symbol: 1/g_alpha = q_alpha conj(q_alpha)
// with q_alpha = w_alpha r_alpha, w_alpha(t) = (1 - e^{it})^alpha carrying the
// Fisher-Hartwig zero/pole and r_alpha the outer square root of the smooth
// remainder psi_alpha^2 = 1 / (g_alpha |2 sin(t/2)|^{2 alpha}).

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "hurst/error.hpp"
#include "hurst/fft.hpp"
#include "hurst/params.hpp"
#include "hurst/stats.hpp"
#include "hurst/symbols.hpp"

namespace hurst {

inline constexpr std::size_t kDefaultFactorGrid = std::size_t{1} << 16;

/// One-sided Fourier coefficients values[k], k = 0..K.
struct FourierCoeffs {
  std::vector<std::complex<double>> values;
  /// Largest negative-frequency coefficient relative to the largest
  /// coefficient; zero for an exactly analytic function.
  double anti_analytic = 0.0;
};

/// (-1)^k binom(alpha, k), the coefficients of (1 - z)^alpha.
inline std::vector<double> w_hat_sequence(double alpha, std::size_t k_max) {
  std::vector<double> w(k_max + 1);
  w[0] = 1.0;
  for (std::size_t k = 1; k <= k_max; ++k)
    w[k] = w[k - 1] * (static_cast<double>(k) - 1.0 - alpha) / static_cast<double>(k);
  return w;
}

inline double w_hat(SymbolParam alpha, std::size_t k) { return w_hat_sequence(alpha.value(), k)[k]; }

/// Conjugate function on the uniform grid t_j = 2 pi j / M: Fourier
/// multiplier -i sgn(k), so that H(cos) = sin.
inline std::vector<double> hilbert_transform(const std::vector<double>& samples) {
  const std::size_t m = samples.size();
  if (!fft::is_pow2(m) || m < 1024) throw domain_error("hilbert_transform: grid size must be a power of two >= 1024");
  fft::cvec z(samples.begin(), samples.end());
  fft::forward(z);
  z[0] = 0.0;
  z[m / 2] = 0.0;
  for (std::size_t k = 1; k < m / 2; ++k) {
    z[k] *= std::complex<double>(0.0, -1.0);
    z[m - k] *= std::complex<double>(0.0, 1.0);
  }
  fft::inverse(z);
  std::vector<double> out(m);
  for (std::size_t j = 0; j < m; ++j) out[j] = z[j].real();
  return out;
}

/// Closed-form conjugate of log|1 - e^{it}|^{-2 alpha} = -2 alpha log|2 sin(t/2)|,
/// namely alpha (pi - t) on (0, 2 pi), zero at t = 0.
inline double singular_log_conjugate(double alpha, double t) {
  t = std::fmod(t, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t == 0.0) return 0.0;
  return alpha * (kPi - t);
}

namespace detail {

inline std::vector<double> grid_nodes(std::size_t m, bool half_shift) {
  std::vector<double> t(m);
  for (std::size_t j = 0; j < m; ++j)
    t[j] = kTwoPi * (static_cast<double>(j) + (half_shift ? 0.5 : 0.0)) / static_cast<double>(m);
  return t;
}

}  // namespace detail

/// Samples of q = sqrt(f) exp(i H(log sqrt f)) on the same grid; q is
/// analytic with |q|^2 = f.
inline fft::cvec analytic_sqrt_samples(const std::vector<double>& f_samples) {
  std::vector<double> half_log(f_samples.size());
  for (std::size_t j = 0; j < f_samples.size(); ++j) {
    if (!(f_samples[j] > 0.0) || !std::isfinite(f_samples[j]))
      throw domain_error("analytic_sqrt: sample " + std::to_string(j) + " is not positive and finite");
    half_log[j] = 0.5 * std::log(f_samples[j]);
  }
  const std::vector<double> conj = hilbert_transform(half_log);
  fft::cvec q(f_samples.size());
  for (std::size_t j = 0; j < q.size(); ++j) q[j] = std::exp(std::complex<double>(half_log[j], conj[j]));
  return q;
}

/// Fourier coefficients of grid samples; with `half_shift` the samples sit
/// at t_j = 2 pi (j + 1/2) / M and the phase of the shift is removed.
inline fft::cvec grid_coefficients(fft::cvec samples, bool half_shift = false) {
  const std::size_t m = samples.size();
  fft::forward(samples);
  for (std::size_t k = 0; k < m; ++k) {
    samples[k] /= static_cast<double>(m);
    if (half_shift) {
      const double freq = k < m / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(m);
      samples[k] *= std::polar(1.0, kPi * freq / static_cast<double>(m));
    }
  }
  return samples;
}

/// Analytic square root of a strictly positive function given on a grid of
/// M = 2^p >= 1024 nodes. Returns coefficients 0..M/2 - 1. Use `half_shift`
/// for functions sampled off the node t = 0 (e.g. with a zero there).
inline FourierCoeffs analytic_sqrt(const std::vector<double>& f_samples, bool half_shift = false) {
  const fft::cvec coeffs = grid_coefficients(analytic_sqrt_samples(f_samples), half_shift);
  const std::size_t m = coeffs.size();
  FourierCoeffs out;
  out.values.assign(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(m / 2));
  double peak = 0.0, anti = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    peak = std::max(peak, std::abs(coeffs[k]));
    if (k > m / 2) anti = std::max(anti, std::abs(coeffs[k]));
  }
  out.anti_analytic = peak > 0.0 ? anti / peak : 0.0;
  return out;
}

/// Smooth part of g_alpha after removing |2 sin(t/2)|^{-2 alpha}.
struct SymbolSplit {
  double singular_exponent = 0.0;  // -2 alpha
  std::vector<double> smooth;      // psi_alpha^{-2} = g_alpha |2 sin(t/2)|^{2 alpha} on t_j = 2 pi j / M
};

/// psi^{-2}(t) = C [(|2 sin(t/2)|/t)^s + |2 sin(t/2)|^s R_s(t)], s = 2 alpha + 2,
/// which is continuous and positive with value C at t = 0.
inline double smooth_symbol_value(double alpha, double t) {
  t = detail::fold_frequency(t);
  const double s = 2.0 * alpha + 2.0;
  const double c = unit_variance_constant(alpha + 0.5);
  if (t == 0.0) return c;
  const double chord = 2.0 * std::sin(0.5 * t);
  const double ratio = std::pow(detail::sinc_half_sq(t), 0.5 * s);
  return c * (ratio + std::pow(chord, s) * image_sum(s, t, kQuadratureTruncation));
}

inline SymbolSplit split_symbol(SymbolParam alpha, std::size_t grid_size = kDefaultFactorGrid) {
  if (!fft::is_pow2(grid_size) || grid_size < 1024)
    throw domain_error("split_symbol: grid size must be a power of two >= 1024");
  SymbolSplit out;
  out.singular_exponent = -2.0 * alpha.value();
  out.smooth.resize(grid_size);
  const std::vector<double> t = detail::grid_nodes(grid_size, false);
  for (std::size_t j = 0; j < grid_size; ++j) out.smooth[j] = smooth_symbol_value(alpha.value(), t[j]);
  return out;
}

/// Numerical factorization q_alpha = w_alpha r_alpha on a grid.
struct SymbolFactorization {
  double alpha = 0.0;
  std::size_t grid = 0;
  fft::cvec r_samples;               // r on t_j = 2 pi j / M
  std::vector<double> r_hat;         // real parts of r coefficients, k = 0..M/4
  double r_hat_max_imag = 0.0;       // largest |Im r_hat(k)|
  std::vector<double> w_hat;         // k = 0..M/4
  std::vector<double> q_hat;         // (w_hat * r_hat)(k), k = 0..M/4
  double c_alpha = 0.0;              // r_alpha(0) = lim_{t->0} q w_{-alpha}
  double identity_error = 0.0;       // max_j | |q(t_j)|^2 g(t_j) - 1 |, t_j != 0
};

inline SymbolFactorization factorize_symbol(SymbolParam alpha, std::size_t grid = kDefaultFactorGrid) {
  const double a = alpha.value();
  const SymbolSplit split = split_symbol(alpha, grid);
  std::vector<double> psi_sq(grid);
  for (std::size_t j = 0; j < grid; ++j) psi_sq[j] = 1.0 / split.smooth[j];

  SymbolFactorization out;
  out.alpha = a;
  out.grid = grid;
  out.r_samples = analytic_sqrt_samples(psi_sq);
  const fft::cvec coeffs = grid_coefficients(out.r_samples);
  const std::size_t keep = grid / 4;
  out.r_hat.resize(keep + 1);
  for (std::size_t k = 0; k <= keep; ++k) {
    out.r_hat[k] = coeffs[k].real();
    out.r_hat_max_imag = std::max(out.r_hat_max_imag, std::abs(coeffs[k].imag()));
  }
  out.w_hat = w_hat_sequence(a, keep);
  out.q_hat.assign(keep + 1, 0.0);
  for (std::size_t k = 0; k <= keep; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j <= k; ++j) acc += out.w_hat[j] * out.r_hat[k - j];
    out.q_hat[k] = acc;
  }
  out.c_alpha = out.r_samples[0].real();

  const std::vector<double> t = detail::grid_nodes(grid, false);
  double worst = 0.0;
  for (std::size_t j = 1; j < grid; ++j) {
    const double w_mod_sq = std::pow(2.0 * std::abs(std::sin(0.5 * t[j])), 2.0 * a);
    const double q_mod_sq = w_mod_sq * std::norm(out.r_samples[j]);
    const double g = sinai_density(alpha.hurst(), t[j], kQuadratureTruncation);
    worst = std::max(worst, std::abs(q_mod_sq * g - 1.0));
  }
  out.identity_error = worst;
  return out;
}

/// Log-log regression of |values[k]| on k over [k_lo, k_hi], skipping zeros.
inline stats::LinearFit power_law_fit(const std::vector<double>& values, std::size_t k_lo, std::size_t k_hi) {
  std::vector<double> lx, ly;
  // Geometric sampling keeps each decade equally weighted.
  const double ratio = std::pow(static_cast<double>(k_hi) / static_cast<double>(k_lo), 1.0 / 200.0);
  double kf = static_cast<double>(k_lo);
  std::size_t last = 0;
  while (kf <= static_cast<double>(k_hi) * (1.0 + 1e-12)) {
    const std::size_t k = static_cast<std::size_t>(std::llround(kf));
    if (k != last && k < values.size() && values[k] != 0.0) {
      lx.push_back(std::log(static_cast<double>(k)));
      ly.push_back(std::log(std::abs(values[k])));
      last = k;
    }
    kf *= ratio;
  }
  return stats::linear_fit(lx, ly);
}

struct QCoefficientReport {
  double alpha = 0.0;
  double c_alpha = 0.0;
  double r_hat0 = 0.0;
  double exponent = 0.0;  // fitted decay of q_hat(k) - C_alpha w_hat(k)
  double target = 0.0;    // -(2 + alpha) + 0.2
  std::size_t k_lo = 0, k_hi = 0;
  double identity_error = 0.0;
  bool pass = false;
  std::string note;
};

/// Fits the decay of q_hat(k) - C_alpha w_hat(k) over k in [10^2, min(10^4, k_max)].
inline QCoefficientReport q_coefficient_check(SymbolParam alpha, std::size_t k_max = kDefaultFactorGrid / 4,
                                              std::size_t grid = kDefaultFactorGrid) {
  if (k_max > grid / 4) throw domain_error("q_coefficient_check: k_max must not exceed grid/4");
  if (k_max < 1000) throw domain_error("q_coefficient_check: k_max must be at least 1000");
  const SymbolFactorization fac = factorize_symbol(alpha, grid);
  std::vector<double> residual(k_max + 1);
  for (std::size_t k = 0; k <= k_max; ++k) residual[k] = fac.q_hat[k] - fac.c_alpha * fac.w_hat[k];
  QCoefficientReport rep;
  rep.alpha = alpha.value();
  rep.c_alpha = fac.c_alpha;
  rep.r_hat0 = fac.r_hat[0];
  rep.k_lo = 100;
  rep.k_hi = std::min<std::size_t>(10000, k_max);
  rep.exponent = power_law_fit(residual, rep.k_lo, rep.k_hi).slope;
  rep.target = -(2.0 + alpha.value()) + 0.2;
  rep.identity_error = fac.identity_error;
  rep.pass = rep.exponent <= rep.target && std::isfinite(rep.c_alpha) && rep.c_alpha != 0.0;
  if (rep.exponent > -1.0 - alpha.value() - 0.1) rep.note = "insufficient decay";
  return rep;
}

struct DecayReport {
  double alpha = 0.0;
  double exponent = 0.0;
  double target = 0.0;  // -3 - 2 alpha
  std::size_t k_lo = 0, k_hi = 0;
  double max_imag = 0.0;
  bool pass = false;
};

/// Fits |r_hat(k)| ~ k^p over the decade [k_max/10, k_max].
inline DecayReport r_coefficient_decay(SymbolParam alpha, std::size_t k_max = 1000,
                                       std::size_t grid = kDefaultFactorGrid) {
  if (k_max > grid / 4) throw domain_error("r_coefficient_decay: k_max must not exceed grid/4");
  if (k_max < 20) throw domain_error("r_coefficient_decay: k_max must be at least 20");
  const SymbolFactorization fac = factorize_symbol(alpha, grid);
  DecayReport rep;
  rep.alpha = alpha.value();
  rep.k_lo = k_max / 10;
  rep.k_hi = k_max;
  const double floor = 1e-13 * std::abs(fac.r_hat[0]);
  while (rep.k_hi > 2 * rep.k_lo && std::abs(fac.r_hat[rep.k_hi]) < floor) rep.k_hi = rep.k_hi * 3 / 4;
  if (rep.k_hi != k_max)
    warn("r_coefficient_decay: coefficients reach the rounding floor; window shrunk to k <= " +
         std::to_string(rep.k_hi));
  rep.exponent = power_law_fit(fac.r_hat, rep.k_lo, rep.k_hi).slope;
  rep.target = -3.0 - 2.0 * alpha.value();
  rep.max_imag = fac.r_hat_max_imag;
  rep.pass = std::abs(rep.exponent - rep.target) <= 0.3;
  return rep;
}

/// Empirical limit of k^{1+alpha} w_hat(k) against the two candidate
/// constants 1/Gamma(-alpha) and 1/Gamma(-1-alpha).
struct WHatAsymptotics {
  double alpha = 0.0;
  std::size_t k = 0;
  double empirical = 0.0;
  double inv_gamma_neg_alpha = 0.0;
  double inv_gamma_neg_one_minus_alpha = 0.0;
  bool matches_inv_gamma_neg_alpha = false;
  bool matches_inv_gamma_neg_one_minus_alpha = false;
};

inline WHatAsymptotics w_hat_asymptotics(SymbolParam alpha, std::size_t k = 100000) {
  const double a = alpha.value();
  if (a == 0.0) throw domain_error("w_hat_asymptotics: alpha must be nonzero");
  WHatAsymptotics out;
  out.alpha = a;
  out.k = k;
  out.empirical = std::pow(static_cast<double>(k), 1.0 + a) * w_hat_sequence(a, k)[k];
  out.inv_gamma_neg_alpha = 1.0 / boost::math::tgamma(-a);
  out.inv_gamma_neg_one_minus_alpha = 1.0 / boost::math::tgamma(-1.0 - a);
  auto close = [&](double c) { return std::abs(out.empirical / c - 1.0) <= 1e-2; };
  out.matches_inv_gamma_neg_alpha = close(out.inv_gamma_neg_alpha);
  out.matches_inv_gamma_neg_one_minus_alpha = close(out.inv_gamma_neg_one_minus_alpha);
  return out;
}

}  // namespace hurst
