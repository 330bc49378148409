#pragma once

// Symmetric positive definite Toeplitz systems T_n(f) generated by an
// autocovariance sequence. The primary factorization is Levinson-Durbin:
// the prediction-error variances give the determinant, and the order-m
// predictors are the rows of the unit lower triangular L in
// T^{-1} = L^T D^{-1} L. Predictors are regenerated from the stored
// reflection coefficients on demand, so memory stays O(n).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hurst/error.hpp"
#include "hurst/fft.hpp"
#include "hurst/params.hpp"
#include "hurst/symbols.hpp"

namespace hurst {

/// Reflection coefficients at or beyond this magnitude switch the
/// factorization to dense Cholesky.
inline constexpr double kReflectionBreakdown = 1.0 - 1e-12;

namespace detail {

// Order-m predictor update phi^{(m)} from phi^{(m-1)} and kappa_m, in place.
// phi is 1-based: phi[1..m].
inline void levinson_update(std::vector<double>& phi, std::size_t m, double kappa) {
  std::size_t i = 1;
  std::size_t j = m - 1;
  while (i < j) {
    const double a = phi[i];
    const double b = phi[j];
    phi[i] = a - kappa * b;
    phi[j] = b - kappa * a;
    ++i;
    --j;
  }
  if (i == j) phi[i] *= 1.0 - kappa;
  phi[m] = kappa;
}

// sum_{k=1}^{len} a[k] b_end[-k], with independent partial sums so the
// loop pipelines without reassociation flags.
inline double reverse_dot(const double* a, const double* b_end, std::size_t len) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t k = 1;
  for (; k + 3 <= len; k += 4) {
    s0 += a[k] * b_end[-static_cast<std::ptrdiff_t>(k)];
    s1 += a[k + 1] * b_end[-static_cast<std::ptrdiff_t>(k + 1)];
    s2 += a[k + 2] * b_end[-static_cast<std::ptrdiff_t>(k + 2)];
    s3 += a[k + 3] * b_end[-static_cast<std::ptrdiff_t>(k + 3)];
  }
  for (; k <= len; ++k) s0 += a[k] * b_end[-static_cast<std::ptrdiff_t>(k)];
  return (s0 + s1) + (s2 + s3);
}

inline double predictor_dot(const std::vector<double>& phi, std::size_t m, std::span<const double> v) {
  // sum_{k=1}^m phi_k v_{m-k}
  return reverse_dot(phi.data(), v.data() + m, m);
}

inline Eigen::MatrixXd dense_toeplitz(std::span<const double> gammas, std::size_t n) {
  Eigen::MatrixXd t(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) t(i, j) = gammas[i > j ? i - j : j - i];
  return t;
}

// Lower Cholesky factor; reports the 1-based order of the first
// non-positive pivot.
inline Eigen::MatrixXd dense_cholesky(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0) || !std::isfinite(d))
      throw not_spd_error(static_cast<std::size_t>(j + 1),
                          "Toeplitz matrix is not SPD: leading minor of order " + std::to_string(j + 1) +
                              " is not positive");
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    if (j + 1 < n) {
      l.col(j).tail(n - j - 1) =
          (a.col(j).tail(n - j - 1) - l.bottomRows(n - j - 1).leftCols(j) * l.row(j).head(j).transpose()) / ljj;
    }
  }
  return l;
}

}  // namespace detail

class ToeplitzSystem;
ToeplitzSystem build_system(const AutocovSeq& gammas, std::size_t n);
ToeplitzSystem build_system(std::span<const double> gammas, std::size_t n);

/// Factorized SPD Toeplitz matrix. Immutable after construction.
class ToeplitzSystem {
 public:
  std::size_t size() const noexcept { return n_; }
  const std::vector<double>& gammas() const noexcept { return gammas_; }
  /// kappa_1 .. kappa_{n-1}; shorter when the dense fallback was taken.
  const std::vector<double>& reflection() const noexcept { return reflection_; }
  /// One-step prediction-error variances sigma^2_0 .. sigma^2_{n-1}.
  const std::vector<double>& pred_var() const noexcept { return pred_var_; }
  double logdet() const noexcept { return logdet_; }
  bool dense_fallback() const noexcept { return dense_; }

  /// <y, T^{-1} y>
  double quad_form(std::span<const double> y) const {
    check_dim(y.size());
    if (dense_) {
      Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(y.data(), n_);
      chol_.triangularView<Eigen::Lower>().solveInPlace(z);
      return z.squaredNorm();
    }
    double q = 0.0;
    std::vector<double> phi(n_ + 1, 0.0);
    for (std::size_t m = 0; m < n_; ++m) {
      if (m > 0) detail::levinson_update(phi, m, reflection_[m - 1]);
      const double e = y[m] - detail::predictor_dot(phi, m, y);
      q += e * e / pred_var_[m];
    }
    return q;
  }

  /// x = T^{-1} b
  std::vector<double> solve(std::span<const double> b) const {
    check_dim(b.size());
    std::vector<double> x(n_, 0.0);
    if (dense_) {
      Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(b.data(), n_);
      chol_.triangularView<Eigen::Lower>().solveInPlace(z);
      chol_.transpose().triangularView<Eigen::Upper>().solveInPlace(z);
      std::copy(z.data(), z.data() + n_, x.begin());
      return x;
    }
    std::vector<double> phi(n_ + 1, 0.0);
    for (std::size_t m = 0; m < n_; ++m) {
      if (m > 0) detail::levinson_update(phi, m, reflection_[m - 1]);
      const double v = (b[m] - detail::predictor_dot(phi, m, b)) / pred_var_[m];
      x[m] += v;
      for (std::size_t k = 1; k <= m; ++k) x[m - k] -= phi[k] * v;
    }
    return x;
  }

  /// (T^{-1})_{ij} with 1-based indices.
  double inverse_entry(std::size_t i, std::size_t j) const {
    if (i < 1 || j < 1 || i > n_ || j > n_)
      throw domain_error("inverse_entry: index (" + std::to_string(i) + "," + std::to_string(j) +
                         ") out of range for n=" + std::to_string(n_));
    std::vector<double> unit(n_, 0.0);
    unit[j - 1] = 1.0;
    return solve(unit)[i - 1];
  }

 private:
  friend ToeplitzSystem build_system(std::span<const double> gammas, std::size_t n);

  void check_dim(std::size_t m) const {
    if (m != n_)
      throw domain_error("dimension mismatch: vector of length " + std::to_string(m) + " for n=" +
                         std::to_string(n_));
  }

  std::size_t n_ = 0;
  std::vector<double> gammas_;
  std::vector<double> reflection_;
  std::vector<double> pred_var_;
  double logdet_ = 0.0;
  bool dense_ = false;
  Eigen::MatrixXd chol_;
};

/// Levinson-Durbin factorization of T_n built from gammas[0..n-1], with a
/// dense Cholesky fallback once a reflection coefficient nears the unit
/// circle. Throws not_spd_error naming the first failing order.
inline ToeplitzSystem build_system(std::span<const double> gammas, std::size_t n) {
  if (n == 0) throw domain_error("build_system: n must be positive");
  if (gammas.size() < n)
    throw domain_error("build_system: need " + std::to_string(n) + " lags, got " + std::to_string(gammas.size()));
  ToeplitzSystem sys;
  sys.n_ = n;
  sys.gammas_.assign(gammas.begin(), gammas.begin() + static_cast<std::ptrdiff_t>(n));
  if (!(gammas[0] > 0.0)) throw not_spd_error(1, "Toeplitz matrix is not SPD: gamma(0) <= 0");
  sys.pred_var_.assign(n, 0.0);
  sys.reflection_.reserve(n > 0 ? n - 1 : 0);
  sys.pred_var_[0] = gammas[0];
  std::vector<double> phi(n + 1, 0.0);
  for (std::size_t m = 1; m < n; ++m) {
    const double acc = gammas[m] - detail::reverse_dot(phi.data(), gammas.data() + m, m - 1);
    const double kappa = acc / sys.pred_var_[m - 1];
    if (!(std::abs(kappa) < kReflectionBreakdown)) {
      const Eigen::MatrixXd t = detail::dense_toeplitz(gammas, n);
      sys.chol_ = detail::dense_cholesky(t);
      sys.dense_ = true;
      for (std::size_t j = 0; j < n; ++j) sys.pred_var_[j] = sys.chol_(j, j) * sys.chol_(j, j);
      break;
    }
    sys.reflection_.push_back(kappa);
    detail::levinson_update(phi, m, kappa);
    sys.pred_var_[m] = sys.pred_var_[m - 1] * (1.0 - kappa * kappa);
  }
  double logdet = 0.0;
  for (double v : sys.pred_var_) logdet += std::log(v);
  sys.logdet_ = logdet;
  return sys;
}

inline ToeplitzSystem build_system(const AutocovSeq& gammas, std::size_t n) {
  return build_system(std::span<const double>(gammas.gammas), n);
}

inline double quad_form(const ToeplitzSystem& sys, std::span<const double> y) { return sys.quad_form(y); }

inline double inverse_entry(const ToeplitzSystem& sys, std::size_t i, std::size_t j) {
  return sys.inverse_entry(i, j);
}

/// log|T_n| and <y, T_n^{-1} y> in a single Levinson pass without keeping
/// the factorization; n = y.size().
struct LikelihoodTerms {
  double logdet = 0.0;
  double quad = 0.0;
};

inline LikelihoodTerms levinson_likelihood(std::span<const double> gammas, std::span<const double> y) {
  const std::size_t n = y.size();
  if (n == 0) throw domain_error("levinson_likelihood: empty data");
  if (gammas.size() < n) throw domain_error("levinson_likelihood: autocovariance shorter than data");
  if (!(gammas[0] > 0.0)) throw not_spd_error(1, "Toeplitz matrix is not SPD: gamma(0) <= 0");
  std::vector<double> phi(n + 1, 0.0);
  double sigma2 = gammas[0];
  LikelihoodTerms out{std::log(sigma2), y[0] * y[0] / sigma2};
  for (std::size_t m = 1; m < n; ++m) {
    const double acc = gammas[m] - detail::reverse_dot(phi.data(), gammas.data() + m, m - 1);
    const double kappa = acc / sigma2;
    if (!(std::abs(kappa) < kReflectionBreakdown)) {
      const ToeplitzSystem sys = build_system(gammas, n);
      return {sys.logdet(), sys.quad_form(y)};
    }
    detail::levinson_update(phi, m, kappa);
    sigma2 *= 1.0 - kappa * kappa;
    const double e = y[m] - detail::predictor_dot(phi, m, y);
    out.logdet += std::log(sigma2);
    out.quad += e * e / sigma2;
  }
  return out;
}

/// Fourier coefficients c_0..c_{n-1} of 1/f_H from a midpoint grid of size
/// `grid` (no node at lambda = 0).
inline std::vector<double> reciprocal_density_coeffs(HurstParam h, std::size_t n, std::size_t grid,
                                                     SinaiTruncation trunc) {
  fft::cvec a(grid);
  for (std::size_t j = 0; j < grid; ++j) {
    const double t = kTwoPi * (static_cast<double>(j) + 0.5) / static_cast<double>(grid);
    a[j] = 1.0 / sinai_density(h, t, trunc);
  }
  fft::forward(a);
  std::vector<double> c(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double phase = -kPi * static_cast<double>(k) / static_cast<double>(grid);
    c[k] = (a[k] * std::polar(1.0, phase)).real() / static_cast<double>(grid);
  }
  return c;
}

/// Whittle surrogate <y, T_n(1/f_H) y>. The reciprocal density is
/// transformed on a midpoint grid of at least 8n nodes; a warning is emitted
/// when halving the grid moves the coefficients by more than 1e-6 of c_0.
inline double whittle_quad_form(HurstParam h, std::span<const double> y,
                                SinaiTruncation trunc = kQuadratureTruncation) {
  const std::size_t n = y.size();
  if (n == 0) throw domain_error("whittle_quad_form: empty data");
  if (h.value() == 0.5) {
    double s = 0.0;
    for (double v : y) s += v * v;
    return s;
  }
  const std::size_t grid = fft::next_pow2(std::max<std::size_t>(8 * n, 1024));
  const std::vector<double> c = reciprocal_density_coeffs(h, n, grid, trunc);
  const std::vector<double> coarse = reciprocal_density_coeffs(h, n, grid / 2, trunc);
  double drift = 0.0;
  for (std::size_t k = 0; k < n; ++k) drift = std::max(drift, std::abs(c[k] - coarse[k]));
  if (drift > 1e-6 * std::abs(c[0]))
    warn("whittle_quad_form: grid of " + std::to_string(grid) + " nodes under-resolves 1/f for H=" +
         std::to_string(h.value()) + " (coefficient drift " + std::to_string(drift) + ")");

  // Lagged products r_d = sum_j y_j y_{j+d} via zero-padded transform.
  const std::size_t m = fft::next_pow2(2 * n);
  fft::cvec z(m, {0.0, 0.0});
  for (std::size_t j = 0; j < n; ++j) z[j] = y[j];
  fft::forward(z);
  for (auto& v : z) v = std::norm(v);
  fft::inverse(z);
  double q = c[0] * z[0].real();
  for (std::size_t d = 1; d < n; ++d) q += 2.0 * c[d] * z[d].real();
  return q;
}

/// Parameters of the inverse-entry kernel: alpha nonzero in (-1/2, 1/2).
struct InverseKernelSpec {
  SymbolParam alpha;
  std::size_t n;

  void validate() const {
    if (alpha.value() == 0.0) throw domain_error("inverse kernel undefined for alpha = 0");
    if (n < 2) throw domain_error("inverse kernel needs n >= 2");
  }
};

namespace detail {

// E_1 + E_2 on the triangle y >= max(x, 1-x).
inline double inverse_kernel_triangle(double x, double y, double alpha, double n) {
  if (y < 0.5 * (x + 1.0)) {
    const double d = std::max(std::abs(y - x), 1.0 / n);
    return std::pow(d, -1.0 + 2.0 * alpha);
  }
  return std::pow(y - x, -1.0 + alpha) * std::pow(x, alpha) * std::pow(1.0 - y, alpha);
}

// Symmetric extension invariant under (x, y) -> (1-x, 1-y).
inline double inverse_kernel_extend(double x, double y, double alpha, double n) {
  const double xt = 1.0 - x;
  if (y >= std::max(x, xt)) return inverse_kernel_triangle(x, y, alpha, n);
  if (xt <= y && y < x) return inverse_kernel_triangle(y, x, alpha, n);
  if (x <= y && y < xt) return inverse_kernel_triangle(1.0 - y, xt, alpha, n);
  return inverse_kernel_triangle(xt, 1.0 - y, alpha, n);
}

inline double scaled_index(std::size_t i, std::size_t n) {
  const std::size_t clamped = std::min(std::max<std::size_t>(i, 1), n - 1);
  return static_cast<double>(clamped) / static_cast<double>(n);
}

}  // namespace detail

/// Predicted magnitude of (T_n(g_{-alpha})^{-1})_{ij}, 1-based indices:
/// 1 on the diagonal, n^{-1+2 alpha} S(E_1 + E_2)(x, y) off it, with
/// x = clamp(i, 1, n-1)/n and likewise for y.
inline double inverse_kernel_prediction(const InverseKernelSpec& spec, std::size_t i, std::size_t j) {
  spec.validate();
  if (i < 1 || j < 1 || i > spec.n || j > spec.n) throw domain_error("inverse_kernel_prediction: index out of range");
  if (i == j) return 1.0;
  const double a = spec.alpha.value();
  const double n = static_cast<double>(spec.n);
  const double x = detail::scaled_index(i, spec.n);
  const double y = detail::scaled_index(j, spec.n);
  return std::pow(n, -1.0 + 2.0 * a) * detail::inverse_kernel_extend(x, y, a, n);
}

}  // namespace hurst
