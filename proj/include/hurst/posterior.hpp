#pragma once

// Exact grid posterior of the Hurst index, estimators extracted from it, the
// Whittle surrogate posterior and the asymptotic normal summary.

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hurst/error.hpp"
#include "hurst/parallel.hpp"
#include "hurst/params.hpp"
#include "hurst/stats.hpp"
#include "hurst/symbols.hpp"
#include "hurst/toeplitz.hpp"

namespace hurst {

inline constexpr double kGridMin = 1e-3;
inline constexpr double kGridMax = 1.0 - 1e-3;

/// Log prior density on (0,1).
struct Prior {
  std::function<double(double)> log_density;

  /// Uniform on (0,1), clipped to [kGridMin, kGridMax].
  static Prior uniform() {
    return {[](double u) {
      return (u >= kGridMin && u <= kGridMax) ? 0.0 : -std::numeric_limits<double>::infinity();
    }};
  }
};

enum class QuadraticForm { exact, whittle };

/// Posterior of H on a set of nodes. log_density is unnormalized; the
/// normalized density at node i is exp(log_density[i] - log_norm).
struct PosteriorGrid {
  std::vector<double> nodes;
  std::vector<double> log_density;
  std::vector<double> weights;
  double log_norm = 0.0;
  /// log|T_n(f_u)| and <y, T_n(f_u)^{-1} y> per node (or the Whittle form).
  std::vector<double> logdet;
  std::vector<double> quad;
  std::size_t n = 0;
  /// Data identically zero; only prior and determinant shape the posterior.
  bool degenerate_data = false;
  /// n = 1: the likelihood is flat in u and the posterior equals the prior.
  bool prior_only = false;
  std::size_t dropped_nodes = 0;

  std::size_t size() const noexcept { return nodes.size(); }
  double density(std::size_t i) const { return std::exp(log_density[i] - log_norm); }
};

namespace detail {

struct NodeValue {
  double u = 0.0;
  double log_density = 0.0;
  double logdet = 0.0;
  double quad = 0.0;
  bool ok = false;
};

inline std::vector<double> trapezoid_weights(const std::vector<double>& x) {
  const std::size_t m = x.size();
  std::vector<double> w(m, 0.0);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double h = 0.5 * (x[i + 1] - x[i]);
    w[i] += h;
    w[i + 1] += h;
  }
  return w;
}

inline double log_sum_exp_weighted(const std::vector<double>& logs, const std::vector<double>& w) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : logs) peak = std::max(peak, v);
  if (!std::isfinite(peak)) throw numeric_error("posterior has no finite node value");
  double s = 0.0;
  for (std::size_t i = 0; i < logs.size(); ++i) s += w[i] * std::exp(logs[i] - peak);
  return peak + std::log(s);
}

inline std::vector<NodeValue> evaluate_nodes(std::span<const double> y, const std::vector<double>& nodes,
                                             const Prior& prior, QuadraticForm form, unsigned threads) {
  const std::size_t n = y.size();
  const double log_n = std::log(static_cast<double>(n));
  std::vector<NodeValue> out(nodes.size());
  parallel_for(nodes.size(), threads, [&](std::size_t i) {
    NodeValue& v = out[i];
    v.u = nodes[i];
    try {
      const HurstParam h(v.u);
      const AutocovSeq g = make_autocov(h, n);
      const LikelihoodTerms t = levinson_likelihood(g.gammas, y);
      v.logdet = t.logdet;
      v.quad = form == QuadraticForm::exact ? t.quad : whittle_quad_form(h, y);
      // n^{2u} Q in log space; Q = 0 for identically zero data.
      const double scaled_quad = v.quad > 0.0 ? std::exp(2.0 * v.u * log_n + std::log(v.quad)) : 0.0;
      v.log_density = prior.log_density(v.u) + static_cast<double>(n) * v.u * log_n - 0.5 * v.logdet - 0.5 * scaled_quad;
      v.ok = std::isfinite(v.log_density);
    } catch (const numeric_error& e) {
      warn("posterior: dropping node u=" + std::to_string(v.u) + ": " + e.what());
    }
  });
  return out;
}

inline PosteriorGrid assemble(std::vector<NodeValue> values, std::span<const double> y, std::size_t dropped) {
  std::sort(values.begin(), values.end(), [](const NodeValue& a, const NodeValue& b) { return a.u < b.u; });
  PosteriorGrid g;
  g.n = y.size();
  g.dropped_nodes = dropped;
  for (const NodeValue& v : values) {
    if (!v.ok) {
      ++g.dropped_nodes;
      continue;
    }
    g.nodes.push_back(v.u);
    g.log_density.push_back(v.log_density);
    g.logdet.push_back(v.logdet);
    g.quad.push_back(v.quad);
  }
  if (g.nodes.size() < 2) throw numeric_error("posterior: fewer than two nodes could be evaluated");
  g.weights = trapezoid_weights(g.nodes);
  g.log_norm = log_sum_exp_weighted(g.log_density, g.weights);
  g.degenerate_data = std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; });
  g.prior_only = g.n == 1;
  if (g.degenerate_data) warn("posterior: data vector is identically zero");
  return g;
}

inline void check_nodes(const std::vector<double>& nodes) {
  if (nodes.size() < 2) throw domain_error("posterior: need at least two nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!(nodes[i] >= kGridMin && nodes[i] <= kGridMax))
      throw domain_error("posterior: node " + std::to_string(nodes[i]) + " outside [1e-3, 1-1e-3]");
    if (i > 0 && !(nodes[i] > nodes[i - 1])) throw domain_error("posterior: nodes must be strictly increasing");
  }
}

inline std::vector<double> linspace(double a, double b, std::size_t m) {
  std::vector<double> x(m);
  for (std::size_t i = 0; i < m; ++i)
    x[i] = m == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(m - 1);
  return x;
}

}  // namespace detail

/// Posterior on the given nodes: log prior + n u log n - (1/2) log|T_n(f_u)|
/// - (1/2) n^{2u} <y, T_n(f_u)^{-1} y>, where y are the raw increments at
/// spacing 1/n. Nodes whose factorization fails are dropped with a warning.
inline PosteriorGrid log_posterior(std::span<const double> y, const std::vector<double>& nodes,
                                   const Prior& prior = Prior::uniform(), unsigned threads = default_threads(),
                                   QuadraticForm form = QuadraticForm::exact) {
  if (y.empty()) throw domain_error("posterior: empty data");
  detail::check_nodes(nodes);
  return detail::assemble(detail::evaluate_nodes(y, nodes, prior, form, threads), y, 0);
}

/// As log_posterior with the quadratic form replaced by <y, T_n(1/f_u) y>.
inline PosteriorGrid whittle_posterior(std::span<const double> y, const std::vector<double>& nodes,
                                       const Prior& prior = Prior::uniform(), unsigned threads = default_threads()) {
  return log_posterior(y, nodes, prior, threads, QuadraticForm::whittle);
}

struct MapEstimate {
  double value = 0.0;
  bool at_boundary = false;
};

/// Argmax node refined by the vertex of the parabola through it and its
/// neighbours. A maximum on the first or last node is flagged.
namespace detail {

inline MapEstimate parabolic_mode(const PosteriorGrid& g) {
  if (g.size() < 2) throw domain_error("map_estimate: grid has fewer than two nodes");
  const auto it = std::max_element(g.log_density.begin(), g.log_density.end());
  const std::size_t i = static_cast<std::size_t>(it - g.log_density.begin());
  if (i == 0 || i + 1 == g.size()) return {g.nodes[i], true};
  const double x0 = g.nodes[i - 1], x1 = g.nodes[i], x2 = g.nodes[i + 1];
  const double y0 = g.log_density[i - 1], y1 = g.log_density[i], y2 = g.log_density[i + 1];
  const double a = (x1 - x0) * (y1 - y2);
  const double b = (x1 - x2) * (y1 - y0);
  const double den = a - b;
  if (den == 0.0) return {x1, false};
  const double x = x1 - 0.5 * ((x1 - x0) * a - (x1 - x2) * b) / den;
  return {std::clamp(x, x0, x2), false};
}

}  // namespace detail

inline MapEstimate map_estimate(const PosteriorGrid& g) {
  const MapEstimate m = detail::parabolic_mode(g);
  if (m.at_boundary) warn("map_estimate: mode at boundary (u=" + std::to_string(m.value) + ")");
  return m;
}

struct PosteriorMoments {
  double mean = 0.0;
  double variance = 0.0;
  double sd() const { return std::sqrt(variance); }
};

inline PosteriorMoments posterior_moments(const PosteriorGrid& g) {
  PosteriorMoments m;
  for (std::size_t i = 0; i < g.size(); ++i) m.mean += g.weights[i] * g.density(i) * g.nodes[i];
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = g.nodes[i] - m.mean;
    m.variance += g.weights[i] * g.density(i) * d * d;
  }
  return m;
}

namespace detail {

// Inverse of the trapezoid CDF (piecewise-linear density) at probability p.
inline double trapezoid_quantile(const PosteriorGrid& g, double p) {
  const std::size_t m = g.size();
  std::vector<double> dens(m), cdf(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) dens[i] = g.density(i);
  for (std::size_t i = 1; i < m; ++i)
    cdf[i] = cdf[i - 1] + 0.5 * (g.nodes[i] - g.nodes[i - 1]) * (dens[i - 1] + dens[i]);
  const double target = p * cdf.back();
  if (target <= 0.0) return g.nodes.front();
  if (target >= cdf.back()) return g.nodes.back();
  const std::size_t i = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), target) - cdf.begin());
  const double h = g.nodes[i] - g.nodes[i - 1];
  const double r = target - cdf[i - 1];
  const double p0 = dens[i - 1];
  const double slope = (dens[i] - p0) / (2.0 * h);
  // p0 s + slope s^2 = r, in the cancellation-free form.
  const double disc = std::max(0.0, p0 * p0 + 4.0 * slope * r);
  const double denom = p0 + std::sqrt(disc);
  const double s = denom > 0.0 ? 2.0 * r / denom : h;
  return g.nodes[i - 1] + std::clamp(s, 0.0, h);
}

}  // namespace detail

/// Posterior probability of H <= t under the trapezoid (piecewise-linear)
/// density.
inline double posterior_cdf(const PosteriorGrid& g, double t) {
  if (t <= g.nodes.front()) return 0.0;
  if (t >= g.nodes.back()) return 1.0;
  double total = 0.0, below = 0.0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    const double x0 = g.nodes[i - 1], x1 = g.nodes[i];
    const double p0 = g.density(i - 1), p1 = g.density(i);
    const double mass = 0.5 * (x1 - x0) * (p0 + p1);
    total += mass;
    if (x1 <= t) {
      below += mass;
    } else if (x0 < t) {
      const double s = t - x0;
      below += p0 * s + 0.5 * (p1 - p0) * s * s / (x1 - x0);
    }
  }
  return below / total;
}

/// Central credible interval of probability `level`.
inline std::pair<double, double> credible_interval(const PosteriorGrid& g, double level) {
  if (!(level > 0.0 && level < 1.0)) throw domain_error("credible_interval: level must lie in (0,1)");
  const double tail = 0.5 * (1.0 - level);
  return {detail::trapezoid_quantile(g, tail), detail::trapezoid_quantile(g, 1.0 - tail)};
}

struct GridOptions {
  double lo = kGridMin;
  double hi = kGridMax;
  std::size_t coarse = 128;
  std::size_t refine_rounds = 2;
  std::size_t refine_nodes = 64;
  /// Half-width of each refinement window in cells of the previous round.
  double window_cells = 8.0;
  /// Required node count within near_mode_sds posterior sds of the mode.
  std::size_t min_nodes_near_mode = 32;
  double near_mode_sds = 5.0;
  unsigned threads = default_threads();

  void validate() const {
    if (!(lo >= kGridMin && hi <= kGridMax && lo < hi))
      throw domain_error("grid bounds must satisfy 1e-3 <= lo < hi <= 1-1e-3");
    if (coarse < 64) throw domain_error("coarse grid needs at least 64 nodes");
    if (refine_nodes < 3) throw domain_error("refinement needs at least 3 nodes per round");
  }
};

/// Coarse scan of [lo, hi], refinement rounds around the running mode, and
/// extra rounds scaled by the posterior sd until the mode is resolved.
inline PosteriorGrid adaptive_posterior(std::span<const double> y, const GridOptions& opt = {},
                                        const Prior& prior = Prior::uniform(),
                                        QuadraticForm form = QuadraticForm::exact) {
  if (y.empty()) throw domain_error("posterior: empty data");
  opt.validate();
  std::vector<detail::NodeValue> values;
  auto add = [&](std::vector<double> fresh) {
    std::vector<double> keep;
    for (double u : fresh) {
      u = std::clamp(u, opt.lo, opt.hi);
      const bool seen = std::any_of(values.begin(), values.end(),
                                    [&](const detail::NodeValue& v) { return std::abs(v.u - u) < 1e-13; });
      if (!seen && std::none_of(keep.begin(), keep.end(), [&](double k) { return std::abs(k - u) < 1e-13; }))
        keep.push_back(u);
    }
    auto more = detail::evaluate_nodes(y, keep, prior, form, opt.threads);
    values.insert(values.end(), more.begin(), more.end());
  };
  auto mode = [&] {
    double best = -std::numeric_limits<double>::infinity(), u = opt.lo;
    for (const auto& v : values)
      if (v.ok && v.log_density > best) {
        best = v.log_density;
        u = v.u;
      }
    return u;
  };

  add(detail::linspace(opt.lo, opt.hi, opt.coarse));
  double cell = (opt.hi - opt.lo) / static_cast<double>(opt.coarse - 1);
  for (std::size_t r = 0; r < opt.refine_rounds; ++r) {
    const double c = mode();
    const double half = opt.window_cells * cell;
    const double a = std::max(opt.lo, c - half), b = std::min(opt.hi, c + half);
    add(detail::linspace(a, b, opt.refine_nodes));
    cell = (b - a) / static_cast<double>(opt.refine_nodes - 1);
  }
  // Resolve the mode on the scale of the posterior itself.
  for (int extra = 0; extra < 3; ++extra) {
    const PosteriorGrid g = detail::assemble(values, y, 0);
    const double c = detail::parabolic_mode(g).value;
    const double sd = posterior_moments(g).sd();
    const std::size_t near = static_cast<std::size_t>(std::count_if(g.nodes.begin(), g.nodes.end(), [&](double u) {
      return std::abs(u - c) <= opt.near_mode_sds * sd;
    }));
    if (near >= opt.min_nodes_near_mode || !(sd > 0.0)) break;
    const double half = (opt.near_mode_sds + 1.0) * sd;
    add(detail::linspace(std::max(opt.lo, c - half), std::min(opt.hi, c + half), opt.refine_nodes));
  }
  return detail::assemble(std::move(values), y, 0);
}

// ---- asymptotic summary ----

/// F-hat(alpha) = F(alpha - 1/2, H-hat - 1/2) with two alpha-derivatives.
using RatioModel = std::function<RatioDerivatives(double alpha)>;

inline RatioModel exact_ratio_model(HurstParam h_hat) {
  return [h_hat](double alpha) { return f_ratio_derivatives(SymbolParam(alpha - 0.5), h_hat); };
}

/// F-hat identically one, the reference case with maximum at H-hat.
inline RatioModel unit_ratio_model() {
  return [](double) { return RatioDerivatives{1.0, 0.0, 0.0}; };
}

namespace detail {

inline void check_kappa_domain(double alpha, std::size_t n, HurstParam h_hat) {
  if (n < 2) throw domain_error("kappa: n must be at least 2");
  if (!(alpha > std::max(h_hat.value() - 0.5, 0.0) && alpha < 1.0))
    throw domain_error("kappa: alpha=" + std::to_string(alpha) + " outside (max(H-hat - 1/2, 0), 1)");
}

}  // namespace detail

/// kappa_n(alpha) = n alpha log n - (n/2) n^{2(alpha - H-hat)} F-hat(alpha).
inline double kappa(double alpha, std::size_t n, HurstParam h_hat, const RatioModel& model) {
  detail::check_kappa_domain(alpha, n, h_hat);
  const double nn = static_cast<double>(n);
  const double log_n = std::log(nn);
  return nn * alpha * log_n - 0.5 * nn * std::exp(2.0 * (alpha - h_hat.value()) * log_n) * model(alpha).value;
}

inline double kappa(double alpha, std::size_t n, HurstParam h_hat) {
  return kappa(alpha, n, h_hat, exact_ratio_model(h_hat));
}

/// n log n (1 - n^{2(alpha - H-hat)} phi_n(alpha)), phi_n = F + F'/(2 log n).
inline double kappa_prime(double alpha, std::size_t n, HurstParam h_hat, const RatioModel& model) {
  detail::check_kappa_domain(alpha, n, h_hat);
  const double nn = static_cast<double>(n);
  const double log_n = std::log(nn);
  const RatioDerivatives f = model(alpha);
  const double phi = f.value + f.first / (2.0 * log_n);
  return nn * log_n * (1.0 - std::exp(2.0 * (alpha - h_hat.value()) * log_n) * phi);
}

inline double kappa_prime(double alpha, std::size_t n, HurstParam h_hat) {
  return kappa_prime(alpha, n, h_hat, exact_ratio_model(h_hat));
}

/// -n log^2 n n^{2(alpha - H-hat)} psi_n(alpha),
/// psi_n = 2 phi_n + F'/log n + F''/(2 log^2 n).
inline double kappa_second(double alpha, std::size_t n, HurstParam h_hat, const RatioModel& model) {
  detail::check_kappa_domain(alpha, n, h_hat);
  const double nn = static_cast<double>(n);
  const double log_n = std::log(nn);
  const RatioDerivatives f = model(alpha);
  const double phi = f.value + f.first / (2.0 * log_n);
  const double psi = 2.0 * phi + f.first / log_n + f.second / (2.0 * log_n * log_n);
  return -nn * log_n * log_n * std::exp(2.0 * (alpha - h_hat.value()) * log_n) * psi;
}

inline double kappa_second(double alpha, std::size_t n, HurstParam h_hat) {
  return kappa_second(alpha, n, h_hat, exact_ratio_model(h_hat));
}

struct AsymptoticSummary {
  std::size_t n = 0;
  double h_hat = 0.0;
  double alpha_n = 0.0;
  double c_n = 0.0;
  /// 1 / (sqrt(c_n n) log n)
  double predicted_sd = 0.0;
  /// (alpha_-(n), alpha_+(n)) before clipping to the domain.
  std::pair<double, double> bracket;
  /// Extremes of F-hat over (H-hat - 1/2 + eps, 1).
  double f_min = 0.0;
  double f_max = 0.0;
  /// log 2 + log max(f_max, 1/f_min); |alpha_n - H-hat| <= M / log^2 n.
  double m_const = 0.0;
  bool widened = false;
};

/// Root alpha_n of kappa_n' inside the bracket
/// [H-hat - (log 2 + log M(F))/log n, H-hat + (log 2 - log m(F))/log n],
/// and the curvature c_n = -kappa_n''(alpha_n) / (2 n log^2 n).
inline AsymptoticSummary solve_alpha_n(std::size_t n, HurstParam h_hat, double eps, const RatioModel& model) {
  if (n < 8) throw domain_error("solve_alpha_n: n must be at least 8");
  if (!(eps > 0.0 && eps < 0.5)) throw domain_error("solve_alpha_n: eps must lie in (0, 1/2)");
  const double h = h_hat.value();
  const double lo_dom = std::max(h - 0.5 + eps, kGridMin);
  const double hi_dom = kGridMax;
  const double log_n = std::log(static_cast<double>(n));

  // F-hat is convex: scan, then polish the minimum.
  const auto scan = detail::linspace(lo_dom, hi_dom, 41);
  std::vector<double> fv(scan.size());
  for (std::size_t i = 0; i < scan.size(); ++i) fv[i] = model(scan[i]).value;
  const std::size_t imin = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  const double f_max = *std::max_element(fv.begin(), fv.end());
  double f_min = fv[imin];
  {
    const double a = scan[imin == 0 ? 0 : imin - 1];
    const double b = scan[std::min(imin + 1, scan.size() - 1)];
    std::uintmax_t iters = 100;
    const auto r = boost::math::tools::brent_find_minima([&](double x) { return model(x).value; }, a, b, 40, iters);
    f_min = std::min(f_min, r.second);
  }
  if (!(f_min > 0.0)) throw numeric_error("solve_alpha_n: F-hat minimum is not positive");

  AsymptoticSummary s;
  s.n = n;
  s.h_hat = h;
  s.f_min = f_min;
  s.f_max = f_max;
  s.m_const = std::log(2.0) + std::log(std::max(f_max, 1.0 / f_min));
  s.bracket = {h - (std::log(2.0) + std::log(f_max)) / log_n, h + (std::log(2.0) - std::log(f_min)) / log_n};

  auto kp = [&](double a) { return kappa_prime(a, n, h_hat, model); };
  double a = std::max(s.bracket.first, lo_dom);
  double b = std::min(s.bracket.second, hi_dom);
  if (!(kp(a) > 0.0 && kp(b) < 0.0)) {
    s.widened = true;
    const double wa = h - 2.0 * (h - s.bracket.first);
    const double wb = h + 2.0 * (s.bracket.second - h);
    a = std::max(wa, lo_dom);
    b = std::min(wb, hi_dom);
    warn("solve_alpha_n: no sign change on the bracket, widening once");
    if (!(kp(a) > 0.0 && kp(b) < 0.0))
      throw numeric_error("solve_alpha_n: kappa' has no sign change on the widened bracket for n=" +
                          std::to_string(n));
  }
  std::uintmax_t iters = 200;
  const auto root = boost::math::tools::toms748_solve(kp, a, b, boost::math::tools::eps_tolerance<double>(50), iters);
  s.alpha_n = 0.5 * (root.first + root.second);
  s.c_n = -kappa_second(s.alpha_n, n, h_hat, model) / (2.0 * static_cast<double>(n) * log_n * log_n);
  s.predicted_sd = 1.0 / (std::sqrt(s.c_n * static_cast<double>(n)) * log_n);
  return s;
}

inline AsymptoticSummary solve_alpha_n(std::size_t n, HurstParam h_hat, double eps = 0.05) {
  return solve_alpha_n(n, h_hat, eps, exact_ratio_model(h_hat));
}

/// Phi((t - alpha_n) sqrt(c_n n) log n)
inline double normal_approx_cdf(double t, const AsymptoticSummary& s, std::size_t n) {
  const double nn = static_cast<double>(n);
  return stats::normal_cdf((t - s.alpha_n) * std::sqrt(s.c_n * nn) * std::log(nn));
}

}  // namespace hurst
