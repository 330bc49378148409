#pragma once

// Exact simulation of fractional Gaussian noise by circulant embedding
// (Davies-Harte), a Cholesky sampler for cross-checks, path rescaling and
// CSV round-tripping.

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hurst/error.hpp"
#include "hurst/fft.hpp"
#include "hurst/params.hpp"
#include "hurst/symbols.hpp"

namespace hurst {

/// Eigenvalues at or above this (negative) level are clipped to zero.
inline constexpr double kEmbeddingClip = -1e-9;

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of replicate `index` derived from a master seed; distinct indices
/// give statistically independent streams.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t master, std::uint64_t index = 0) { return Rng(stream_seed(master, index)); }

/// Simulated increments Y_1..Y_n of fBm sampled at spacing `spacing`.
struct FgnPath {
  HurstParam h_true;
  std::size_t n = 0;
  double spacing = 0.0;
  std::vector<double> increments;
  std::uint64_t seed = 0;
};

/// xi = n^{h_used} Y.
struct RescaledSample {
  std::vector<double> xi;
  double h_used = 0.0;
};

/// Circulant embedding of the unit-spacing autocovariance of length n.
/// Holds the square-rooted spectrum so that repeated draws cost one FFT.
class CirculantSampler {
 public:
  CirculantSampler(HurstParam h, std::size_t n) : h_(h), n_(n) {
    if (n == 0) throw domain_error("CirculantSampler: n must be positive");
    const std::size_t m = fft::next_pow2(std::max<std::size_t>(n, 2));
    const std::size_t size = 2 * m;
    fft::cvec row(size);
    for (std::size_t k = 0; k <= m; ++k) row[k] = autocov(h, k);
    for (std::size_t k = m + 1; k < size; ++k) row[k] = row[size - k];
    fft::forward(row);
    root_.resize(size);
    min_eigenvalue_ = INFINITY;
    std::size_t clipped = 0;
    for (std::size_t k = 0; k < size; ++k) {
      double lambda = row[k].real();
      min_eigenvalue_ = std::min(min_eigenvalue_, lambda);
      if (lambda < 0.0) {
        if (lambda < kEmbeddingClip)
          throw numeric_error("embedding failed: circulant eigenvalue " + std::to_string(lambda) + " for H=" +
                              std::to_string(h.value()) + ", n=" + std::to_string(n));
        lambda = 0.0;
        ++clipped;
      }
      root_[k] = std::sqrt(lambda / static_cast<double>(size));
    }
    if (clipped > 0)
      warn("circulant embedding: clipped " + std::to_string(clipped) + " slightly negative eigenvalues (min " +
           std::to_string(min_eigenvalue_) + ")");
  }

  HurstParam h() const noexcept { return h_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t embedding_size() const noexcept { return root_.size(); }
  /// Smallest eigenvalue before clipping.
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

  /// One unit-spacing draw with covariance T_n(f_H).
  std::vector<double> draw(Rng& rng) const {
    std::normal_distribution<double> z;
    fft::cvec w(root_.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double re = z(rng);
      const double im = z(rng);
      w[k] = {root_[k] * re, root_[k] * im};
    }
    fft::forward(w);
    std::vector<double> out(n_);
    for (std::size_t j = 0; j < n_; ++j) out[j] = w[j].real();
    return out;
  }

 private:
  HurstParam h_;
  std::size_t n_;
  std::vector<double> root_;
  double min_eigenvalue_ = 0.0;
};

/// Increments of fBm on the grid t_j = j * spacing; spacing defaults to 1/n.
inline FgnPath sample_fgn(HurstParam h, std::size_t n, std::uint64_t seed, double spacing = 0.0) {
  if (n == 0) throw domain_error("sample_fgn: n must be positive");
  if (spacing == 0.0) spacing = 1.0 / static_cast<double>(n);
  if (!(spacing > 0.0)) throw domain_error("sample_fgn: spacing must be positive");
  Rng rng = make_rng(seed);
  std::vector<double> y = CirculantSampler(h, n).draw(rng);
  const double scale = std::pow(spacing, h.value());
  for (double& v : y) v *= scale;
  return {h, n, spacing, std::move(y), seed};
}

/// Reference sampler through the dense Cholesky factor, for n <= 512.
inline FgnPath sample_fgn_cholesky(HurstParam h, std::size_t n, std::uint64_t seed) {
  if (n == 0 || n > 512) throw domain_error("sample_fgn_cholesky: n must be in [1, 512]");
  Eigen::MatrixXd t(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) t(i, j) = autocov(h, i > j ? i - j : j - i);
  const Eigen::MatrixXd l = t.llt().matrixL();
  Rng rng = make_rng(seed);
  std::normal_distribution<double> z;
  Eigen::VectorXd e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = z(rng);
  const Eigen::VectorXd x = l * e;
  const double spacing = 1.0 / static_cast<double>(n);
  const double scale = std::pow(spacing, h.value());
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = scale * x[i];
  return {h, n, spacing, std::move(y), seed};
}

/// xi = n^h Y; h = 0 leaves the increments unchanged.
inline RescaledSample rescale(const std::vector<double>& increments, double h) {
  if (!(h >= 0.0 && h < 1.0)) throw domain_error("rescale: exponent must lie in [0,1)");
  const double factor = std::pow(static_cast<double>(increments.size()), h);
  RescaledSample out{increments, h};
  for (double& v : out.xi) v *= factor;
  return out;
}

inline RescaledSample rescale(const FgnPath& path, double h) { return rescale(path.increments, h); }

namespace detail {

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace detail

/// Header line `# fgn h=<h> n=<n> spacing=<s> seed=<seed>` then one
/// increment per line.
inline void write_fgn_csv(std::ostream& os, const FgnPath& path) {
  os << "# fgn h=" << detail::format_g17(path.h_true.value()) << " n=" << path.n
     << " spacing=" << detail::format_g17(path.spacing) << " seed=" << path.seed << '\n';
  for (double v : path.increments) os << detail::format_g17(v) << '\n';
  if (!os) throw std::runtime_error("write_fgn_csv: write failed");
}

/// Parsed data file: the increments and, when a header is present, its
/// metadata.
struct IncrementFile {
  std::vector<double> increments;
  bool has_header = false;
  double h = 0.0;
  std::size_t n = 0;
  double spacing = 0.0;
  std::uint64_t seed = 0;
};

inline IncrementFile read_increments(std::istream& is) {
  IncrementFile out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view view(line);
    while (!view.empty() && (view.back() == '\r' || view.back() == ' ')) view.remove_suffix(1);
    if (view.empty()) continue;
    if (view.front() == '#') {
      std::istringstream hs{std::string(view.substr(1))};
      std::string token;
      hs >> token;
      if (token != "fgn") continue;
      if (out.has_header) throw parse_error(lineno, "duplicate fgn header");
      out.has_header = true;
      bool seen_h = false, seen_n = false;
      while (hs >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) throw parse_error(lineno, "malformed header field '" + token + "'");
        const std::string key = token.substr(0, eq);
        const std::string val = token.substr(eq + 1);
        double num = 0.0;
        if (!detail::parse_double(val, num)) throw parse_error(lineno, "non-numeric header value '" + token + "'");
        if (key == "h") {
          out.h = num;
          seen_h = true;
        } else if (key == "n") {
          out.n = static_cast<std::size_t>(num);
          seen_n = true;
        } else if (key == "spacing") {
          out.spacing = num;
        } else if (key == "seed") {
          out.seed = std::stoull(val);
        }
      }
      if (!seen_h || !seen_n) throw parse_error(lineno, "fgn header needs h= and n=");
      continue;
    }
    double v = 0.0;
    if (!detail::parse_double(view, v))
      throw parse_error(lineno, "cannot parse increment '" + std::string(view) + "'");
    out.increments.push_back(v);
  }
  if (out.increments.empty()) throw parse_error(std::max<std::size_t>(lineno, 1), "no increments in input");
  if (out.has_header && out.n != out.increments.size())
    throw parse_error(lineno, "header declares n=" + std::to_string(out.n) + " but file has " +
                                  std::to_string(out.increments.size()) + " increments");
  return out;
}

/// Reads a file written by write_fgn_csv; the header is mandatory.
inline FgnPath read_fgn_csv(std::istream& is) {
  IncrementFile f = read_increments(is);
  if (!f.has_header) throw parse_error(1, "missing '# fgn' header");
  return {HurstParam(f.h), f.n, f.spacing, std::move(f.increments), f.seed};
}

}  // namespace hurst
