#pragma once

// Moments of Gaussian quadratic forms X = <xi, A xi>, xi ~ N(0, C).
//
// Theta(n) = E X^n is generated from the traces R_j = Tr((AC)^j) by a
// linear recursion; Psi(N) = E (X - EX)^N is the binomial recentring of
// Theta and also has a closed representation over compositions of N into
// parts >= 2. An Isserlis pairing sum provides an independent oracle.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "hurst/error.hpp"

namespace hurst {

/// Symmetric A and SPD C of equal dimension. A is symmetrized on
/// construction; C must admit a Cholesky factorization.
class QuadFormInstance {
 public:
  QuadFormInstance(Eigen::MatrixXd a, Eigen::MatrixXd c) : a_(std::move(a)), c_(std::move(c)) {
    if (a_.rows() != a_.cols() || c_.rows() != c_.cols() || a_.rows() != c_.rows() || a_.rows() == 0)
      throw domain_error("QuadFormInstance: A and C must be square of equal positive dimension");
    a_ = 0.5 * (a_ + a_.transpose()).eval();
    Eigen::LLT<Eigen::MatrixXd> llt(c_);
    if (llt.info() != Eigen::Success) throw domain_error("QuadFormInstance: covariance is not SPD");
  }

  const Eigen::MatrixXd& a() const noexcept { return a_; }
  const Eigen::MatrixXd& c() const noexcept { return c_; }
  Eigen::Index dim() const noexcept { return a_.rows(); }

  /// C^{1/2} A C^{1/2} with the symmetric square root.
  Eigen::MatrixXd whitened() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c_);
    const Eigen::MatrixXd root = eig.operatorSqrt();
    return root * a_ * root;
  }

 private:
  Eigen::MatrixXd a_;
  Eigen::MatrixXd c_;
};

/// r[j] = Tr((AC)^j) for j = 0..n_max (r[0] is the dimension).
inline std::vector<double> trace_powers(const QuadFormInstance& inst, int n_max) {
  if (n_max < 1) throw domain_error("trace_powers: n_max must be >= 1");
  const Eigen::MatrixXd ac = inst.a() * inst.c();
  std::vector<double> r(n_max + 1);
  r[0] = static_cast<double>(inst.dim());
  Eigen::MatrixXd power = ac;
  for (int j = 1; j <= n_max; ++j) {
    r[j] = power.trace();
    if (j < n_max) power = (power * ac).eval();
  }
  return r;
}

/// Theta(0..n_max): Theta(0) = 1,
/// Theta(n) = sum_{j=1}^n 2^{j-1} (n-1)_{j-1} R_j Theta(n-j)
/// with the falling factorial (n-1)_{j-1}.
inline std::vector<double> theta_recursion(const std::vector<double>& r, int n_max) {
  if (n_max < 0 || static_cast<int>(r.size()) <= n_max)
    throw domain_error("theta_recursion: trace powers must cover 1..n_max");
  std::vector<double> theta(n_max + 1, 0.0);
  theta[0] = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    double acc = 0.0;
    double coeff = 1.0;  // 2^{j-1} (n-1)_{j-1}
    for (int j = 1; j <= n; ++j) {
      acc += coeff * r[j] * theta[n - j];
      coeff *= 2.0 * (n - j);
    }
    theta[n] = acc;
  }
  return theta;
}

/// Psi(0..n_max), Psi(N) = sum_n binom(N, n) (-1)^{N-n} Theta(n) R_1^{N-n}.
inline std::vector<double> psi_direct(const std::vector<double>& theta, double r1, int n_max) {
  if (n_max < 0 || static_cast<int>(theta.size()) <= n_max)
    throw domain_error("psi_direct: theta must cover 0..n_max");
  std::vector<double> psi(n_max + 1, 0.0);
  for (int big_n = 0; big_n <= n_max; ++big_n) {
    double acc = 0.0;
    double binom = 1.0;
    for (int n = 0; n <= big_n; ++n) {
      const double sign = ((big_n - n) % 2 == 0) ? 1.0 : -1.0;
      acc += binom * sign * theta[n] * std::pow(r1, big_n - n);
      binom = binom * (big_n - n) / (n + 1);
    }
    psi[big_n] = acc;
  }
  return psi;
}

/// A word of positive integers k_1..k_m.
struct Composition {
  std::vector<int> parts;

  int length() const noexcept { return static_cast<int>(parts.size()); }
  /// s_0 = 0, s_j = k_1 + ... + k_j.
  std::vector<int> partial_sums() const {
    std::vector<int> s(parts.size() + 1, 0);
    for (std::size_t j = 0; j < parts.size(); ++j) s[j + 1] = s[j] + parts[j];
    return s;
  }
  int total() const noexcept { return std::accumulate(parts.begin(), parts.end(), 0); }
  int ones() const noexcept { return static_cast<int>(std::count(parts.begin(), parts.end(), 1)); }
  /// Membership in J_l(m, n): length m, sum n, exactly l parts equal to one.
  bool in_class(int l, int m, int n) const noexcept { return length() == m && total() == n && ones() == l; }

  /// log c(k) = log((s_m - 1)!) - sum_{j=2}^m log(s_m - s_{j-1}).
  double log_coefficient() const {
    const std::vector<int> s = partial_sums();
    const int m = length();
    const int big_n = s[m];
    double out = std::lgamma(static_cast<double>(big_n));
    for (int j = 2; j <= m; ++j) out -= std::log(static_cast<double>(big_n - s[j - 1]));
    return out;
  }
};

/// All compositions of `total` into `length` parts, each >= min_part, in
/// lexicographic order.
inline std::vector<Composition> enumerate_compositions(int total, int length, int min_part = 1) {
  std::vector<Composition> out;
  if (length <= 0 || total < length * min_part) return out;
  std::vector<int> word(length);
  std::function<void(int, int)> fill = [&](int pos, int remaining) {
    if (pos == length - 1) {
      word[pos] = remaining;
      out.push_back({word});
      return;
    }
    const int slots_after = length - pos - 1;
    for (int k = min_part; remaining - k >= slots_after * min_part; ++k) {
      word[pos] = k;
      fill(pos + 1, remaining - k);
    }
  };
  fill(0, total);
  return out;
}

/// Psi(0..n_max) from Psi(N) = sum_{m=1}^N 2^{N-m} sum_{k in J_0(m,N)} R^k c(k),
/// R^k = prod_i R_{k_i}. Enumeration is exponential, so n_max <= 12.
inline std::vector<double> psi_composition_representation(const std::vector<double>& r, int n_max) {
  if (n_max > 12) throw domain_error("psi_composition_representation: n_max must be <= 12");
  if (n_max < 0 || static_cast<int>(r.size()) <= n_max)
    throw domain_error("psi_composition_representation: trace powers must cover 1..n_max");
  std::vector<double> psi(n_max + 1, 0.0);
  psi[0] = 1.0;
  for (int big_n = 1; big_n <= n_max; ++big_n) {
    double acc = 0.0;
    for (int m = 1; 2 * m <= big_n; ++m) {
      const double weight = std::ldexp(1.0, big_n - m);
      for (const Composition& k : enumerate_compositions(big_n, m, 2)) {
        double rk = 1.0;
        for (int part : k.parts) rk *= r[part];
        acc += weight * rk * std::exp(k.log_coefficient());
      }
    }
    psi[big_n] = acc;
  }
  return psi;
}

/// Constant K with |Psi(N)| <= K ||C^{1/2} A C^{1/2}||_F^N: the composition
/// sum with every R_j replaced by one (|R_j| <= ||.||_F^j for j >= 2).
inline double moment_constant(int big_n) {
  std::vector<double> ones(big_n + 1, 1.0);
  return psi_composition_representation(ones, big_n)[big_n];
}

/// E <xi, A xi>^n by summing the Isserlis expansion over all (2n-1)!!
/// pairings of the 2n Gaussian factors. Each pairing closes the A and C
/// links into cycles; a cycle through L copies of A contributes Tr((AC)^L).
inline double theta_isserlis_oracle(const QuadFormInstance& inst, int n) {
  if (n < 0) throw domain_error("theta_isserlis_oracle: n must be nonnegative");
  if (n > 5) throw domain_error("theta_isserlis_oracle: n > 5 refused (" + std::to_string(n) + ")");
  if (n == 0) return 1.0;
  const Eigen::MatrixXd ac = inst.a() * inst.c();
  std::vector<double> traces(n + 1, 0.0);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(inst.dim(), inst.dim());
  for (int l = 1; l <= n; ++l) {
    power = (power * ac).eval();
    traces[l] = power.trace();
  }

  const int slots = 2 * n;
  std::vector<int> partner(slots, -1);
  double total = 0.0;
  auto contract = [&]() {
    // Slots 2k and 2k+1 are joined by A; partner[] joins by C.
    std::vector<char> seen(slots, 0);
    double value = 1.0;
    for (int start = 0; start < slots; ++start) {
      if (seen[start]) continue;
      int length = 0;
      int s = start;
      while (!seen[s]) {
        seen[s] = 1;
        const int across = s ^ 1;
        seen[across] = 1;
        ++length;
        s = partner[across];
      }
      value *= traces[length];
    }
    total += value;
  };
  std::function<void()> pair_up = [&]() {
    int first = 0;
    while (first < slots && partner[first] >= 0) ++first;
    if (first == slots) {
      contract();
      return;
    }
    for (int other = first + 1; other < slots; ++other) {
      if (partner[other] >= 0) continue;
      partner[first] = other;
      partner[other] = first;
      pair_up();
      partner[first] = -1;
      partner[other] = -1;
    }
  };
  pair_up();
  return total;
}

/// Traces, raw moments and centred moments of one instance.
struct MomentTable {
  std::vector<double> r;      // r[j] = Tr((AC)^j), j = 0..N
  std::vector<double> theta;  // Theta(0..N)
  std::vector<double> psi;    // Psi(0..N)
};

inline MomentTable moment_table(const QuadFormInstance& inst, int n_max) {
  MomentTable t;
  t.r = trace_powers(inst, n_max);
  t.theta = theta_recursion(t.r, n_max);
  t.psi = psi_direct(t.theta, t.r[1], n_max);
  return t;
}

}  // namespace hurst
