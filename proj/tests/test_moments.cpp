#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>

#include "hurst/moments.hpp"
#include "hurst/symbols.hpp"

using namespace hurst;

namespace {

QuadFormInstance random_instance(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd a(d, d), b(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      a(i, j) = z(rng);
      b(i, j) = z(rng);
    }
  Eigen::MatrixXd c = b * b.transpose() / d + 0.2 * Eigen::MatrixXd::Identity(d, d);
  return {a, c};
}

// E prod xi_{k} for a list of indices, by recursive pairing of C entries.
double gaussian_moment(const Eigen::MatrixXd& c, std::vector<int> idx) {
  if (idx.empty()) return 1.0;
  if (idx.size() % 2) return 0.0;
  const int first = idx[0];
  double total = 0.0;
  for (std::size_t k = 1; k < idx.size(); ++k) {
    std::vector<int> rest;
    for (std::size_t m = 1; m < idx.size(); ++m)
      if (m != k) rest.push_back(idx[m]);
    total += c(first, idx[k]) * gaussian_moment(c, rest);
  }
  return total;
}

// E <xi, A xi>^n by the full index sum.
double index_sum_moment(const QuadFormInstance& inst, int n) {
  const int d = static_cast<int>(inst.dim());
  std::vector<int> idx(2 * n, 0);
  double total = 0.0;
  std::function<void(int, double)> rec = [&](int k, double weight) {
    if (k == n) {
      total += weight * gaussian_moment(inst.c(), idx);
      return;
    }
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        idx[2 * k] = i;
        idx[2 * k + 1] = j;
        rec(k + 1, weight * inst.a()(i, j));
      }
  };
  rec(0, 1.0);
  return total;
}

double rel(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

Eigen::MatrixXd toeplitz_dense(double h, int n) {
  Eigen::MatrixXd t(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t(i, j) = autocov(HurstParam(h), std::abs(i - j));
  return t;
}

}  // namespace

TEST(TracePowers, Identity) {
  const QuadFormInstance inst(Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Identity(3, 3));
  const auto r = trace_powers(inst, 5);
  for (int j = 1; j <= 5; ++j) EXPECT_EQ(r[j], 3.0);
}

TEST(TracePowers, DiagonalAndEigenOracle) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  EXPECT_EQ(trace_powers(QuadFormInstance(a, Eigen::MatrixXd::Identity(2, 2)), 2)[2], 5.0);

  std::mt19937_64 rng(11);
  const QuadFormInstance inst = random_instance(4, rng);
  const Eigen::VectorXd lambda = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(inst.whitened()).eigenvalues();
  EXPECT_LT(rel(trace_powers(inst, 3)[3], lambda.array().cube().sum()), 1e-10);
}

TEST(Instance, SymmetrizesAndRejectsIndefinite) {
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 0, 1;
  const QuadFormInstance inst(a, Eigen::MatrixXd::Identity(2, 2));
  EXPECT_EQ(inst.a()(0, 1), inst.a()(1, 0));
  Eigen::MatrixXd c(2, 2);
  c << 1, 2, 2, 1;
  EXPECT_THROW(QuadFormInstance(a, c), domain_error);
}

TEST(ThetaRecursion, ChiSquareMoments) {
  const QuadFormInstance inst(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2));
  const auto theta = theta_recursion(trace_powers(inst, 3), 3);
  EXPECT_EQ(theta[0], 1.0);
  EXPECT_EQ(theta[1], 2.0);
  EXPECT_EQ(theta[2], 8.0);
  EXPECT_EQ(theta[3], 48.0);
}

TEST(ThetaRecursion, MatchesIsserlisAndIndexSum) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + trial % 4;
    const QuadFormInstance inst = random_instance(d, rng);
    const auto r = trace_powers(inst, 5);
    const auto theta = theta_recursion(r, 5);
    EXPECT_EQ(theta[1], r[1]);
    for (int n = 1; n <= 5; ++n) EXPECT_LT(rel(theta[n], theta_isserlis_oracle(inst, n)), 1e-10) << trial << " " << n;
    if (d <= 3)
      for (int n = 1; n <= 3; ++n) EXPECT_LT(rel(theta[n], index_sum_moment(inst, n)), 1e-10) << trial << " " << n;
  }
}

TEST(ThetaRecursion, PositiveForSemidefiniteA) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    QuadFormInstance base = random_instance(4, rng);
    const QuadFormInstance inst(base.a() * base.a().transpose(), base.c());
    for (double t : theta_recursion(trace_powers(inst, 8), 8)) EXPECT_GT(t, 0.0);
  }
}

TEST(ThetaRecursion, SimilarityInvariance) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const QuadFormInstance inst = random_instance(4, rng);
    const QuadFormInstance white(inst.whitened(), Eigen::MatrixXd::Identity(4, 4));
    const auto t1 = theta_recursion(trace_powers(inst, 6), 6);
    const auto t2 = theta_recursion(trace_powers(white, 6), 6);
    for (int n = 0; n <= 6; ++n) EXPECT_LT(rel(t1[n], t2[n]), 1e-10);
  }
}

TEST(IsserlisOracle, EdgeCases) {
  std::mt19937_64 rng(3);
  const QuadFormInstance inst = random_instance(3, rng);
  EXPECT_LT(rel(theta_isserlis_oracle(inst, 1), (inst.a() * inst.c()).trace()), 1e-14);
  const QuadFormInstance zero(Eigen::MatrixXd::Zero(3, 3), inst.c());
  for (int n = 1; n <= 4; ++n) EXPECT_EQ(theta_isserlis_oracle(zero, n), 0.0);
  EXPECT_THROW(theta_isserlis_oracle(inst, 6), domain_error);
}

TEST(PsiDirect, LowOrders) {
  const QuadFormInstance id(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2));
  const auto r = trace_powers(id, 2);
  const auto psi = psi_direct(theta_recursion(r, 2), r[1], 2);
  EXPECT_EQ(psi[1], 0.0);
  EXPECT_EQ(psi[2], 4.0);

  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const QuadFormInstance inst = random_instance(3, rng);
    const auto rr = trace_powers(inst, 2);
    const auto p = psi_direct(theta_recursion(rr, 2), rr[1], 2);
    EXPECT_NEAR(p[1], 0.0, 1e-12 * std::abs(rr[1]) + 1e-14);
    EXPECT_LT(rel(p[2], 2.0 * rr[2]), 1e-10);
  }
}

TEST(Compositions, EnumerationAndClasses) {
  for (int n = 1; n <= 10; ++n) {
    for (int m = 1; m <= n; ++m) {
      const auto words = enumerate_compositions(n, m);
      // binom(n-1, m-1) compositions of n into m positive parts.
      double expect = 1.0;
      for (int i = 1; i < m; ++i) expect = expect * (n - i) / i;
      EXPECT_EQ(static_cast<double>(words.size()), std::round(expect));
      for (const auto& w : words) {
        EXPECT_EQ(w.partial_sums().back(), n);
        EXPECT_TRUE(w.in_class(w.ones(), m, n));
      }
    }
  }
  EXPECT_TRUE(enumerate_compositions(3, 2, 2).empty());
}

TEST(Compositions, CoefficientByHand) {
  EXPECT_NEAR(std::exp(Composition{{2}}.log_coefficient()), 1.0, 1e-14);
  EXPECT_NEAR(std::exp(Composition{{3}}.log_coefficient()), 2.0, 1e-14);
  EXPECT_NEAR(std::exp(Composition{{2, 2}}.log_coefficient()), 3.0, 1e-13);
  EXPECT_NEAR(std::exp(Composition{{4}}.log_coefficient()), 6.0, 1e-13);
}

TEST(PsiComposition, ClosedFormsLowOrder) {
  const std::vector<double> r = {0.0, 1.3, 0.7, -0.4, 2.1};
  const auto psi = psi_composition_representation(r, 4);
  EXPECT_EQ(psi[1], 0.0);
  EXPECT_NEAR(psi[2], 2.0 * r[2], 1e-14);
  EXPECT_NEAR(psi[3], 8.0 * r[3], 1e-14);
  EXPECT_NEAR(psi[4], 48.0 * r[4] + 12.0 * r[2] * r[2], 1e-12);
  EXPECT_THROW(psi_composition_representation(std::vector<double>(14, 1.0), 13), domain_error);
}

TEST(PsiComposition, AgreesWithDirect) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const QuadFormInstance inst = random_instance(4, rng);
    const MomentTable t = moment_table(inst, 8);
    const auto comp = psi_composition_representation(t.r, 8);
    for (int n = 2; n <= 8; ++n) EXPECT_LT(rel(t.psi[n], comp[n]), 1e-9) << trial << " " << n;
  }
}

TEST(MomentBound, ToeplitzQuadraticForms) {
  // A = T_n(g_alpha)^{-1}, C = T_n(g_beta) inside the convergence region.
  for (auto [alpha, beta] : {std::pair{0.2, -0.1}, std::pair{-0.1, 0.2}, std::pair{0.3, 0.1}}) {
    for (int n : {8, 32, 64}) {
      const Eigen::MatrixXd a = toeplitz_dense(alpha + 0.5, n).inverse();
      const QuadFormInstance inst(a, toeplitz_dense(beta + 0.5, n));
      const double frob = inst.whitened().norm();
      const MomentTable t = moment_table(inst, 6);
      for (int big_n = 1; big_n <= 3; ++big_n) {
        const double k = moment_constant(2 * big_n);
        EXPECT_LE(t.psi[2 * big_n], k * std::pow(frob, 2 * big_n) * (1.0 + 1e-12)) << n << " " << big_n;
        EXPECT_GT(t.psi[2 * big_n], 0.0);
      }
    }
  }
}
