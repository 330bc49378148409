#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <vector>

#include "hurst/symbols.hpp"

using namespace hurst;

namespace {

// Direct symmetric partial sum of the Sinai series, no tail correction.
double brute_density(double h, double lambda, long k_max) {
  const double s = 2.0 * h + 1.0;
  long double sum = 0.0L;
  for (long k = k_max; k >= 1; --k) {
    sum += std::pow(static_cast<long double>(std::abs(lambda - kTwoPi * k)), -static_cast<long double>(s));
    sum += std::pow(static_cast<long double>(std::abs(lambda + kTwoPi * k)), -static_cast<long double>(s));
  }
  sum += std::pow(static_cast<long double>(std::abs(lambda)), -static_cast<long double>(s));
  const double chord = 4.0 * std::sin(0.5 * lambda) * std::sin(0.5 * lambda);
  return unit_variance_constant(h) * chord * static_cast<double>(sum);
}

// Gauss-Legendre on [a, b] with geometric refinement toward a.
template <class F>
double graded_panel(F&& f, double a, double b, int levels) {
  boost::math::quadrature::gauss<double, 20> gl;
  double total = 0.0;
  double hi = b;
  for (int l = 0; l < levels; ++l) {
    const double lo = a + 0.5 * (hi - a);
    total += gl.integrate(f, lo, hi);
    hi = lo;
  }
  return total;
}

// Cosine coefficients (1/pi) int_0^pi f_H(t) cos(j t) dt for j = 0..max_lag,
// with t = pi x^p removing the endpoint power.
std::vector<double> fourier_coefficients(double h, int max_lag) {
  const double p = 1.0 / (2.0 - 2.0 * h);
  const int panels = 4096;
  boost::math::quadrature::gauss<double, 20> gl;
  std::vector<double> out(max_lag + 1, 0.0);
  auto add_panel = [&](double lo, double hi) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    const auto& abscissa = gl.abscissa();
    const auto& weight = gl.weights();
    for (std::size_t q = 0; q < abscissa.size(); ++q) {
      for (int sign : {-1, 1}) {
        if (abscissa[q] == 0.0 && sign == -1) continue;
        const double x = mid + sign * half * abscissa[q];
        const double t = kPi * std::pow(x, p);
        const double jac = p * kPi * std::pow(x, p - 1.0);
        const double w = half * weight[q] * sinai_density(HurstParam(h), t, kQuadratureTruncation) * jac / kPi;
        for (int j = 0; j <= max_lag; ++j) out[j] += w * std::cos(j * t);
      }
    }
  };
  const double width = 1.0 / panels;
  double hi = width;
  for (int l = 0; l < 40; ++l) {
    add_panel(0.5 * hi, hi);
    hi *= 0.5;
  }
  for (int i = 1; i < panels; ++i) add_panel(i * width, (i + 1) * width);
  return out;
}

}  // namespace

TEST(Params, RejectsBoundary) {
  EXPECT_THROW(HurstParam(0.0), domain_error);
  EXPECT_THROW(HurstParam(1.0), domain_error);
  EXPECT_THROW(SymbolParam(0.5), domain_error);
  EXPECT_NO_THROW(HurstParam(0.5));
  SymbolParam a(0.3);
  EXPECT_DOUBLE_EQ(a.minus(), 0.0);
  EXPECT_DOUBLE_EQ(a.plus(), 0.3);
  EXPECT_DOUBLE_EQ(SymbolParam(-0.2).minus(), 0.2);
  EXPECT_THROW((SinaiTruncation{8, 2}.validate()), domain_error);
}

TEST(SinaiDensity, BrownianCaseIsFlat) {
  EXPECT_NEAR(sinai_density(HurstParam(0.5), 1.0), 1.0, 1e-13);
  EXPECT_NEAR(sinai_density(HurstParam(0.5), 3.0), 1.0, 1e-13);
  EXPECT_NEAR(norming_constant(HurstParam(0.5)), 1.0, 1e-10);
}

TEST(SinaiDensity, MatchesBruteForceSeries) {
  const double want = brute_density(0.75, kPi, 1000000);
  EXPECT_NEAR(sinai_density(HurstParam(0.75), kPi) / want, 1.0, 1e-8);
  // The plain partial sum converges like K^{-2H}, so it is a usable oracle
  // only for larger H; below that the tail-corrected series is compared
  // against itself at a much larger cutoff.
  for (double h : {0.8, 0.9}) {
    for (double lambda : {0.01, 0.5, 2.0}) {
      const double ref = brute_density(h, lambda, 1000000);
      EXPECT_NEAR(sinai_density(HurstParam(h), lambda) / ref, 1.0, 1e-8) << h << " " << lambda;
    }
  }
  for (double h : {0.05, 0.1, 0.3}) {
    for (double lambda : {0.01, 0.5, 2.0}) {
      const double ref = sinai_density(HurstParam(h), lambda, {1 << 16, 4});
      EXPECT_NEAR(sinai_density(HurstParam(h), lambda) / ref, 1.0, 1e-8) << h << " " << lambda;
      EXPECT_NEAR(sinai_density(HurstParam(h), lambda, kQuadratureTruncation) / ref, 1.0, 1e-12);
    }
  }
}

TEST(SinaiDensity, EvenAndPeriodic) {
  for (double h = 0.05; h < 1.0; h += 0.15) {
    for (double lambda = 0.1; lambda < kPi; lambda += 0.37) {
      const double f = sinai_density(HurstParam(h), lambda);
      EXPECT_DOUBLE_EQ(f, sinai_density(HurstParam(h), -lambda));
      EXPECT_NEAR(f, sinai_density(HurstParam(h), lambda - kTwoPi), 1e-12 * f);
    }
  }
}

TEST(SinaiDensity, ZeroFrequency) {
  EXPECT_EQ(sinai_density(HurstParam(0.3), 0.0), 0.0);
  EXPECT_THROW(sinai_density(HurstParam(0.7), 0.0), domain_error);
  EXPECT_THROW(sinai_density(HurstParam(0.7), NAN), domain_error);
}

TEST(SinaiDensity, FisherHartwigOrder) {
  for (double alpha : {-0.4, -0.1, 0.2, 0.45}) {
    double lo = INFINITY, hi = 0.0;
    for (double t = 1e-6; t <= 0.1; t *= 1.5) {
      const double v = symbol_g(SymbolParam(alpha), t) * std::pow(t, 2.0 * alpha);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    EXPECT_GT(lo, 0.0);
    EXPECT_LT(hi / lo, 1.5) << alpha;
  }
}

TEST(NormingConstant, MatchesClosedForm) {
  for (double h = 0.05; h < 1.0; h += 0.05) {
    const double c = norming_constant(HurstParam(h));
    EXPECT_NEAR(c / unit_variance_constant(h), 1.0, 1e-9) << h;
  }
}

TEST(NormingConstant, StableUnderTruncationAndContinuous) {
  for (double h : {0.2, 0.5, 0.8}) {
    const double base = norming_constant(HurstParam(h), {256, 2});
    const double doubled = norming_constant(HurstParam(h), {512, 2});
    EXPECT_LT(std::abs(base - doubled), 1e-8);
  }
  for (double h = 0.1; h < 0.95; h += 0.1)
    EXPECT_LT(std::abs(norming_constant(HurstParam(h + 1e-4)) - norming_constant(HurstParam(h))), 1e-2);
}

TEST(Autocov, ClosedFormValues) {
  EXPECT_EQ(autocov(HurstParam(0.3), 0), 1.0);
  EXPECT_NEAR(autocov(HurstParam(0.5), 1), 0.0, 1e-15);
  EXPECT_NEAR(autocov(HurstParam(0.5), 17), 0.0, 1e-15);
  EXPECT_NEAR(autocov(HurstParam(0.75), 1), 0.5 * (std::pow(2.0, 1.5) - 2.0), 1e-15);
  // Large-lag asymptote H(2H-1) j^{2H-2}.
  const double j = 1e6;
  EXPECT_NEAR(autocov(HurstParam(0.8), 1000000) / (0.8 * 0.6 * std::pow(j, -0.4)), 1.0, 1e-6);
  const AutocovSeq seq = make_autocov(HurstParam(0.9), 100);
  for (double g : seq.gammas) EXPECT_LE(std::abs(g), 1.0);
}

TEST(Autocov, AgreesWithFourierCoefficientsOfDensity) {
  for (int i = 0; i < 20; ++i) {
    const double h = 0.025 + 0.05 * i;
    const std::vector<double> coeffs = fourier_coefficients(h, 256);
    double worst = 0.0;
    for (int j = 0; j <= 256; ++j) worst = std::max(worst, std::abs(coeffs[j] - autocov(HurstParam(h), j)));
    EXPECT_LT(worst, 1e-6) << "H=" << h;
  }
}

TEST(RatioIntegral, Diagonal) {
  for (double a : {-0.3, 0.0, 0.3}) EXPECT_EQ(f_ratio_integral(SymbolParam(a), SymbolParam(a)), 1.0);
}

TEST(RatioIntegral, FlatDenominator) {
  for (double b : {-0.4, -0.1, 0.2, 0.4}) EXPECT_NEAR(f_ratio_integral(SymbolParam(0.0), SymbolParam(b)), 1.0, 1e-8);
}

TEST(RatioIntegral, MatchesTanhSinh) {
  boost::math::quadrature::tanh_sinh<double> ts;
  for (auto [a, b] : {std::pair{0.2, -0.2}, std::pair{-0.1, 0.3}, std::pair{0.4, 0.1}}) {
    auto raw = [&](double t) { return symbol_g(SymbolParam(b), t) / symbol_g(SymbolParam(a), t) / kPi; };
    const double want = ts.integrate(raw, 0.0, kPi, 1e-12);
    EXPECT_NEAR(f_ratio_integral(SymbolParam(a), SymbolParam(b)) / want, 1.0, 1e-8) << a << " " << b;
  }
}

TEST(RatioIntegral, DivergentDomain) {
  EXPECT_THROW(f_ratio_integral(SymbolParam(-0.3), SymbolParam(0.3)), domain_error);
  EXPECT_THROW(f_ratio_integral(SymbolParam(-0.25), SymbolParam(0.25)), domain_error);
}

TEST(RatioIntegral, Continuous) {
  for (double a = -0.3; a <= 0.3; a += 0.15) {
    for (double b = -0.3; b <= 0.3; b += 0.15) {
      // F blows up as a - b -> -1/2; the step bound applies away from that edge.
      if (a - b < -0.25) continue;
      const double f = f_ratio_integral(SymbolParam(a), SymbolParam(b));
      EXPECT_LT(std::abs(f_ratio_integral(SymbolParam(a + 1e-3), SymbolParam(b)) - f), 1e-2);
      EXPECT_LT(std::abs(f_ratio_integral(SymbolParam(a), SymbolParam(b + 1e-3)) - f), 1e-2);
    }
  }
}

TEST(RatioDerivatives, MatchFiniteDifferences) {
  const double step = 1e-4;
  for (auto [a, h] : {std::pair{0.2, 0.6}, std::pair{-0.1, 0.3}, std::pair{0.3, 0.8}}) {
    const SymbolParam beta(h - 0.5);
    auto F = [&](double x) { return f_ratio_integral(SymbolParam(x), beta, 1e-13); };
    const double f0 = F(a);
    const double fp = F(a + step);
    const double fm = F(a - step);
    const RatioDerivatives d = f_ratio_derivatives(SymbolParam(a), HurstParam(h));
    EXPECT_NEAR(d.value / f0, 1.0, 1e-9);
    const double fd1 = (fp - fm) / (2.0 * step);
    EXPECT_NEAR(d.first / fd1, 1.0, 1e-5) << a << " " << h;
    const double big = 1e-3;
    const double fd2 = (F(a + big) - 2.0 * f0 + F(a - big)) / (big * big);
    EXPECT_NEAR(d.second / fd2, 1.0, 1e-3) << a << " " << h;
  }
}

TEST(RatioDerivatives, DiagonalSlope) {
  // Reference values from an independent double-exponential quadrature.
  const RatioDerivatives hi = f_ratio_derivatives(SymbolParam(0.2), HurstParam(0.7));
  EXPECT_NEAR(hi.value, 1.0, 1e-12);
  EXPECT_NEAR(hi.first, 1.55406, 2e-5);
  const RatioDerivatives lo = f_ratio_derivatives(SymbolParam(-0.2), HurstParam(0.3));
  EXPECT_NEAR(lo.first, -0.87427, 2e-5);
}

TEST(RatioDerivatives, ConvexNearDiagonal) {
  for (double h : {0.2, 0.4, 0.6, 0.8}) {
    for (double off : {-0.1, 0.0, 0.1}) {
      const RatioDerivatives d = f_ratio_derivatives(SymbolParam(h - 0.5 + off), HurstParam(h));
      EXPECT_GT(d.second, 0.0) << h << " " << off;
    }
  }
  EXPECT_THROW(f_ratio_derivatives(SymbolParam(-0.4), HurstParam(0.6)), domain_error);
}

TEST(SzegoConstant, MatchesDirectQuadrature) {
  EXPECT_NEAR(log_szego_constant(HurstParam(0.5)), 0.0, 1e-12);
  boost::math::quadrature::tanh_sinh<double> ts;
  for (double h : {0.2, 0.9}) {
    auto integrand = [&](double t) { return std::log(sinai_density(HurstParam(h), t, kQuadratureTruncation)) / kPi; };
    const double want = ts.integrate(integrand, 0.0, kPi, 1e-13);
    EXPECT_NEAR(log_szego_constant(HurstParam(h)), want, 1e-10) << h;
  }
}
