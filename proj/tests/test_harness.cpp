#include <gtest/gtest.h>

#include <sstream>

#include "hurst/harness.hpp"

using namespace hurst;

namespace {

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Report, JsonRoundTrip) {
  const ExperimentReport rep = run_determinant(HurstParam(0.9), {512, 1024, 2048});
  const json j = rep;
  const ExperimentReport back = j.get<ExperimentReport>();
  EXPECT_TRUE(back.same_content(rep));
  EXPECT_EQ(json(back).dump(), j.dump());
  EXPECT_EQ(back.verdict, rep.verdict);
}

TEST(Report, CsvHasHeaderAndOneRowPerRecord) {
  ExperimentReport rep;
  rep.name = "x";
  rep.add({4, 7, "a, quoted \"label\"", 1.5, 1.0, 0.1, false, true, "src"});
  rep.add({8, std::nullopt, "b", 0.25, std::nullopt, std::nullopt, true, false, ""});
  std::ostringstream os;
  write_csv(os, rep);
  const std::string s = os.str();
  EXPECT_EQ(count_lines(s), 3u);
  EXPECT_EQ(s.substr(0, s.find('\n')), "n,seed,label,statistic,target,tol,pass,gating,target_source");
  EXPECT_NE(s.find("\"a, quoted \"\"label\"\"\""), std::string::npos);
  rep.finish(std::chrono::steady_clock::now());
  EXPECT_FALSE(rep.passed());
}

TEST(Report, FindAndVerdict) {
  ExperimentReport rep;
  rep.add({1, std::nullopt, "info", 0.0, std::nullopt, std::nullopt, false, false, ""});
  rep.finish(std::chrono::steady_clock::now());
  EXPECT_TRUE(rep.passed());
  rep.add({2, std::nullopt, "gate", 0.0, std::nullopt, std::nullopt, true, true, ""});
  ASSERT_NE(rep.find("gate"), nullptr);
  EXPECT_EQ(rep.find("gate", 3), nullptr);
  EXPECT_EQ(rep.find("missing"), nullptr);
}

TEST(Thresholds, ScalingWidensTolerances) {
  const Thresholds base;
  const Thresholds wide = base.scaled(2.0);
  EXPECT_DOUBLE_EQ(wide.slln_rel, 2.0 * base.slln_rel);
  EXPECT_DOUBLE_EQ(wide.concentration_abs, 2.0 * base.concentration_abs);
  EXPECT_THROW(base.scaled(0.0), domain_error);
}

TEST(Slln, ReproducibleAndSeedSensitive) {
  SllnOptions o;
  o.n_list = {256, 512};
  o.seeds = 4;
  const ExperimentReport a = run_slln(o), b = run_slln(o);
  EXPECT_TRUE(a.same_content(b));
  o.master_seed += 1;
  EXPECT_FALSE(run_slln(o).same_content(a));
}

TEST(Slln, ConvergentArmPasses) {
  const ExperimentReport rep = run_slln(SllnOptions{});
  EXPECT_TRUE(rep.passed());
  const Record* r = rep.find("seed_fraction_within_tol", 8192);
  ASSERT_NE(r, nullptr);
  EXPECT_TRUE(r->gating);
  EXPECT_GE(r->statistic, 0.8);
}

TEST(Slln, DivergentArmMustBeRequested) {
  SllnOptions o;
  o.alpha = -0.4;
  o.beta = 0.3;
  EXPECT_THROW(run_slln(o), domain_error);
  o.divergent = true;
  const ExperimentReport rep = run_slln(o);
  EXPECT_TRUE(rep.passed());
  EXPECT_NE(rep.find("seed_fraction_growing", 8192), nullptr);
  SllnOptions c;
  c.divergent = true;
  EXPECT_THROW(run_slln(c), domain_error);
}

TEST(Determinant, ExponentAndArguments) {
  const ExperimentReport rep = run_determinant(HurstParam(0.9), {512, 1024, 2048, 4096, 8192});
  EXPECT_TRUE(rep.passed());
  EXPECT_NEAR(rep.find("slope")->statistic, 0.16, 0.016);
  const ExperimentReport flat = run_determinant(HurstParam(0.5), {64, 128, 256});
  EXPECT_LT(std::abs(flat.find("slope")->statistic), 1e-8);
  EXPECT_THROW(run_determinant(HurstParam(0.7), {1024, 512}), domain_error);
  EXPECT_THROW(run_determinant(HurstParam(0.7), {512, 512}), domain_error);
  EXPECT_THROW(run_determinant(HurstParam(0.7), {512, 16384}), domain_error);
  EXPECT_THROW(run_determinant(HurstParam(0.7), {512}), domain_error);
}

TEST(InverseEntries, BandAndSkip) {
  for (double a : {-0.3, 0.3}) {
    const ExperimentReport rep = run_inverse_entries(a, 512);
    EXPECT_TRUE(rep.passed()) << a;
    EXPECT_GE(rep.find("fraction_within_band")->statistic, 0.95);
    EXPECT_EQ(rep.records.size(), 201u);
  }
  EXPECT_EQ(run_inverse_entries(0.0, 512).verdict, "skipped");
  EXPECT_THROW(run_inverse_entries(0.3, 64), domain_error);
}

TEST(Factorization, SuitePasses) {
  const ExperimentReport rep = run_factorization_suite({-0.25, 0.25});
  EXPECT_TRUE(rep.passed());
  for (const Record& r : rep.records)
    if (r.gating) EXPECT_TRUE(r.pass) << r.label;
}

TEST(Moments, SuitePasses) {
  const ExperimentReport rep = run_moment_suite({});
  EXPECT_TRUE(rep.passed());
  EXPECT_EQ(rep.records.size(), 40u);
  EXPECT_THROW(run_moment_suite({4, 6, 1, 0}), domain_error);
}

TEST(Simulation, AutocovarianceAndNormality) {
  for (double h : {0.25, 0.5, 0.75}) {
    SimulationOptions o;
    o.h = h;
    const ExperimentReport rep = run_simulation(o);
    EXPECT_TRUE(rep.passed()) << h;
    EXPECT_EQ(rep.find("ks_normality") != nullptr, h == 0.5);
  }
}

TEST(Concentration, SmallRunIsConsistent) {
  ConcentrationOptions o;
  o.h_hat = 0.3;
  o.n_list = {1024};
  o.paths = 10;
  const ExperimentReport rep = run_concentration(o);
  EXPECT_LE(rep.find("mean_map_abs_error")->statistic, 0.05);
  const double ratio = rep.find("posterior_sd_ratio")->statistic;
  EXPECT_GE(ratio, 1.0 / 3.0);
  EXPECT_LE(ratio, 3.0);
  // F'(0.3) < 0, so the sign row is informational.
  EXPECT_FALSE(rep.find("fraction_map_above_h")->gating);
  o.paths = 5;
  EXPECT_THROW(run_concentration(o), domain_error);
}
