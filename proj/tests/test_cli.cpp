#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hurst/harness.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("hurst_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" HURST_CLI_PATH "\" " + args + " > \"" + (work_dir() / "stdout.txt").string() +
                          "\" 2> \"" + (work_dir() / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string path(const std::string& name) { return (work_dir() / name).string(); }

}  // namespace

TEST(Cli, SimulateIsDeterministic) {
  ASSERT_EQ(run("simulate --h 0.7 --n 64 --seed 5 --out " + path("a.csv")), 0);
  ASSERT_EQ(run("simulate --h 0.7 --n 64 --seed 5 --out " + path("b.csv")), 0);
  ASSERT_EQ(run("simulate --h 0.7 --n 64 --seed 6 --out " + path("c.csv")), 0);
  const std::string a = slurp(path("a.csv"));
  EXPECT_EQ(a, slurp(path("b.csv")));
  EXPECT_NE(a, slurp(path("c.csv")));
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 65);
  EXPECT_EQ(a.rfind("# fgn", 0), 0u);
}

TEST(Cli, SeedFallsBackToEnvironment) {
  ASSERT_EQ(run("simulate --h 0.3 --n 32 --seed 11 --out " + path("s.csv")), 0);
  ASSERT_EQ(run("simulate --h 0.3 --n 32 --out " + path("e.csv"), "HURST_SEED=11"), 0);
  EXPECT_EQ(slurp(path("s.csv")), slurp(path("e.csv")));
}

TEST(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(run("simulate --h 1.0 --n 16 --out " + path("x.csv")), 2);
  EXPECT_EQ(run("simulate --n 16 --out " + path("x.csv")), 2);
  EXPECT_EQ(run("verify bogus"), 2);
  EXPECT_EQ(run(""), 2);
}

TEST(Cli, EstimateRoundTrip) {
  ASSERT_EQ(run("simulate --h 0.7 --n 4096 --seed 3 --out " + path("path.csv")), 0);
  ASSERT_EQ(run("estimate --in " + path("path.csv") + " --out " + path("est.json")), 0);
  const auto j = hurst::json::parse(slurp(path("est.json")));
  EXPECT_NEAR(j.at("map").get<double>(), 0.7, 0.05);
  EXPECT_EQ(j.at("n").get<std::size_t>(), 4096u);
  EXPECT_FALSE(j.at("map_at_boundary").get<bool>());
  const auto ci = j.at("ci95");
  EXPECT_LE(ci[0].get<double>(), j.at("map").get<double>());
  EXPECT_GE(ci[1].get<double>(), j.at("map").get<double>());
}

TEST(Cli, EstimateEdgeInputs) {
  { std::ofstream(path("one.csv")) << "0.5\n"; }
  ASSERT_EQ(run("estimate --in " + path("one.csv") + " --out " + path("one.json")), 0);
  EXPECT_TRUE(hurst::json::parse(slurp(path("one.json"))).at("prior_only").get<bool>());
  { std::ofstream(path("empty.csv")); }
  EXPECT_EQ(run("estimate --in " + path("empty.csv")), 1);
  { std::ofstream(path("bad.csv")) << "0.1\nabc\n"; }
  EXPECT_EQ(run("estimate --in " + path("bad.csv")), 1);
  EXPECT_NE(slurp(work_dir() / "stderr.txt").find("line 2"), std::string::npos);
  EXPECT_EQ(run("estimate --in " + path("missing.csv")), 1);
}

TEST(Cli, VerifyWritesReports) {
  const std::string prefix = path("det");
  ASSERT_EQ(run("verify determinant --h 0.9 --out " + prefix), 0);
  const auto rep = hurst::json::parse(slurp(prefix + ".json")).get<hurst::ExperimentReport>();
  EXPECT_EQ(rep.name, "determinant");
  EXPECT_EQ(rep.verdict, "pass");
  EXPECT_NE(slurp(prefix + ".csv").find("slope"), std::string::npos);
  EXPECT_NE(slurp(work_dir() / "stdout.txt").find("PASS"), std::string::npos);

  ASSERT_EQ(run("verify slln --nlist 256,512 --paths 4 --out " + path("slln")), 0);
  EXPECT_TRUE(fs::exists(path("slln.csv")));
  EXPECT_EQ(run("verify slln --alpha -0.4 --beta 0.3 --nlist 256,512 --out " + path("div")), 2);
}
