// hurst: simulate fBm increments, estimate the Hurst index from a data file
// and run verification experiments.
//
// Exit codes: 0 success (verify: verdict pass), 1 runtime failure or failed
// verdict, 2 usage error.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hurst/hurst.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

const std::vector<std::string> kExperiments{"slln",         "determinant",     "concentration", "factorization",
                                            "inverse-entries", "moments",      "simulation"};

struct Config {
  double h = 0.7;
  std::size_t n = 1024;
  std::optional<std::uint64_t> seed;
  std::string in;
  std::string out;
  double grid_min = hurst::kGridMin;
  double grid_max = hurst::kGridMax;
  std::size_t grid_coarse = 128;
  unsigned threads = hurst::default_threads();
  std::optional<double> alpha;
  double beta = -0.1;
  std::vector<std::size_t> nlist;
  std::size_t paths = 0;
  double tol_scale = 1.0;
  bool divergent = false;
  std::string experiment;
};

class usage_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const Config& c) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv("HURST_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw usage_error(std::string("HURST_SEED is not an unsigned integer: '") + env + "'");
  }
  return hurst::kDefaultSeed;
}

hurst::HurstParam checked_h(double h) {
  if (!(h > 0.0 && h < 1.0)) throw usage_error("--h must lie in (0,1)");
  return hurst::HurstParam(h);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  return os;
}

int cmd_simulate(const Config& c) {
  const hurst::HurstParam h = checked_h(c.h);
  if (c.n == 0) throw usage_error("--n must be positive");
  if (c.out.empty()) throw usage_error("simulate needs --out");
  const hurst::FgnPath path = hurst::sample_fgn(h, c.n, resolve_seed(c));
  std::ofstream os = open_out(c.out);
  hurst::write_fgn_csv(os, path);
  os.close();
  if (!os) throw std::runtime_error("write to '" + c.out + "' failed");
  std::cout << "wrote " << path.n << " increments (H=" << h.value() << ", seed=" << path.seed << ") to " << c.out
            << '\n';
  return kExitOk;
}

int cmd_estimate(const Config& c) {
  if (c.in.empty()) throw usage_error("estimate needs --in");
  std::ifstream is(c.in);
  if (!is) throw std::runtime_error("cannot open '" + c.in + "'");
  const hurst::IncrementFile data = hurst::read_increments(is);

  hurst::GridOptions grid;
  grid.lo = c.grid_min;
  grid.hi = c.grid_max;
  grid.coarse = c.grid_coarse;
  grid.threads = c.threads;
  try {
    grid.validate();
  } catch (const hurst::domain_error& e) {
    throw usage_error(e.what());
  }
  const hurst::PosteriorGrid g = hurst::adaptive_posterior(data.increments, grid);
  const hurst::MapEstimate map = hurst::map_estimate(g);
  const hurst::PosteriorMoments mom = hurst::posterior_moments(g);
  const auto ci = hurst::credible_interval(g, 0.95);

  hurst::json out{{"n", g.n},
                  {"map", map.value},
                  {"map_at_boundary", map.at_boundary},
                  {"mean", mom.mean},
                  {"sd", mom.sd()},
                  {"ci95", {ci.first, ci.second}},
                  {"nodes", g.size()},
                  {"prior_only", g.prior_only},
                  {"degenerate_data", g.degenerate_data},
                  {"alpha_n", nullptr},
                  {"c_n", nullptr},
                  {"normal_approx_sd", nullptr},
                  {"plug_in_h", nullptr}};
  // The asymptotic summary needs H-hat; the MAP stands in for it.
  if (g.n >= 8 && !map.at_boundary) {
    try {
      const hurst::AsymptoticSummary s = hurst::solve_alpha_n(g.n, hurst::HurstParam(map.value));
      out["alpha_n"] = s.alpha_n;
      out["c_n"] = s.c_n;
      out["normal_approx_sd"] = s.predicted_sd;
      out["plug_in_h"] = map.value;
    } catch (const std::exception& e) {
      out["asymptotic_error"] = e.what();
    }
  }
  if (!c.out.empty()) {
    std::ofstream os = open_out(c.out);
    os << std::setw(2) << out << '\n';
  }
  std::cout << std::setprecision(9);
  std::cout << "n        " << g.n << '\n'
            << "map      " << map.value << (map.at_boundary ? "  (mode at boundary)" : "") << '\n'
            << "mean     " << mom.mean << '\n'
            << "sd       " << mom.sd() << '\n'
            << "ci95     " << ci.first << ' ' << ci.second << '\n';
  if (!out["alpha_n"].is_null())
    std::cout << "alpha_n  " << out["alpha_n"].get<double>() << '\n'
              << "c_n      " << out["c_n"].get<double>() << '\n'
              << "approx_sd " << out["normal_approx_sd"].get<double>() << '\n';
  if (g.prior_only) std::cout << "note     n = 1: posterior equals the prior\n";
  if (g.degenerate_data) std::cout << "note     data identically zero\n";
  return kExitOk;
}

hurst::ExperimentReport run_experiment(const Config& c) {
  const hurst::Thresholds th = hurst::Thresholds{}.scaled(c.tol_scale);
  const std::uint64_t seed = resolve_seed(c);
  const std::string& e = c.experiment;
  if (e == "slln") {
    hurst::SllnOptions o;
    o.alpha = c.alpha.value_or(0.2);
    o.beta = c.beta;
    if (!c.nlist.empty()) o.n_list = c.nlist;
    if (c.paths > 0) o.seeds = c.paths;
    o.master_seed = seed;
    o.divergent = c.divergent;
    o.threads = c.threads;
    return hurst::run_slln(o, th);
  }
  if (e == "determinant") {
    std::vector<std::size_t> ns = c.nlist.empty() ? std::vector<std::size_t>{512, 1024, 2048, 4096, 8192} : c.nlist;
    return hurst::run_determinant(checked_h(c.h), ns, th);
  }
  if (e == "concentration") {
    hurst::ConcentrationOptions o;
    o.h_hat = checked_h(c.h).value();
    if (!c.nlist.empty()) o.n_list = c.nlist;
    if (c.paths > 0) o.paths = c.paths;
    o.master_seed = seed;
    o.grid.lo = c.grid_min;
    o.grid.hi = c.grid_max;
    o.grid.coarse = c.grid_coarse;
    o.threads = c.threads;
    return hurst::run_concentration(o, th);
  }
  if (e == "factorization") {
    const std::vector<double> alphas =
        c.alpha ? std::vector<double>{*c.alpha} : std::vector<double>{-0.3, -0.2, 0.2, 0.3};
    return hurst::run_factorization_suite(alphas, hurst::kDefaultFactorGrid, th);
  }
  if (e == "inverse-entries") return hurst::run_inverse_entries(c.alpha.value_or(0.3), c.n, seed, th);
  if (e == "moments") {
    hurst::MomentSuiteOptions o;
    if (c.paths > 0) o.trials = c.paths;
    o.seed = seed;
    return hurst::run_moment_suite(o, th);
  }
  if (e == "simulation") {
    hurst::SimulationOptions o;
    o.h = checked_h(c.h).value();
    o.n = c.n;
    if (c.paths > 0) o.paths = c.paths;
    o.master_seed = seed;
    return hurst::run_simulation(o, th);
  }
  std::string list;
  for (const auto& name : kExperiments) list += (list.empty() ? "" : ", ") + name;
  throw usage_error("unknown experiment '" + e + "'; available: " + list);
}

int cmd_verify(const Config& c) {
  hurst::ExperimentReport rep;
  try {
    rep = run_experiment(c);
  } catch (const hurst::domain_error& e) {
    throw usage_error(e.what());
  }
  const std::string prefix = c.out.empty() ? "report-" + rep.name : c.out;
  {
    std::ofstream js = open_out(prefix + ".json");
    js << std::setw(2) << hurst::json(rep) << '\n';
    std::ofstream csv = open_out(prefix + ".csv");
    hurst::write_csv(csv, rep);
  }
  std::cout << std::setprecision(9);
  for (const hurst::Record& r : rep.records) {
    if (!r.gating) continue;
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.label << " n=" << r.n << " statistic=" << r.statistic;
    if (r.target) std::cout << " target=" << *r.target;
    if (r.tol) std::cout << " tol=" << *r.tol;
    std::cout << '\n';
  }
  for (const auto& note : rep.notes) std::cout << "note: " << note << '\n';
  std::cout << rep.name << ": " << rep.verdict << " (" << rep.wall_time << " s); wrote " << prefix << ".json, " << prefix
            << ".csv\n";
  return rep.passed() ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact Bayesian estimation of the Hurst index of fractional Brownian motion"};
  // --h is the Hurst index, so help is long-form only.
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  Config c;

  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "master seed (default: $HURST_SEED, else " + std::to_string(hurst::kDefaultSeed) + ")");
  };
  auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--grid-min", c.grid_min, "lower end of the H grid")->capture_default_str();
    sub->add_option("--grid-max", c.grid_max, "upper end of the H grid")->capture_default_str();
    sub->add_option("--grid-coarse", c.grid_coarse, "nodes in the coarse scan")->capture_default_str();
  };
  auto add_threads = [&](CLI::App* sub) {
    sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  };

  CLI::App* sim = app.add_subcommand("simulate", "simulate fBm increments on [0,1] and write them as CSV");
  sim->add_option("--h", c.h, "Hurst index in (0,1)")->required();
  sim->add_option("--n", c.n, "number of increments")->required();
  sim->add_option("--out", c.out, "output CSV path")->required();
  add_seed(sim);

  CLI::App* est = app.add_subcommand("estimate", "posterior of H for increments read from a CSV file");
  est->add_option("--in", c.in, "input CSV (one increment per line, optional '# fgn' header)")->required();
  est->add_option("--out", c.out, "write the result as JSON");
  add_grid(est);
  add_threads(est);

  CLI::App* ver = app.add_subcommand("verify", "run a verification experiment and write JSON and CSV reports");
  ver->add_option("experiment", c.experiment, "slln | determinant | concentration | factorization | "
                                              "inverse-entries | moments | simulation")
      ->required();
  ver->add_option("--h", c.h, "Hurst index")->capture_default_str();
  ver->add_option("--n", c.n, "size (inverse-entries, simulation)")->capture_default_str();
  ver->add_option("--alpha", c.alpha, "symbol parameter alpha");
  ver->add_option("--beta", c.beta, "symbol parameter beta (slln)")->capture_default_str();
  ver->add_option("--nlist", c.nlist, "comma-separated sample sizes")->delimiter(',');
  ver->add_option("--paths", c.paths, "number of paths, seeds or trials");
  ver->add_option("--tol-scale", c.tol_scale, "multiply every tolerance by this factor")->capture_default_str();
  ver->add_option("--out", c.out, "report path prefix (default report-<experiment>)");
  ver->add_flag("--divergent", c.divergent, "slln: run the arm outside the convergence region");
  add_seed(ver);
  add_grid(ver);
  add_threads(ver);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(c);
    if (est->parsed()) return cmd_estimate(c);
    return cmd_verify(c);
  } catch (const usage_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
