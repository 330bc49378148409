// Simulate fBm increments, build the posterior of H and compare it with the
// asymptotic normal summary.
//
//   posterior_demo [H] [n] [seed]

#include <cstdio>
#include <cstdlib>

#include "hurst/hurst.hpp"

int main(int argc, char** argv) {
  const double h = argc > 1 ? std::atof(argv[1]) : 0.7;
  const std::size_t n = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 2048;
  const std::uint64_t seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : hurst::kDefaultSeed;
  try {
    const hurst::FgnPath path = hurst::sample_fgn(hurst::HurstParam(h), n, seed);
    const hurst::PosteriorGrid g = hurst::adaptive_posterior(path.increments);
    const hurst::MapEstimate map = hurst::map_estimate(g);
    const hurst::PosteriorMoments mom = hurst::posterior_moments(g);
    const auto ci = hurst::credible_interval(g, 0.95);
    std::printf("true H          %.4f\n", h);
    std::printf("grid nodes      %zu\n", g.size());
    std::printf("MAP             %.6f%s\n", map.value, map.at_boundary ? " (boundary)" : "");
    std::printf("posterior mean  %.6f\n", mom.mean);
    std::printf("posterior sd    %.6f\n", mom.sd());
    std::printf("95%% interval    [%.6f, %.6f]\n", ci.first, ci.second);
    if (n >= 8 && !map.at_boundary) {
      const hurst::AsymptoticSummary s = hurst::solve_alpha_n(n, hurst::HurstParam(map.value));
      std::printf("alpha_n         %.6f\n", s.alpha_n);
      std::printf("c_n             %.6f\n", s.c_n);
      std::printf("predicted sd    %.6f\n", s.predicted_sd);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
