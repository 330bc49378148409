// Log-determinants of fGn covariance matrices from one Levinson pass, with
// the Szego term removed; the remainder grows like ((1-2H)^2/4) log n.
//
//   determinant_demo [H]

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "hurst/hurst.hpp"

int main(int argc, char** argv) {
  const double h = argc > 1 ? std::atof(argv[1]) : 0.9;
  try {
    const hurst::ExperimentReport rep = hurst::run_determinant(hurst::HurstParam(h), {256, 512, 1024, 2048, 4096});
    for (const hurst::Record& r : rep.records)
      if (r.label == "s_n") std::printf("n=%-6zu logdet - n log G = %.6f\n", r.n, r.statistic);
    const hurst::Record* slope = rep.find("slope");
    std::printf("fitted slope %.6f, expected %.6f\n", slope->statistic, *slope->target);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
