// Fits the constants stored in include/bvpa/calibration.hpp and prints them
// as C++ definitions.

#include <cstdint>
#include <cstdio>

#include <CLI11.hpp>

#include "bvpa/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Fit the stored approximation constants"};
  std::uint64_t seed = 1;
  int count = 200;
  int quad_level = 2;
  app.add_option("--seed", seed, "Corpus seed")->capture_default_str();
  app.add_option("--count", count, "Random (field, simplex) pairs")->capture_default_str();
  app.add_option("--quad-level", quad_level, "Quadrature refinement depth")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  bvpa::QuadratureSpec q;
  q.levels = quad_level;
  try {
    double c = 0.0, c_raw = 0.0;
    for (const auto& s : bvpa::interpolation_corpus(seed, count, q)) {
      c = std::max(c, s.ratio);
      c_raw = std::max(c_raw, s.raw_ratio);
    }
    const double c_mod = bvpa::sobolev_corpus_max_ratio(q);
    const double c_trace = bvpa::annulus_trace_ratio_max({0.4, 0.2, 0.1}, {2, 3, 4}, q);
    std::printf("inline constexpr double kInterpolationConstant = %.6g;\n", c);
    std::printf("inline constexpr double kInterpolationConstantRaw = %.6g;\n", c_raw);
    std::printf("inline constexpr double kModulusConstant = %.6g;\n", c_mod);
    std::printf("inline constexpr double kTraceConstant = %.6g;\n", c_trace);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "calibration failed: %s\n", e.what());
    return 3;
  }
  return 0;
}
