#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hotkit::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

/// Runs the CLI on `args` (program name excluded).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct Timing {
  double median_ms = 0.0;
  double p95_ms = 0.0;
};

struct BenchResult {
  Timing label_components;
  Timing enclosed_sweep;
  Timing evaluate_image;
  Timing soft_filter_mask;
  /// label_components + enclosed sweep + evaluate_image, timed together.
  Timing pipeline;
};

BenchResult run_bench(std::size_t height, std::size_t width, std::size_t iters);

struct GradcheckResult {
  double tau = 0.0;
  double local_soft = 0.0;
  double global_soft = 0.0;
  double cross_entropy = 0.0;
  double prompt_be = 0.0;
  std::size_t checked = 0;
  std::size_t tau_skipped = 0;
  bool passed = true;
  std::vector<std::string> failures;  // one line per breach, naming the scene seed
};

GradcheckResult run_gradcheck(std::uint64_t seed, std::size_t trials, double eps, double tol);

}  // namespace hotkit::cli
