#include <algorithm>
#include <chrono>
#include <cmath>

#include "cli.hpp"
#include "hotkit/metrics.hpp"
#include "hotkit/proximal.hpp"
#include "hotkit/regions.hpp"
#include "hotkit/synth.hpp"

namespace hotkit::cli {
namespace {

Timing summarize(std::vector<double> ms) {
  std::sort(ms.begin(), ms.end());
  const std::size_t n = ms.size();
  Timing t;
  t.median_ms = n % 2 ? ms[n / 2] : 0.5 * (ms[n / 2 - 1] + ms[n / 2]);
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  t.p95_ms = ms[std::max<std::size_t>(rank, 1) - 1];
  return t;
}

template <typename F>
double time_ms(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count();
}

/// Keeps results observable so the timed calls are not optimized away.
volatile std::size_t g_sink = 0;

}  // namespace

BenchResult run_bench(std::size_t height, std::size_t width, std::size_t iters) {
  SceneConfig config;
  config.height = height;
  config.width = width;
  config.persons = 3;
  config.contact_classes = {1, 4, 7, 10, 13, 16};
  config.noise_rate = 0.05;
  config.enclosed_blobs = 16;
  config.seed = 2048;
  const Scene scene = gen_scene(config);
  const LabelMap pred = perturb_labels(scene, config);
  const BinaryGrid human = scene.persons.union_mask();
  const DepthMap depth = normalize_depth(scene.depth);
  const auto summary = person_mean_depth(depth, scene.persons);
  const BinaryGrid contact = to_binary(binarize_nonzero(pred), "prediction");

  auto ccl = [&] { g_sink = g_sink + label_components(contact).count(); };
  auto sweep = [&] {
    BinaryGrid mask;
    for (int c = 0; c < kNumClasses; ++c) g_sink = g_sink + detail::enclosed_foreign(pred, c, &mask);
  };
  auto eval = [&] { g_sink = g_sink + static_cast<std::size_t>(evaluate_image(pred, scene.gt, human).ad_acc); };
  auto soft = [&] { g_sink = g_sink + soft_filter_mask(depth, summary, 0.1).size(); };

  std::vector<double> t_ccl, t_sweep, t_eval, t_soft, t_pipe;
  for (std::size_t i = 0; i < iters; ++i) {
    t_ccl.push_back(time_ms(ccl));
    t_sweep.push_back(time_ms(sweep));
    t_eval.push_back(time_ms(eval));
    t_soft.push_back(time_ms(soft));
    t_pipe.push_back(time_ms([&] {
      ccl();
      sweep();
      eval();
    }));
  }
  return {summarize(t_ccl), summarize(t_sweep), summarize(t_eval), summarize(t_soft),
          summarize(t_pipe)};
}

}  // namespace hotkit::cli
