// Serial reference kernels against their OpenMP counterparts on one scene.
// Run with OMP_NUM_THREADS to vary the team size.

#include <benchmark/benchmark.h>

#include "hotkit/metrics.hpp"
#include "hotkit/proximal.hpp"
#include "hotkit/reference.hpp"
#include "hotkit/regions.hpp"
#include "hotkit/synth.hpp"

namespace {

using namespace hotkit;

struct Fixture {
  Scene scene;
  LabelMap pred;
  ProbMap probs;
  BinaryGrid human;
  DepthMap depth;
  PersonDepthSummary summary;

  static const Fixture& get() {
    static const Fixture f = [] {
      SceneConfig config;
      config.height = 1024;
      config.width = 1024;
      config.persons = 3;
      config.contact_classes = {2, 5, 8, 11};
      config.noise_rate = 0.05;
      config.enclosed_blobs = 8;
      config.seed = 99;
      Scene scene = gen_scene(config);
      LabelMap pred = perturb_labels(scene, config);
      ProbMap probs = perturb_prediction(scene, config);
      BinaryGrid human = scene.persons.union_mask();
      DepthMap depth = normalize_depth(scene.depth);
      auto summary = person_mean_depth(depth, scene.persons);
      return Fixture{std::move(scene), std::move(pred), std::move(probs), std::move(human),
                     std::move(depth), std::move(summary)};
    }();
    return f;
  }
};

void BM_BinarizeClass_Serial(benchmark::State& state) {
  const auto& f = Fixture::get();
  for (auto _ : state) benchmark::DoNotOptimize(reference::binarize_class(f.pred, 5));
}
void BM_BinarizeClass_Omp(benchmark::State& state) {
  const auto& f = Fixture::get();
  for (auto _ : state) benchmark::DoNotOptimize(binarize_class(f.pred, 5));
}

void BM_Argmax_Serial(benchmark::State& state) {
  const auto& f = Fixture::get();
  for (auto _ : state) benchmark::DoNotOptimize(reference::argmax_labels(f.probs));
}
void BM_Argmax_Omp(benchmark::State& state) {
  const auto& f = Fixture::get();
  for (auto _ : state) benchmark::DoNotOptimize(argmax_labels(f.probs));
}

void BM_SoftMask_Serial(benchmark::State& state) {
  const auto& f = Fixture::get();
  for (auto _ : state)
    benchmark::DoNotOptimize(reference::soft_filter_mask(f.depth, f.summary.means(), 0.1));
}
void BM_SoftMask_Omp(benchmark::State& state) {
  const auto& f = Fixture::get();
  for (auto _ : state) benchmark::DoNotOptimize(soft_filter_mask(f.depth, f.summary, 0.1));
}

void BM_EnclosedSweep_Serial(benchmark::State& state) {
  const auto& f = Fixture::get();
  for (auto _ : state) benchmark::DoNotOptimize(reference::enclosed_foreign_counts(f.pred));
}
void BM_EnclosedSweep_Omp(benchmark::State& state) {
  const auto& f = Fixture::get();
  for (auto _ : state) benchmark::DoNotOptimize(enclosed_foreign_counts(f.pred));
}

void BM_Evaluate_Serial(benchmark::State& state) {
  const auto& f = Fixture::get();
  for (auto _ : state)
    benchmark::DoNotOptimize(reference::evaluate_image(f.pred, f.scene.gt, f.human));
}
void BM_Evaluate_Omp(benchmark::State& state) {
  const auto& f = Fixture::get();
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_image(f.pred, f.scene.gt, f.human));
}

void BM_CrossEntropy_Serial(benchmark::State& state) {
  const auto& f = Fixture::get();
  for (auto _ : state) benchmark::DoNotOptimize(reference::cross_entropy(f.probs, f.scene.gt));
}
// Not like for like: the library call also allocates and fills the full
// 18-channel gradient, which dominates its time.
void BM_CrossEntropyWithGrad_Omp(benchmark::State& state) {
  const auto& f = Fixture::get();
  for (auto _ : state) benchmark::DoNotOptimize(cross_entropy(f.probs, f.scene.gt).value);
}

}  // namespace

BENCHMARK(BM_BinarizeClass_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BinarizeClass_Omp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Argmax_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Argmax_Omp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SoftMask_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SoftMask_Omp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnclosedSweep_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnclosedSweep_Omp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Evaluate_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Evaluate_Omp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CrossEntropy_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CrossEntropyWithGrad_Omp)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
