#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include "cli.hpp"
#include "hotkit/error.hpp"
#include "hotkit/loss.hpp"
#include "hotkit/proximal.hpp"
#include "hotkit/rng.hpp"
#include "hotkit/synth.hpp"

namespace hotkit::cli {
namespace {

constexpr std::size_t kSceneSize = 32;
constexpr double kSceneNoise = 0.1;
constexpr std::size_t kSceneBlobs = 2;
// Weight of the one-hot part of the test probabilities; the rest is a random
// point of the simplex, so every entry stays well inside (0, 1).
constexpr double kOneHotWeight = 0.6;
constexpr double kDirectionScale = 0.025;

double relative_error(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  return scale < 1e-300 ? 0.0 : std::abs(analytic - numeric) / scale;
}

double sum(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.data()) s += v;
  return s;
}

bool clear_of_band_edges(const DepthMap& depth, const PersonDepthSummary& summary, double tau,
                         double eps) {
  for (double d : depth.data())
    for (double m : summary.means())
      if (std::abs(d - (m - tau)) <= eps || std::abs(d - (m + tau)) <= eps) return false;
  return true;
}

/// Interior probabilities whose argmax is `labels`.
std::vector<double> interior_probs(const LabelMap& labels, SplitMix64& rng) {
  const std::size_t n = labels.size();
  std::vector<double> p(kNumClasses * n);
  std::array<double, kNumClasses> w{};
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (auto& x : w) total += (x = rng.uniform(0.5, 1.5));
    for (int k = 0; k < kNumClasses; ++k)
      p[k * n + i] = (1.0 - kOneHotWeight) * w[k] / total + (k == labels[i] ? kOneHotWeight : 0.0);
  }
  return p;
}

/// Random direction with zero sum over the channels of every pixel.
std::vector<double> tangent_direction(std::size_t n, SplitMix64& rng) {
  std::vector<double> v(kNumClasses * n);
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (int k = 0; k < kNumClasses; ++k) mean += (v[k * n + i] = rng.uniform(-1.0, 1.0));
    mean /= kNumClasses;
    for (int k = 0; k < kNumClasses; ++k) v[k * n + i] = kDirectionScale * (v[k * n + i] - mean);
  }
  return v;
}

ProbMap shifted(const std::vector<double>& p, const std::vector<double>& v, double t,
                std::size_t h, std::size_t w) {
  std::vector<double> q(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) q[i] = p[i] + t * v[i];
  return ProbMap(h, w, std::move(q));
}

double dot(std::span<const double> a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

GradcheckResult run_gradcheck(std::uint64_t seed, std::size_t trials, double eps, double tol) {
  GradcheckResult result;
  auto record = [&](double& worst, const char* name, std::size_t trial, std::uint64_t scene_seed,
                    double err) {
    worst = std::max(worst, err);
    if (!(err <= tol)) {
      result.passed = false;
      result.failures.push_back(fmt::format("{} trial {} scene seed {} rel_err {:.3e}", name,
                                            trial, scene_seed, err));
    }
  };

  for (std::size_t t = 0; t < trials; ++t) {
    const SceneConfig config =
        dataset_scene_config(seed, t, kSceneSize, kSceneSize, kSceneNoise, kSceneBlobs);
    const Scene scene = gen_scene(config);
    auto rng = SplitMix64::stream(config.seed, "gradcheck");
    ++result.checked;

    // d FM / d tau, summed over pixels. Retry a few band widths before
    // giving up on a scene whose depths sit on a band edge.
    const DepthMap depth = normalize_depth(scene.depth);
    const auto summary = person_mean_depth(depth, scene.persons);
    std::optional<double> tau;
    for (int attempt = 0; attempt < 8 && !tau; ++attempt) {
      const double candidate = attempt == 0 ? 0.1 : rng.uniform(0.05, 0.25);
      if (candidate > eps && clear_of_band_edges(depth, summary, candidate, eps)) tau = candidate;
    }
    if (tau) {
      const double analytic = sum(soft_mask_tau_grad(depth, summary, *tau));
      const double numeric = (sum(soft_filter_mask(depth, summary, *tau + eps)) -
                              sum(soft_filter_mask(depth, summary, *tau - eps))) /
                             (2.0 * eps);
      record(result.tau, "tau_grad", t, config.seed, relative_error(analytic, numeric));
    } else {
      ++result.tau_skipped;
    }

    // Probability-map losses, differentiated along a direction that keeps
    // every pixel on the simplex.
    const LabelMap gt = scene.gt;
    const LabelMap pred = perturb_labels(scene, config);
    const std::size_t h = gt.height(), w = gt.width();
    const auto p = interior_probs(pred, rng);
    const auto v = tangent_direction(gt.size(), rng);
    const ProbMap base(h, w, p);
    const GlobalRegions regions = global_regions(argmax_labels(base));

    struct Check {
      const char* name;
      double* worst;
      std::function<double(const ProbMap&)> value;
      std::function<std::span<const double>(const ProbMap&)> grad;
    };
    FeatureMap scratch;
    const Check checks[] = {
        {"local_soft", &result.local_soft,
         [&](const ProbMap& q) { return local_joint_loss_soft(q, gt).value.total; },
         [&](const ProbMap& q) {
           scratch = local_joint_loss_soft(q, gt).grad;
           return scratch.data();
         }},
        {"global_soft", &result.global_soft,
         [&](const ProbMap& q) { return global_joint_loss_soft(q, regions).value.total; },
         [&](const ProbMap& q) {
           scratch = global_joint_loss_soft(q, regions).grad;
           return scratch.data();
         }},
        {"cross_entropy", &result.cross_entropy,
         [&](const ProbMap& q) { return cross_entropy(q, gt).value; },
         [&](const ProbMap& q) {
           scratch = cross_entropy(q, gt).grad;
           return scratch.data();
         }},
    };
    for (const auto& check : checks) {
      double err = 0.0;
      try {
        const double numeric =
            (check.value(shifted(p, v, eps, h, w)) - check.value(shifted(p, v, -eps, h, w))) /
            (2.0 * eps);
        err = relative_error(dot(check.grad(base), v), numeric);
      } catch (const Error&) {
        // The step left the probability domain; the check cannot pass.
        err = std::numeric_limits<double>::infinity();
      }
      record(*check.worst, check.name, t, config.seed, err);
    }

    // Prompt loss w.r.t. the similarity vector.
    std::array<double, kNumContactClasses> s{}, dir{};
    for (auto& x : s) x = rng.uniform(-0.8, 0.8);
    for (auto& x : dir) x = rng.uniform(-1.0, 1.0);
    double err = 0.0;
    try {
      std::array<double, kNumContactClasses> up = s, down = s;
      for (int k = 0; k < kNumContactClasses; ++k) {
        up[k] += eps * dir[k];
        down[k] -= eps * dir[k];
      }
      const auto g = prompt_be_loss(SimilarityVector(s), scene.indicator).grad;
      double analytic = 0.0;
      for (int k = 0; k < kNumContactClasses; ++k) analytic += g[k] * dir[k];
      const double numeric = (prompt_be_loss(SimilarityVector(up), scene.indicator).value -
                              prompt_be_loss(SimilarityVector(down), scene.indicator).value) /
                             (2.0 * eps);
      err = relative_error(analytic, numeric);
    } catch (const Error&) {
      err = std::numeric_limits<double>::infinity();
    }
    record(result.prompt_be, "prompt_be", t, config.seed, err);
  }
  return result;
}

}  // namespace hotkit::cli
