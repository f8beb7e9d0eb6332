#pragma once

// Deterministic synthetic scenes: elliptical persons at separated depth
// plateaus, rectangular contact regions inside the persons, and corrupted
// predictions with label noise and enclosed foreign blobs.

#include <cstdint>
#include <vector>

#include "hotkit/grid.hpp"

namespace hotkit {

struct SceneConfig {
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t persons = 1;
  std::vector<int> contact_classes;
  double noise_rate = 0.0;
  std::size_t enclosed_blobs = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Scene {
  LabelMap gt;
  DepthMap depth;  // raw
  PersonMaskSet persons;
  ContactIndicator indicator;
};

/// Default prediction softening: the label channel keeps 1 - eps.
inline constexpr double kPredictionSoftening = 0.05;

Scene gen_scene(const SceneConfig& config);

/// gt with `noise_rate` of the contact pixels flipped to another class, then
/// `enclosed_blobs` single foreign pixels each planted at the centre of a
/// uniform 3x3 window.
LabelMap perturb_labels(const Scene& scene, const SceneConfig& config);

/// One-hot of perturb_labels, softened by `softening`.
ProbMap perturb_prediction(const Scene& scene, const SceneConfig& config,
                           double softening = kPredictionSoftening);

/// Similarity matching the indicator: +/-(1 - noise_rate).
SimilarityVector matched_similarity(const ContactIndicator& indicator, double noise_rate);

/// Every pixel predicted as contact class 1.
LabelMap all_contact_prediction(const LabelMap& gt);

/// Scene config for image `index` of a seeded dataset: 1..3 persons and 1..4
/// contact classes drawn from the seed.
SceneConfig dataset_scene_config(std::uint64_t seed, std::size_t index, std::size_t height,
                                 std::size_t width, double noise_rate, std::size_t blobs);

}  // namespace hotkit
