#pragma once

// Plain serial implementations of the data-parallel kernels, kept so tests
// and the kernel benchmark can compare them with the OpenMP versions. Only
// the enclosed-region sweep reuses library code (the per-class labeling);
// everything else is written out independently.

#include <array>
#include <cstddef>

#include "hotkit/grid.hpp"
#include "hotkit/loss.hpp"
#include "hotkit/metrics.hpp"
#include "hotkit/proximal.hpp"

namespace hotkit::reference {

ScalarField binarize_class(const LabelMap& labels, int c);
LabelMap argmax_labels(const ProbMap& probs);

std::vector<double> person_mean_depth(const DepthMap& depth_normalized,
                                      const PersonMaskSet& masks);
ScalarField hard_filter_mask(const DepthMap& depth_normalized, const std::vector<double>& means,
                             double tau);
ScalarField soft_filter_mask(const DepthMap& depth_normalized, const std::vector<double>& means,
                             double tau);
ScalarField soft_mask_tau_grad(const DepthMap& depth_normalized,
                               const std::vector<double>& means, double tau);
FeatureMap downsample_add(const ScalarField& fm, const FeatureMap& feature);

double local_joint_loss_soft(const ProbMap& probs, const LabelMap& gt);
double cross_entropy(const ProbMap& probs, const LabelMap& gt);

/// Pixels of (labels != c) in components that miss the image border.
std::size_t enclosed_foreign(const LabelMap& labels, int c);

/// Enclosed-foreign counts for classes 0..17, one class after another.
std::array<std::size_t, kNumClasses> enclosed_foreign_counts(const LabelMap& labels);

MetricReport evaluate_image(const LabelMap& pred, const LabelMap& gt, const BinaryGrid& human);

}  // namespace hotkit::reference
