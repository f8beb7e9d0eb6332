#pragma once

// Human proximal perception: keep pixels whose normalized depth lies within
// +/- tau of some person's mean depth. The hard mask is the 0/1 indicator;
// the soft mask sums ReLU((D - (m - tau)) * ((m + tau) - D)) over persons,
// which is differentiable in tau.

#include <utility>
#include <vector>

#include "hotkit/grid.hpp"

namespace hotkit {

/// Ranges closer than this are treated as constant depth.
inline constexpr double kDepthRangeEpsilon = 1e-12;

/// Per-person mean normalized depth, one value in [0, 1] per person.
class PersonDepthSummary {
 public:
  explicit PersonDepthSummary(std::vector<double> means);
  std::size_t count() const noexcept { return means_.size(); }
  double mean(std::size_t i) const { return means_.at(i); }
  const std::vector<double>& means() const noexcept { return means_; }

 private:
  std::vector<double> means_;
};

/// [mean - tau, mean + tau] per person.
struct DepthBand {
  std::vector<std::pair<double, double>> bounds;
};

/// (D - min) / (max - min). A constant map yields all zeros flagged
/// degenerate.
DepthMap normalize_depth(const DepthMap& depth);

PersonDepthSummary person_mean_depth(const DepthMap& depth_normalized, const PersonMaskSet& masks);

DepthBand depth_bands(const PersonDepthSummary& summary, double tau);

/// 1 where some person's open band (mean - tau, mean + tau) contains the depth.
ScalarField hard_filter_mask(const DepthMap& depth_normalized, const PersonDepthSummary& summary,
                             double tau);

/// Sum over persons of ReLU of the band product; peaks at tau^2 on a band
/// centre and is not clamped.
ScalarField soft_filter_mask(const DepthMap& depth_normalized, const PersonDepthSummary& summary,
                             double tau);

/// d(soft_filter_mask)/d(tau): 2 tau per person whose band product is positive.
ScalarField soft_mask_tau_grad(const DepthMap& depth_normalized,
                               const PersonDepthSummary& summary, double tau);

/// 4x4 average pooling.
ScalarField downsample_mean4(const ScalarField& fm);

/// Adds the 4x4-average-pooled filter mask to every channel of `feature`,
/// whose spatial size must be H/4 x W/4.
FeatureMap downsample_add(const ScalarField& fm, const FeatureMap& feature);

}  // namespace hotkit
