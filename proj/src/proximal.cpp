#include "hotkit/proximal.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hotkit/parallel.hpp"

namespace hotkit {

namespace {

void require_normalized(const DepthMap& depth) {
  if (!depth.is_normalized())
    fail(ErrorKind::NotNormalized, "depth map must be normalized to [0, 1]");
}

void require_tau(double tau) {
  if (!(std::isfinite(tau) && tau > 0.0))
    fail(ErrorKind::ConfigInvalid, fmt::format("tau must be positive, got {}", tau));
}

}  // namespace

PersonDepthSummary::PersonDepthSummary(std::vector<double> means) : means_(std::move(means)) {
  for (std::size_t i = 0; i < means_.size(); ++i) {
    if (!(means_[i] >= 0.0 && means_[i] <= 1.0))
      fail(ErrorKind::InvariantViolation,
           fmt::format("mean depth {} of person {} outside [0, 1]", means_[i], i));
  }
}

DepthMap normalize_depth(const DepthMap& depth) {
  const auto data = depth.data();
  if (data.empty()) fail(ErrorKind::DimensionMismatch, "depth map is empty");
  const auto [lo_it, hi_it] = std::minmax_element(data.begin(), data.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  ScalarField out(depth.height(), depth.width(), 0.0);
  if (range < kDepthRangeEpsilon) return DepthMap::normalized(std::move(out), true);
  const auto n = static_cast<std::ptrdiff_t>(data.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = std::clamp((data[i] - lo) / range, 0.0, 1.0);
  return DepthMap::normalized(std::move(out));
}

PersonDepthSummary person_mean_depth(const DepthMap& depth_normalized,
                                     const PersonMaskSet& masks) {
  require_normalized(depth_normalized);
  std::vector<double> means(masks.count(), 0.0);
  if (masks.count() == 0) return PersonDepthSummary(std::move(means));
  require_same_shape(depth_normalized.height(), depth_normalized.width(), masks.height(),
                     masks.width(), "person masks vs depth");
  const auto depth = depth_normalized.data();
  for (std::size_t i = 0; i < masks.count(); ++i) {
    const auto m = masks.mask(i);
    const double weighted = ordered_sum(m.size(), [&](std::size_t p) { return m[p] * depth[p]; });
    const double area = ordered_sum(m.size(), [&](std::size_t p) { return double(m[p]); });
    if (area == 0.0) fail(ErrorKind::EmptyMask, fmt::format("person mask {} is empty", i));
    means[i] = std::clamp(weighted / area, 0.0, 1.0);
  }
  return PersonDepthSummary(std::move(means));
}

DepthBand depth_bands(const PersonDepthSummary& summary, double tau) {
  require_tau(tau);
  DepthBand band;
  for (double m : summary.means()) band.bounds.emplace_back(m - tau, m + tau);
  return band;
}

ScalarField hard_filter_mask(const DepthMap& depth_normalized, const PersonDepthSummary& summary,
                             double tau) {
  require_normalized(depth_normalized);
  const DepthBand band = depth_bands(summary, tau);
  const auto depth = depth_normalized.data();
  ScalarField out(depth_normalized.height(), depth_normalized.width(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(depth.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    const double d = depth[p];
    for (const auto& [lo, hi] : band.bounds) {
      if (lo < d && d < hi) {
        out[p] = 1.0;
        break;
      }
    }
  }
  return out;
}

ScalarField soft_filter_mask(const DepthMap& depth_normalized, const PersonDepthSummary& summary,
                             double tau) {
  require_normalized(depth_normalized);
  require_tau(tau);
  const auto depth = depth_normalized.data();
  const auto& means = summary.means();
  ScalarField out(depth_normalized.height(), depth_normalized.width(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(depth.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    const double d = depth[p];
    double acc = 0.0;
    for (double m : means) acc += std::max(0.0, (d - (m - tau)) * ((m + tau) - d));
    out[p] = acc;
  }
  return out;
}

ScalarField soft_mask_tau_grad(const DepthMap& depth_normalized,
                               const PersonDepthSummary& summary, double tau) {
  require_normalized(depth_normalized);
  require_tau(tau);
  const auto depth = depth_normalized.data();
  const auto& means = summary.means();
  ScalarField out(depth_normalized.height(), depth_normalized.width(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(depth.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    const double d = depth[p];
    double acc = 0.0;
    for (double m : means)
      if ((d - (m - tau)) * ((m + tau) - d) > 0.0) acc += 2.0 * tau;
    out[p] = acc;
  }
  return out;
}

ScalarField downsample_mean4(const ScalarField& fm) {
  if (fm.height() % 4 != 0 || fm.width() % 4 != 0)
    fail(ErrorKind::DimensionMismatch,
         fmt::format("filter mask {}x{} is not divisible by 4", fm.height(), fm.width()));
  const std::size_t h = fm.height() / 4;
  const std::size_t w = fm.width() / 4;
  ScalarField out(h, w, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(h); ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      double acc = 0.0;
      for (std::size_t dr = 0; dr < 4; ++dr)
        for (std::size_t dc = 0; dc < 4; ++dc) acc += fm(4 * r + dr, 4 * c + dc);
      out(r, c) = acc / 16.0;
    }
  }
  return out;
}

FeatureMap downsample_add(const ScalarField& fm, const FeatureMap& feature) {
  const ScalarField pooled = downsample_mean4(fm);
  require_same_shape(pooled.height(), pooled.width(), feature.height(), feature.width(),
                     "pooled filter mask vs feature map");
  FeatureMap out = feature;
  const std::size_t plane = feature.plane();
  const auto total = static_cast<std::ptrdiff_t>(feature.channels() * plane);
  auto data = out.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < total; ++i) data[i] += pooled[static_cast<std::size_t>(i) % plane];
  return out;
}

}  // namespace hotkit
