#pragma once

// Contact-segmentation metrics, all reported on a 0..100 scale.
//
//   SC-Acc  exact class matches over gt contact pixels
//   C-Acc   binary contact hits over gt contact pixels
//   mIoU    mean IoU over contact classes with a nonempty union
//   wIoU    IoU weighted by gt class frequency
//   AD-Acc  C-Acc term minus the false-contact rate on the non-contact part
//           of the human mask, each stabilized by delta = 1e-6

#include <array>
#include <optional>
#include <span>

#include "hotkit/grid.hpp"

namespace hotkit {

inline constexpr double kAdAccDelta = 1e-6;

using PerClassIou = std::array<std::optional<double>, kNumContactClasses>;

struct MetricReport {
  std::optional<double> sc_acc;
  std::optional<double> c_acc;
  std::optional<double> miou;
  std::optional<double> wiou;
  double ad_acc = 0.0;
  /// Percent IoU for classes 1..17; empty when the class is in neither map.
  PerClassIou per_class_iou{};
};

double sc_acc(const LabelMap& pred, const LabelMap& gt);
double c_acc(const LabelMap& pred, const LabelMap& gt);
/// Fractions in [0, 1], not percent.
PerClassIou iou_per_class(const LabelMap& pred, const LabelMap& gt);
double miou(const LabelMap& pred, const LabelMap& gt);
double wiou(const LabelMap& pred, const LabelMap& gt);
/// `human` is the binary union-of-persons mask at prediction resolution.
double ad_acc(const LabelMap& pred, const LabelMap& gt, const ScalarField& human);

/// All five metrics in one pass. Metrics whose denominator is empty are left
/// unset instead of throwing.
MetricReport evaluate_image(const LabelMap& pred, const LabelMap& gt, const BinaryGrid& human);
MetricReport evaluate_image(const ProbMap& probs, const LabelMap& gt, const BinaryGrid& human);
MetricReport evaluate_image(const LabelMap& pred, const LabelMap& gt, const ScalarField& human);

/// Per-image macro average; unset values are skipped metric by metric.
MetricReport aggregate(std::span<const MetricReport> reports);

/// Union-of-persons mask at prediction resolution (4x4 max pooling when the
/// prediction is a quarter of the mask size).
BinaryGrid human_mask_at(const PersonMaskSet& masks, std::size_t height, std::size_t width);

}  // namespace hotkit
