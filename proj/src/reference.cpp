#include "hotkit/reference.hpp"

#include <algorithm>
#include <cmath>

#include "hotkit/regions.hpp"

namespace hotkit::reference {

ScalarField binarize_class(const LabelMap& labels, int c) {
  require_contact_class(c);
  ScalarField out(labels.height(), labels.width(), 0.0);
  for (std::size_t r = 0; r < labels.height(); ++r)
    for (std::size_t col = 0; col < labels.width(); ++col)
      if (labels(r, col) == c) out(r, col) = 1.0;
  return out;
}

LabelMap argmax_labels(const ProbMap& probs) {
  std::vector<ClassId> out(probs.plane(), 0);
  for (std::size_t r = 0; r < probs.height(); ++r) {
    for (std::size_t c = 0; c < probs.width(); ++c) {
      int best = 0;
      for (int k = 1; k < kNumClasses; ++k)
        if (probs(k, r, c) > probs(best, r, c)) best = k;
      out[r * probs.width() + c] = static_cast<ClassId>(best);
    }
  }
  return LabelMap(probs.height(), probs.width(), std::move(out));
}

std::vector<double> person_mean_depth(const DepthMap& depth_normalized,
                                      const PersonMaskSet& masks) {
  std::vector<double> means;
  for (std::size_t i = 0; i < masks.count(); ++i) {
    const auto m = masks.mask(i);
    double weighted = 0.0, area = 0.0;
    for (std::size_t p = 0; p < m.size(); ++p) {
      weighted += m[p] * depth_normalized[p];
      area += m[p];
    }
    means.push_back(weighted / area);
  }
  return means;
}

ScalarField hard_filter_mask(const DepthMap& depth_normalized, const std::vector<double>& means,
                             double tau) {
  ScalarField out(depth_normalized.height(), depth_normalized.width(), 0.0);
  for (std::size_t p = 0; p < out.size(); ++p)
    for (double m : means)
      if (m - tau < depth_normalized[p] && depth_normalized[p] < m + tau) out[p] = 1.0;
  return out;
}

ScalarField soft_filter_mask(const DepthMap& depth_normalized, const std::vector<double>& means,
                             double tau) {
  ScalarField out(depth_normalized.height(), depth_normalized.width(), 0.0);
  for (double m : means) {
    for (std::size_t p = 0; p < out.size(); ++p) {
      const double theta = (depth_normalized[p] - (m - tau)) * ((m + tau) - depth_normalized[p]);
      if (theta > 0.0) out[p] += theta;
    }
  }
  return out;
}

ScalarField soft_mask_tau_grad(const DepthMap& depth_normalized,
                               const std::vector<double>& means, double tau) {
  ScalarField out(depth_normalized.height(), depth_normalized.width(), 0.0);
  for (double m : means) {
    for (std::size_t p = 0; p < out.size(); ++p) {
      const double theta = (depth_normalized[p] - (m - tau)) * ((m + tau) - depth_normalized[p]);
      if (theta > 0.0) out[p] += 2.0 * tau;
    }
  }
  return out;
}

FeatureMap downsample_add(const ScalarField& fm, const FeatureMap& feature) {
  FeatureMap out = feature;
  for (std::size_t k = 0; k < feature.channels(); ++k)
    for (std::size_t r = 0; r < feature.height(); ++r)
      for (std::size_t c = 0; c < feature.width(); ++c) {
        double sum = 0.0;
        for (std::size_t y = 4 * r; y < 4 * r + 4; ++y)
          for (std::size_t x = 4 * c; x < 4 * c + 4; ++x) sum += fm(y, x);
        out(k, r, c) += sum / 16.0;
      }
  return out;
}

double local_joint_loss_soft(const ProbMap& probs, const LabelMap& gt) {
  double total = 0.0;
  for (int c = 0; c < kNumClasses; ++c) {
    double num = 0.0, area = 0.0;
    for (std::size_t r = 0; r < gt.height(); ++r)
      for (std::size_t x = 0; x < gt.width(); ++x) {
        const double g = gt(r, x) == c ? 1.0 : 0.0;
        num += std::abs(probs(c, r, x) - g) * g;
        area += g;
      }
    if (area > 0.0) total += num / area;
  }
  return total;
}

double cross_entropy(const ProbMap& probs, const LabelMap& gt) {
  double sum = 0.0;
  for (std::size_t r = 0; r < gt.height(); ++r)
    for (std::size_t c = 0; c < gt.width(); ++c)
      sum -= std::log(std::clamp(probs(gt(r, c), r, c), kLogEpsilon, 1.0));
  return sum / static_cast<double>(gt.size());
}

std::size_t enclosed_foreign(const LabelMap& labels, int c) {
  std::vector<std::uint8_t> other(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) other[i] = labels[i] != c;
  const ComponentMap comps = label_components(BinaryGrid(labels.height(), labels.width(), other));
  const BoundaryLabelSet border = boundary_labels(comps);
  std::size_t marked = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    marked += other[i] && !border.contains(comps[i]);
  return marked;
}

std::array<std::size_t, kNumClasses> enclosed_foreign_counts(const LabelMap& labels) {
  std::array<std::size_t, kNumClasses> counts{};
  for (int c = 0; c < kNumClasses; ++c)
    counts[c] = enclosed_foreign(labels, c);
  return counts;
}

MetricReport evaluate_image(const LabelMap& pred, const LabelMap& gt, const BinaryGrid& human) {
  const std::size_t n = gt.size();
  double gt_b = 0, hit = 0, exact = 0, zeta = 0, zeta_hit = 0;
  for (std::size_t p = 0; p < n; ++p) {
    const double g = gt[p] > 0, o = pred[p] > 0;
    const double z = human[p] - g * human[p];
    gt_b += g;
    hit += g * o;
    exact += (gt[p] > 0 && gt[p] == pred[p]);
    zeta += z;
    zeta_hit += z * o;
  }
  MetricReport r;
  if (gt_b > 0) {
    r.sc_acc = 100.0 * exact / gt_b;
    r.c_acc = 100.0 * hit / gt_b;
  }
  r.ad_acc = 100.0 * (hit / (gt_b + kAdAccDelta) - zeta_hit / (zeta + kAdAccDelta));

  double iou_sum = 0.0, weighted = 0.0;
  int defined = 0;
  for (int c = 1; c < kNumClasses; ++c) {
    double inter = 0, uni = 0, area = 0;
    for (std::size_t p = 0; p < n; ++p) {
      inter += pred[p] == c && gt[p] == c;
      uni += pred[p] == c || gt[p] == c;
      area += gt[p] == c;
    }
    if (uni == 0) continue;
    const double iou = inter / uni;
    r.per_class_iou[c - 1] = 100.0 * iou;
    iou_sum += iou;
    ++defined;
    if (gt_b > 0) weighted += area / gt_b * iou;
  }
  if (defined > 0) r.miou = 100.0 * iou_sum / defined;
  if (gt_b > 0) r.wiou = 100.0 * weighted;
  return r;
}

}  // namespace hotkit::reference
