#include "hotkit/loss.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hotkit/parallel.hpp"
#include "hotkit/regions.hpp"

namespace hotkit {

namespace {

void require_normalized(const ProbMap& probs) {
  if (!probs.is_normalized())
    fail(ErrorKind::NotNormalized, "probability map channels must sum to 1 per pixel");
}

void finish(ClassLosses& losses) {
  losses.total = 0.0;
  losses.contact_total = 0.0;
  for (int c = 0; c < kNumClasses; ++c) {
    losses.total += losses.per_class[c];
    if (c > 0) losses.contact_total += losses.per_class[c];
  }
}

std::array<std::size_t, kNumClasses> class_areas(const LabelMap& labels) {
  std::array<std::size_t, kNumClasses> areas{};
  for (ClassId v : labels.data()) ++areas[v];
  return areas;
}

double norm(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace

std::vector<double> cosine_similarity(const std::vector<double>& a,
                                      const std::vector<std::vector<double>>& rows) {
  const double na = norm(a);
  if (na == 0.0) fail(ErrorKind::ZeroVector, "query vector has zero norm");
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != a.size())
      fail(ErrorKind::DimensionMismatch,
           fmt::format("row {} has dimension {}, expected {}", r, row.size(), a.size()));
    const double nr = norm(row);
    if (nr == 0.0) fail(ErrorKind::ZeroVector, fmt::format("row {} has zero norm", r));
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * row[i];
    out.push_back(std::clamp(dot / (na * nr), -1.0, 1.0));
  }
  return out;
}

FeatureMap prompt_gate(const FeatureMap& features, const SimilarityVector& s) {
  if (features.channels() != kNumClasses)
    fail(ErrorKind::DimensionMismatch,
         fmt::format("prompt gating needs 18 channels, got {}", features.channels()));
  FeatureMap out = features;
  for (int k = 1; k < kNumClasses; ++k) {
    const double scale = s.for_class(k);
    for (double& v : out.channel(k)) v *= scale;
  }
  return out;
}

ClassLosses local_joint_loss_hard(const LabelMap& pred, const LabelMap& gt) {
  require_same_shape(pred.height(), pred.width(), gt.height(), gt.width(), "prediction vs gt");
  const auto areas = class_areas(gt);
  const auto pd = pred.data();
  const auto gd = gt.data();
  const auto misses = ordered_sum_array<kNumClasses>(gd.size(), [&](std::size_t p, auto& acc) {
    if (pd[p] != gd[p]) acc[gd[p]] += 1.0;
  });
  ClassLosses out;
  for (int c = 0; c < kNumClasses; ++c)
    if (areas[c] > 0) out.per_class[c] = misses[c] / static_cast<double>(areas[c]);
  finish(out);
  return out;
}

SoftLoss local_joint_loss_soft(const ProbMap& probs, const LabelMap& gt) {
  require_same_shape(probs.height(), probs.width(), gt.height(), gt.width(), "probs vs gt");
  require_normalized(probs);
  const auto areas = class_areas(gt);
  const auto gd = gt.data();
  const auto pd = probs.data();
  const std::size_t n = gd.size();
  const auto sums = ordered_sum_array<kNumClasses>(n, [&](std::size_t p, auto& acc) {
    acc[gd[p]] += std::abs(pd[gd[p] * n + p] - 1.0);
  });
  SoftLoss out{{}, FeatureMap(kNumClasses, probs.height(), probs.width(), 0.0)};
  for (int c = 0; c < kNumClasses; ++c)
    if (areas[c] > 0) out.value.per_class[c] = sums[c] / static_cast<double>(areas[c]);
  finish(out.value);
  auto grad = out.grad.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(n); ++p) {
    const std::size_t c = gd[p];
    const std::size_t idx = c * n + static_cast<std::size_t>(p);
    if (pd[idx] < 1.0) grad[idx] = -1.0 / static_cast<double>(areas[c]);
  }
  return out;
}

ClassLosses global_joint_loss_hard(const LabelMap& pred) {
  const auto counts = enclosed_foreign_counts(pred);
  ClassLosses out;
  for (int c = 0; c < kNumClasses; ++c) out.per_class[c] = static_cast<double>(counts[c]);
  finish(out);
  return out;
}

GlobalRegions global_regions(const LabelMap& labels) {
  std::array<BinaryGrid, kNumClasses> masks;
  std::array<std::size_t, kNumClasses> counts{};
#pragma omp parallel for schedule(dynamic, 1)
  for (int c = 0; c < kNumClasses; ++c)
    counts[c] = detail::enclosed_foreign(labels, c, &masks[c]);

  GlobalRegions regions{Grid<std::uint32_t>(labels.height(), labels.width(), 0u)};
  for (int c = 0; c < kNumClasses; ++c) {
    if (counts[c] == 0) continue;
    const auto bits = masks[c].data();
    auto dst = regions.classes.data();
    const std::uint32_t flag = 1u << c;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(bits.size()); ++p)
      if (bits[p]) dst[p] |= flag;
  }
  return regions;
}

SoftLoss global_joint_loss_soft(const ProbMap& probs) {
  require_normalized(probs);
  return global_joint_loss_soft(probs, global_regions(argmax_labels(probs)));
}

SoftLoss global_joint_loss_soft(const ProbMap& probs, const GlobalRegions& regions) {
  require_normalized(probs);
  require_same_shape(probs.height(), probs.width(), regions.classes.height(),
                     regions.classes.width(), "probs vs regions");
  const auto pd = probs.data();
  const auto sel = regions.classes.data();
  const std::size_t n = sel.size();
  const auto sums = ordered_sum_array<kNumClasses>(n, [&](std::size_t p, auto& acc) {
    std::uint32_t bits = sel[p];
    while (bits) {
      const int c = __builtin_ctz(bits);
      acc[c] += 1.0 - pd[static_cast<std::size_t>(c) * n + p];
      bits &= bits - 1;
    }
  });
  SoftLoss out{{}, FeatureMap(kNumClasses, probs.height(), probs.width(), 0.0)};
  out.value.per_class = sums;
  finish(out.value);
  auto grad = out.grad.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(n); ++p) {
    std::uint32_t bits = sel[p];
    while (bits) {
      const int c = __builtin_ctz(bits);
      grad[static_cast<std::size_t>(c) * n + static_cast<std::size_t>(p)] = -1.0;
      bits &= bits - 1;
    }
  }
  return out;
}

ScalarLoss cross_entropy(const ProbMap& probs, const LabelMap& gt) {
  require_same_shape(probs.height(), probs.width(), gt.height(), gt.width(), "probs vs gt");
  require_normalized(probs);
  const auto gd = gt.data();
  const auto pd = probs.data();
  const std::size_t n = gd.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  ScalarLoss out{0.0, FeatureMap(kNumClasses, probs.height(), probs.width(), 0.0)};
  out.value = ordered_sum(n, [&](std::size_t p) {
    return -std::log(std::max(pd[gd[p] * n + p], kLogEpsilon));
  }) * inv_n;
  auto grad = out.grad.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(n); ++p) {
    const std::size_t idx = gd[p] * n + static_cast<std::size_t>(p);
    if (pd[idx] >= kLogEpsilon) grad[idx] = -inv_n / pd[idx];
  }
  return out;
}

ContactIndicator contact_indicator_from_gt(const LabelMap& gt) {
  std::array<std::uint8_t, kNumContactClasses> flags{};
  for (ClassId v : gt.data())
    if (v > 0) flags[v - 1] = 1;
  return ContactIndicator(flags);
}

PromptLoss prompt_be_loss(const SimilarityVector& s, const ContactIndicator& c) {
  PromptLoss out;
  constexpr double inv = 1.0 / kNumContactClasses;
  for (int k = 1; k <= kNumContactClasses; ++k) {
    const double raw = (s.for_class(k) + 1.0) / 2.0;
    const double p = std::clamp(raw, kLogEpsilon, 1.0 - kLogEpsilon);
    const bool present = c.has_class(k);
    out.value -= inv * (present ? std::log(p) : std::log(1.0 - p));
    if (raw > kLogEpsilon && raw < 1.0 - kLogEpsilon)
      out.grad[k - 1] = -inv * (present ? 1.0 / p : -1.0 / (1.0 - p)) * 0.5;
  }
  return out;
}

double combine_losses(double ce, double local_jl, double global_jl, double prompt_be,
                      const LossWeights& weights) {
  return ce + weights.alpha * local_jl + weights.beta * global_jl + weights.gamma * prompt_be;
}

LossBreakdown total_loss(const ProbMap& probs, const LabelMap& gt, const SimilarityVector& s,
                         const LossWeights& weights) {
  weights.validate();
  LossBreakdown out;
  out.ce = cross_entropy(probs, gt).value;
  out.local_jl = local_joint_loss_soft(probs, gt).value.total;
  out.global_jl = global_joint_loss_soft(probs).value.total;
  out.prompt_be = prompt_be_loss(s, contact_indicator_from_gt(gt)).value;
  out.total = combine_losses(out.ce, out.local_jl, out.global_jl, out.prompt_be, weights);
  return out;
}

}  // namespace hotkit
