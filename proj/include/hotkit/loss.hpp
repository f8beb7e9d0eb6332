#pragma once

// Loss terms of the joint objective
//   total = CE + alpha * local + beta * global + gamma * BE(S, C)
// The local and global region losses come in two forms: hard counting on
// label maps, and a soft form on probability channels that reduces to the
// hard value on one-hot input.

#include <array>
#include <vector>

#include "hotkit/grid.hpp"

namespace hotkit {

/// Clamp applied before every logarithm.
inline constexpr double kLogEpsilon = 1e-7;

/// Per-class loss values for classes 0..17. `total` sums all 18 (background
/// included); `contact_total` sums classes 1..17.
struct ClassLosses {
  std::array<double, kNumClasses> per_class{};
  double total = 0.0;
  double contact_total = 0.0;
};

/// Loss value with its gradient w.r.t. every probability entry (18 x H x W).
struct SoftLoss {
  ClassLosses value;
  FeatureMap grad;
};

struct ScalarLoss {
  double value = 0.0;
  FeatureMap grad;
};

struct PromptLoss {
  double value = 0.0;
  std::array<double, kNumContactClasses> grad{};
};

struct LossBreakdown {
  double ce = 0.0;
  double local_jl = 0.0;
  double global_jl = 0.0;
  double prompt_be = 0.0;
  double total = 0.0;
};

/// Cosine of `a` against each row. Throws ZeroVector on a zero-norm input.
std::vector<double> cosine_similarity(const std::vector<double>& a,
                                      const std::vector<std::vector<double>>& rows);

/// Channel 0 passes through; channel k in 1..17 is scaled by s[k].
FeatureMap prompt_gate(const FeatureMap& features, const SimilarityVector& s);

/// Per class c with gt area A_c > 0: (#pixels with gt = c and pred != c) / A_c.
ClassLosses local_joint_loss_hard(const LabelMap& pred, const LabelMap& gt);

/// Per class c: sum over gt = c pixels of |P_c - 1|, divided by A_c.
SoftLoss local_joint_loss_soft(const ProbMap& probs, const LabelMap& gt);

/// Per class c: number of pixels in enclosed_foreign_mask(pred, c).
ClassLosses global_joint_loss_hard(const LabelMap& pred);

/// Enclosed-foreign regions of every class 0..17, as an 18-bit set per pixel.
struct GlobalRegions {
  Grid<std::uint32_t> classes;
  bool contains(std::size_t pixel, int c) const { return (classes[pixel] >> c) & 1u; }
};
GlobalRegions global_regions(const LabelMap& labels);

/// Soft global loss with region selection taken from argmax(probs).
SoftLoss global_joint_loss_soft(const ProbMap& probs);
/// Soft global loss over fixed regions: per class c, sum of (1 - P_c) over R_c.
SoftLoss global_joint_loss_soft(const ProbMap& probs, const GlobalRegions& regions);

/// Mean over pixels of -log(max(P_gt, 1e-7)).
ScalarLoss cross_entropy(const ProbMap& probs, const LabelMap& gt);

ContactIndicator contact_indicator_from_gt(const LabelMap& gt);

/// Binary cross-entropy of p = clamp((s + 1) / 2) against the indicator,
/// averaged over the 17 contact classes.
PromptLoss prompt_be_loss(const SimilarityVector& s, const ContactIndicator& c);

LossBreakdown total_loss(const ProbMap& probs, const LabelMap& gt, const SimilarityVector& s,
                         const LossWeights& weights);

/// Combines precomputed components with the weights (BE may be absent).
double combine_losses(double ce, double local_jl, double global_jl, double prompt_be,
                      const LossWeights& weights);

}  // namespace hotkit
