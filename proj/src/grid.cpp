#include "hotkit/grid.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

namespace hotkit {

LabelMap::LabelMap(std::size_t height, std::size_t width, std::vector<ClassId> data)
    : grid_(height, width, std::move(data)) {
  if (height == 0 || width == 0)
    fail(ErrorKind::InvariantViolation, "label map must be at least 1x1");
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    if (grid_[i] >= kNumClasses)
      fail(ErrorKind::InvariantViolation,
           fmt::format("label {} at index {} exceeds 17", int(grid_[i]), i));
  }
}

LabelMap LabelMap::filled(std::size_t height, std::size_t width, ClassId value) {
  return LabelMap(height, width, std::vector<ClassId>(height * width, value));
}

FeatureMap::FeatureMap(std::size_t channels, std::size_t height, std::size_t width, double fill)
    : channels_(channels), height_(height), width_(width),
      data_(channels * height * width, fill) {}

FeatureMap::FeatureMap(std::size_t channels, std::size_t height, std::size_t width,
                       std::vector<double> data)
    : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
  if (data_.size() != channels_ * height_ * width_)
    fail(ErrorKind::DimensionMismatch, "feature data length does not match C x H x W");
}

ProbMap::ProbMap(std::size_t height, std::size_t width, std::vector<double> data)
    : values_(kNumClasses, height, width, std::move(data)) {
  if (height == 0 || width == 0)
    fail(ErrorKind::InvariantViolation, "probability map must be at least 1x1");
  for (std::size_t i = 0; i < values_.data().size(); ++i) {
    const double v = values_.data()[i];
    if (!(v >= 0.0 && v <= 1.0))
      fail(ErrorKind::InvariantViolation,
           fmt::format("probability {} at flat index {} outside [0, 1]", v, i));
  }
  normalized_ = true;
  const std::size_t n = plane();
  for (std::size_t p = 0; p < n && normalized_; ++p) {
    double sum = 0.0;
    for (std::size_t k = 0; k < kNumClasses; ++k) sum += values_.data()[k * n + p];
    if (std::abs(sum - 1.0) > kSimplexTolerance) normalized_ = false;
  }
}

ProbMap ProbMap::one_hot(const LabelMap& labels, double eps) {
  const std::size_t n = labels.size();
  const double off = eps / (kNumClasses - 1);
  std::vector<double> data(kNumClasses * n, off);
  for (std::size_t p = 0; p < n; ++p) data[labels[p] * n + p] = 1.0 - eps;
  return ProbMap(labels.height(), labels.width(), std::move(data));
}

DepthMap DepthMap::raw(ScalarField values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      fail(ErrorKind::InvariantViolation, fmt::format("depth value at index {} is not finite", i));
  }
  return DepthMap(std::move(values), false, false);
}

DepthMap DepthMap::normalized(ScalarField values, bool degenerate) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!(v >= 0.0 && v <= 1.0))
      fail(ErrorKind::InvariantViolation,
           fmt::format("normalized depth {} at index {} outside [0, 1]", v, i));
  }
  return DepthMap(std::move(values), true, degenerate);
}

PersonMaskSet::PersonMaskSet(std::size_t count, std::size_t height, std::size_t width,
                             std::vector<std::uint8_t> data)
    : count_(count), height_(height), width_(width), data_(std::move(data)) {
  const std::size_t plane = height_ * width_;
  if (data_.size() != count_ * plane)
    fail(ErrorKind::DimensionMismatch, "person mask data length does not match N x H x W");
  for (std::size_t i = 0; i < count_; ++i) {
    bool any = false;
    for (std::size_t p = 0; p < plane; ++p) {
      const std::uint8_t v = data_[i * plane + p];
      if (v > 1)
        fail(ErrorKind::InvariantViolation,
             fmt::format("person mask {} has non-binary value {} at pixel {}", i, int(v), p));
      any = any || v != 0;
    }
    if (!any) fail(ErrorKind::InvariantViolation, fmt::format("person mask {} is empty", i));
  }
}

PersonMaskSet PersonMaskSet::from_masks(const std::vector<BinaryGrid>& masks) {
  if (masks.empty()) return PersonMaskSet(0, 0, 0, {});
  const std::size_t h = masks.front().height();
  const std::size_t w = masks.front().width();
  std::vector<std::uint8_t> data;
  data.reserve(masks.size() * h * w);
  for (const auto& m : masks) {
    if (!m.same_shape(h, w)) fail(ErrorKind::DimensionMismatch, "person masks differ in size");
    data.insert(data.end(), m.data().begin(), m.data().end());
  }
  return PersonMaskSet(masks.size(), h, w, std::move(data));
}

BinaryGrid PersonMaskSet::union_mask() const {
  BinaryGrid out(height_, width_, std::uint8_t{0});
  const std::size_t plane = height_ * width_;
  for (std::size_t i = 0; i < count_; ++i)
    for (std::size_t p = 0; p < plane; ++p) out[p] |= data_[i * plane + p];
  return out;
}

SimilarityVector::SimilarityVector(const std::array<double, kNumContactClasses>& values)
    : values_(values) {
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!(values_[k] >= -1.0 && values_[k] <= 1.0))
      fail(ErrorKind::InvariantViolation,
           fmt::format("similarity for class {} is {}, outside [-1, 1]", k + 1, values_[k]));
  }
}

ContactIndicator::ContactIndicator(const std::array<std::uint8_t, kNumContactClasses>& flags)
    : flags_(flags) {
  for (std::size_t k = 0; k < flags_.size(); ++k) {
    if (flags_[k] > 1)
      fail(ErrorKind::InvariantViolation, fmt::format("contact flag {} is not binary", k + 1));
  }
}

void LossWeights::validate() const {
  auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!ok(alpha) || !ok(beta) || !ok(gamma))
    fail(ErrorKind::ConfigInvalid, "loss weights must be finite and non-negative");
  if (!(std::isfinite(tau) && tau > 0.0))
    fail(ErrorKind::ConfigInvalid, "tau must be finite and positive");
}

void require_contact_class(int c) {
  if (c < 1 || c > kNumContactClasses)
    fail(ErrorKind::InvalidClass, fmt::format("class {} is not a contact class (1..17)", c));
}

void require_same_shape(std::size_t h1, std::size_t w1, std::size_t h2, std::size_t w2,
                        const char* what) {
  if (h1 != h2 || w1 != w2)
    fail(ErrorKind::DimensionMismatch,
         fmt::format("{}: {}x{} vs {}x{}", what, h1, w1, h2, w2));
}

void require_binary(const ScalarField& mask, const char* what) {
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0.0 && mask[i] != 1.0)
      fail(ErrorKind::NonBinaryInput, fmt::format("{}: value {} at index {}", what, mask[i], i));
  }
}

BinaryGrid to_binary(const ScalarField& mask, const char* what) {
  require_binary(mask, what);
  BinaryGrid out(mask.height(), mask.width(), std::uint8_t{0});
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] != 0.0 ? 1 : 0;
  return out;
}

ScalarField to_field(const BinaryGrid& mask) {
  ScalarField out(mask.height(), mask.width(), 0.0);
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] ? 1.0 : 0.0;
  return out;
}

ScalarField binarize_class(const LabelMap& labels, int c) {
  require_contact_class(c);
  ScalarField out(labels.height(), labels.width(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(labels.size());
  const ClassId target = static_cast<ClassId>(c);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = labels[i] == target ? 1.0 : 0.0;
  return out;
}

LabelMap argmax_labels(const ProbMap& probs) {
  const std::size_t n = probs.plane();
  const auto data = probs.data();
  std::vector<ClassId> labels(n, 0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(n); ++p) {
    double best = data[p];
    ClassId arg = 0;
    for (std::size_t k = 1; k < kNumClasses; ++k) {
      const double v = data[k * n + p];
      if (v > best) {
        best = v;
        arg = static_cast<ClassId>(k);
      }
    }
    labels[p] = arg;
  }
  return LabelMap(probs.height(), probs.width(), std::move(labels));
}

ScalarField binarize_nonzero(const LabelMap& labels) {
  ScalarField out(labels.height(), labels.width(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(labels.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = labels[i] > 0 ? 1.0 : 0.0;
  return out;
}

LabelMap downsample_labels_nearest(const LabelMap& labels, std::size_t factor) {
  if (factor == 0 || labels.height() % factor != 0 || labels.width() % factor != 0)
    fail(ErrorKind::DimensionMismatch,
         fmt::format("{}x{} is not divisible by {}", labels.height(), labels.width(), factor));
  const std::size_t h = labels.height() / factor;
  const std::size_t w = labels.width() / factor;
  std::vector<ClassId> out(h * w);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) out[r * w + c] = labels(r * factor, c * factor);
  return LabelMap(h, w, std::move(out));
}

BinaryGrid max_pool_mask(const BinaryGrid& mask, std::size_t factor) {
  if (factor == 0 || mask.height() % factor != 0 || mask.width() % factor != 0)
    fail(ErrorKind::DimensionMismatch,
         fmt::format("{}x{} is not divisible by {}", mask.height(), mask.width(), factor));
  const std::size_t h = mask.height() / factor;
  const std::size_t w = mask.width() / factor;
  BinaryGrid out(h, w, std::uint8_t{0});
  for (std::size_t r = 0; r < mask.height(); ++r)
    for (std::size_t c = 0; c < mask.width(); ++c)
      out(r / factor, c / factor) |= mask(r, c) ? 1 : 0;
  return out;
}

}  // namespace hotkit
