#pragma once

// Dense grid containers shared by every module. Class ids run 0..17 with 0
// as background; channel k of a probability map corresponds to label k.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hotkit/error.hpp"

namespace hotkit {

inline constexpr int kNumClasses = 18;
inline constexpr int kNumContactClasses = 17;
inline constexpr int kBackground = 0;

using ClassId = std::uint8_t;

/// Row-major H x W grid. A plain value type used for masks, fields and
/// scratch buffers; the semantic types below wrap it with invariants.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t height, std::size_t width, T fill = T{})
      : height_(height), width_(width), data_(height * width, fill) {}
  Grid(std::size_t height, std::size_t width, std::vector<T> data)
      : height_(height), width_(width), data_(std::move(data)) {
    if (data_.size() != height_ * width_)
      fail(ErrorKind::DimensionMismatch, "grid data length does not match height x width");
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }

  T operator()(std::size_t r, std::size_t c) const { return data_[r * width_ + c]; }
  T& operator()(std::size_t r, std::size_t c) { return data_[r * width_ + c]; }
  T operator[](std::size_t i) const { return data_[i]; }
  T& operator[](std::size_t i) { return data_[i]; }

  std::span<const T> data() const noexcept { return data_; }
  std::span<T> data() noexcept { return data_; }
  const std::vector<T>& vec() const noexcept { return data_; }

  bool same_shape(std::size_t h, std::size_t w) const noexcept {
    return height_ == h && width_ == w;
  }
  template <typename U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return height_ == other.height() && width_ == other.width();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<T> data_;
};

/// Real-valued H x W field (filter masks, binarized class maps, gradients).
using ScalarField = Grid<double>;
using BinaryGrid = Grid<std::uint8_t>;

/// H x W class-id map, every entry in 0..17.
class LabelMap {
 public:
  LabelMap(std::size_t height, std::size_t width, std::vector<ClassId> data);
  static LabelMap filled(std::size_t height, std::size_t width, ClassId value);

  std::size_t height() const noexcept { return grid_.height(); }
  std::size_t width() const noexcept { return grid_.width(); }
  std::size_t size() const noexcept { return grid_.size(); }
  ClassId operator()(std::size_t r, std::size_t c) const { return grid_(r, c); }
  ClassId operator[](std::size_t i) const { return grid_[i]; }
  std::span<const ClassId> data() const noexcept { return grid_.data(); }
  const Grid<ClassId>& grid() const noexcept { return grid_; }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  Grid<ClassId> grid_;
};

/// Channel-major C x H x W real tensor with no value constraints. Decoder
/// features and loss gradients live here.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(std::size_t channels, std::size_t height, std::size_t width, double fill = 0.0);
  FeatureMap(std::size_t channels, std::size_t height, std::size_t width,
             std::vector<double> data);

  std::size_t channels() const noexcept { return channels_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t plane() const noexcept { return height_ * width_; }

  double operator()(std::size_t k, std::size_t r, std::size_t c) const {
    return data_[(k * height_ + r) * width_ + c];
  }
  double& operator()(std::size_t k, std::size_t r, std::size_t c) {
    return data_[(k * height_ + r) * width_ + c];
  }
  std::span<const double> channel(std::size_t k) const {
    return std::span<const double>(data_).subspan(k * plane(), plane());
  }
  std::span<double> channel(std::size_t k) {
    return std::span<double>(data_).subspan(k * plane(), plane());
  }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  std::size_t channels_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

/// 18 x H x W per-pixel class distribution. Values lie in [0, 1]; the map is
/// flagged normalized when every pixel's channels sum to 1 within 1e-5.
class ProbMap {
 public:
  static constexpr double kSimplexTolerance = 1e-5;

  ProbMap(std::size_t height, std::size_t width, std::vector<double> data);
  /// One-hot encoding of labels, optionally softened: the label channel keeps
  /// 1 - eps and the other 17 channels share eps.
  static ProbMap one_hot(const LabelMap& labels, double eps = 0.0);

  std::size_t height() const noexcept { return values_.height(); }
  std::size_t width() const noexcept { return values_.width(); }
  std::size_t plane() const noexcept { return values_.plane(); }
  bool is_normalized() const noexcept { return normalized_; }

  double operator()(std::size_t k, std::size_t r, std::size_t c) const { return values_(k, r, c); }
  std::span<const double> channel(std::size_t k) const { return values_.channel(k); }
  std::span<const double> data() const noexcept { return values_.data(); }
  const FeatureMap& features() const noexcept { return values_; }

  friend bool operator==(const ProbMap&, const ProbMap&) = default;

 private:
  FeatureMap values_;
  bool normalized_ = false;
};

/// H x W depth field. Raw maps only need finite values; normalized maps also
/// lie in [0, 1]. `degenerate` marks the all-zero output of normalizing a
/// constant map.
class DepthMap {
 public:
  static DepthMap raw(ScalarField values);
  static DepthMap normalized(ScalarField values, bool degenerate = false);

  std::size_t height() const noexcept { return values_.height(); }
  std::size_t width() const noexcept { return values_.width(); }
  std::size_t size() const noexcept { return values_.size(); }
  bool is_normalized() const noexcept { return normalized_; }
  bool is_degenerate() const noexcept { return degenerate_; }
  double operator()(std::size_t r, std::size_t c) const { return values_(r, c); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> data() const noexcept { return values_.data(); }
  const ScalarField& field() const noexcept { return values_; }

 private:
  DepthMap(ScalarField values, bool normalized, bool degenerate)
      : values_(std::move(values)), normalized_(normalized), degenerate_(degenerate) {}

  ScalarField values_;
  bool normalized_ = false;
  bool degenerate_ = false;
};

/// N binary H x W person masks, each with at least one set pixel. N may be 0.
class PersonMaskSet {
 public:
  PersonMaskSet(std::size_t count, std::size_t height, std::size_t width,
                std::vector<std::uint8_t> data);
  static PersonMaskSet from_masks(const std::vector<BinaryGrid>& masks);

  std::size_t count() const noexcept { return count_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::span<const std::uint8_t> mask(std::size_t i) const {
    return std::span<const std::uint8_t>(data_).subspan(i * height_ * width_, height_ * width_);
  }
  std::span<const std::uint8_t> data() const noexcept { return data_; }
  /// Pixelwise maximum over all persons.
  BinaryGrid union_mask() const;

  friend bool operator==(const PersonMaskSet&, const PersonMaskSet&) = default;

 private:
  std::size_t count_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Image-prompt cosine similarity for contact classes 1..17.
class SimilarityVector {
 public:
  explicit SimilarityVector(const std::array<double, kNumContactClasses>& values);
  /// Value for contact class c in 1..17.
  double for_class(int c) const { return values_.at(static_cast<std::size_t>(c - 1)); }
  const std::array<double, kNumContactClasses>& values() const noexcept { return values_; }

 private:
  std::array<double, kNumContactClasses> values_{};
};

/// Presence flags for contact classes 1..17.
class ContactIndicator {
 public:
  ContactIndicator() = default;
  explicit ContactIndicator(const std::array<std::uint8_t, kNumContactClasses>& flags);
  bool has_class(int c) const { return flags_.at(static_cast<std::size_t>(c - 1)) != 0; }
  const std::array<std::uint8_t, kNumContactClasses>& flags() const noexcept { return flags_; }

  friend bool operator==(const ContactIndicator&, const ContactIndicator&) = default;

 private:
  std::array<std::uint8_t, kNumContactClasses> flags_{};
};

/// Weights of the joint objective and the depth-band half-width.
struct LossWeights {
  double alpha = 0.3;
  double beta = 0.1;
  double gamma = 1.0;
  double tau = 0.1;

  void validate() const;
};

void require_contact_class(int c);
void require_same_shape(std::size_t h1, std::size_t w1, std::size_t h2, std::size_t w2,
                        const char* what);
void require_binary(const ScalarField& mask, const char* what);
BinaryGrid to_binary(const ScalarField& mask, const char* what);
ScalarField to_field(const BinaryGrid& mask);

/// 1 where labels == c, else 0. c must be a contact class 1..17.
ScalarField binarize_class(const LabelMap& labels, int c);
/// Index of the largest channel per pixel; ties go to the lowest index.
LabelMap argmax_labels(const ProbMap& probs);
/// 1 where label > 0, else 0.
ScalarField binarize_nonzero(const LabelMap& labels);

/// Nearest-neighbour stride-`factor` subsampling (keeps pixel (f*i, f*j)).
LabelMap downsample_labels_nearest(const LabelMap& labels, std::size_t factor = 4);
/// factor x factor max pooling of a binary mask.
BinaryGrid max_pool_mask(const BinaryGrid& mask, std::size_t factor = 4);

}  // namespace hotkit
