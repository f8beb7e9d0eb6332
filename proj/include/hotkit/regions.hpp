#pragma once

// 8-connected component labeling and the enclosed-region search used by the
// global joint loss: binarize class c, negate, label components, collect the
// labels that reach the image border, keep everything else.

#include <cstdint>
#include <vector>

#include "hotkit/grid.hpp"

namespace hotkit {

/// Component labels of a binary grid. 0 marks input-zero pixels; 1..count are
/// dense and numbered in raster order of each component's first pixel.
class ComponentMap {
 public:
  ComponentMap(Grid<std::uint32_t> labels, std::uint32_t count)
      : labels_(std::move(labels)), count_(count) {}

  std::size_t height() const noexcept { return labels_.height(); }
  std::size_t width() const noexcept { return labels_.width(); }
  std::uint32_t count() const noexcept { return count_; }
  std::uint32_t operator()(std::size_t r, std::size_t c) const { return labels_(r, c); }
  std::uint32_t operator[](std::size_t i) const { return labels_[i]; }
  const Grid<std::uint32_t>& labels() const noexcept { return labels_; }

  friend bool operator==(const ComponentMap&, const ComponentMap&) = default;

 private:
  Grid<std::uint32_t> labels_;
  std::uint32_t count_ = 0;
};

/// Sorted, de-duplicated component labels found on the first/last row and
/// first/last column.
class BoundaryLabelSet {
 public:
  explicit BoundaryLabelSet(std::vector<std::uint32_t> sorted_labels)
      : labels_(std::move(sorted_labels)) {}
  bool contains(std::uint32_t label) const;
  const std::vector<std::uint32_t>& labels() const noexcept { return labels_; }

 private:
  std::vector<std::uint32_t> labels_;
};

/// Elementwise 1 - x of a {0,1} field. Throws NonBinaryInput otherwise.
ScalarField negate(const ScalarField& mask);

/// Two-pass union-find labeling with 8-connectivity.
ComponentMap label_components(const ScalarField& mask);
ComponentMap label_components(const BinaryGrid& mask);

BoundaryLabelSet boundary_labels(const ComponentMap& components);

/// 1 where the component label of (labels != c) is not on the border. Class-c
/// pixels carry label 0, so they are marked too when no class-c pixel touches
/// the border.
ScalarField enclosed_mask(const LabelMap& labels, int c);

/// enclosed_mask restricted to pixels whose label differs from c.
ScalarField enclosed_foreign_mask(const LabelMap& labels, int c);

namespace detail {
/// Binary enclosed-foreign mask for any class 0..17 (background included).
/// Returns the number of marked pixels; `out` may be null.
std::size_t enclosed_foreign(const LabelMap& labels, int c, BinaryGrid* out);
/// Literal enclosed mask for any class 0..17.
BinaryGrid enclosed_literal(const LabelMap& labels, int c);
}  // namespace detail

/// Enclosed-foreign pixel counts for every class 0..17, classes processed in
/// parallel.
std::array<std::size_t, kNumClasses> enclosed_foreign_counts(const LabelMap& labels);

}  // namespace hotkit
