#include "hotkit/regions.hpp"

#include <algorithm>
#include <numeric>

#include "hotkit/parallel.hpp"

namespace hotkit {

namespace {

class DisjointSets {
 public:
  DisjointSets() { parent_.push_back(0); }

  std::uint32_t make() {
    const auto id = static_cast<std::uint32_t>(parent_.size());
    parent_.push_back(id);
    return id;
  }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // The smaller root survives, so parent[x] <= x holds for every x.
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a < b) parent_[b] = a;
    else if (b < a) parent_[a] = b;
  }

  std::size_t size() const { return parent_.size(); }

  // Maps each provisional label to a dense final label. Roots are the first
  // provisional label of their component, so ascending root order equals
  // raster order of first appearance.
  std::uint32_t densify(std::vector<std::uint32_t>& table) {
    table.assign(parent_.size(), 0);
    std::uint32_t next = 0;
    for (std::size_t l = 1; l < parent_.size(); ++l) {
      parent_[l] = parent_[parent_[l]];
      table[l] = parent_[l] == l ? ++next : table[parent_[l]];
    }
    return next;
  }

 private:
  std::vector<std::uint32_t> parent_;
};

// Labels pixels where fg(i) holds; writes dense labels into `out`.
template <typename Foreground>
std::uint32_t label_8(std::size_t h, std::size_t w, Foreground fg, std::uint32_t* out) {
  DisjointSets sets;
  for (std::size_t r = 0; r < h; ++r) {
    const std::size_t row = r * w;
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t i = row + c;
      if (!fg(i)) {
        out[i] = 0;
        continue;
      }
      const std::uint32_t d = c > 0 ? out[i - 1] : 0;
      std::uint32_t a = 0, b = 0, e = 0;
      if (r > 0) {
        b = out[i - w];
        a = c > 0 ? out[i - w - 1] : 0;
        e = c + 1 < w ? out[i - w + 1] : 0;
      }
      std::uint32_t lab;
      if (b) {
        lab = b;
      } else if (e) {
        lab = e;
        if (a) sets.unite(e, a);
        else if (d) sets.unite(e, d);
      } else if (a) {
        lab = a;
      } else if (d) {
        lab = d;
      } else {
        lab = sets.make();
      }
      out[i] = lab;
    }
  }
  std::vector<std::uint32_t> table;
  const std::uint32_t count = sets.densify(table);
  const std::size_t n = h * w;
  for (std::size_t i = 0; i < n; ++i) out[i] = table[out[i]];
  return count;
}

// Flags, indexed by label, of labels present on the border.
std::vector<std::uint8_t> border_flags(const std::uint32_t* labels, std::size_t h, std::size_t w,
                                       std::uint32_t count) {
  std::vector<std::uint8_t> flags(std::size_t{count} + 1, 0);
  for (std::size_t c = 0; c < w; ++c) {
    flags[labels[c]] = 1;
    flags[labels[(h - 1) * w + c]] = 1;
  }
  for (std::size_t r = 0; r < h; ++r) {
    flags[labels[r * w]] = 1;
    flags[labels[r * w + w - 1]] = 1;
  }
  return flags;
}

bool class_present(const LabelMap& labels, int c) {
  const auto data = labels.data();
  return std::find(data.begin(), data.end(), static_cast<ClassId>(c)) != data.end();
}

void require_class_any(int c) {
  if (c < 0 || c >= kNumClasses)
    fail(ErrorKind::InvalidClass, "class id must be in 0..17");
}

}  // namespace

bool BoundaryLabelSet::contains(std::uint32_t label) const {
  return std::binary_search(labels_.begin(), labels_.end(), label);
}

ScalarField negate(const ScalarField& mask) {
  require_binary(mask, "negate");
  ScalarField out(mask.height(), mask.width(), 0.0);
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = 1.0 - mask[i];
  return out;
}

ComponentMap label_components(const BinaryGrid& mask) {
  Grid<std::uint32_t> labels(mask.height(), mask.width(), 0u);
  const auto* src = mask.data().data();
  const std::uint32_t count = label_8(
      mask.height(), mask.width(), [src](std::size_t i) { return src[i] != 0; },
      labels.data().data());
  return ComponentMap(std::move(labels), count);
}

ComponentMap label_components(const ScalarField& mask) {
  return label_components(to_binary(mask, "label_components"));
}

BoundaryLabelSet boundary_labels(const ComponentMap& components) {
  const std::size_t h = components.height();
  const std::size_t w = components.width();
  if (h == 0 || w == 0) return BoundaryLabelSet({});
  const auto flags = border_flags(components.labels().data().data(), h, w, components.count());
  std::vector<std::uint32_t> out;
  for (std::size_t l = 0; l < flags.size(); ++l)
    if (flags[l]) out.push_back(static_cast<std::uint32_t>(l));
  return BoundaryLabelSet(std::move(out));
}

ScalarField enclosed_mask(const LabelMap& labels, int c) {
  require_contact_class(c);
  return to_field(detail::enclosed_literal(labels, c));
}

ScalarField enclosed_foreign_mask(const LabelMap& labels, int c) {
  require_contact_class(c);
  BinaryGrid out;
  detail::enclosed_foreign(labels, c, &out);
  return to_field(out);
}

namespace detail {

BinaryGrid enclosed_literal(const LabelMap& labels, int c) {
  require_class_any(c);
  const std::size_t h = labels.height();
  const std::size_t w = labels.width();
  const auto* src = labels.data().data();
  const auto target = static_cast<ClassId>(c);
  Grid<std::uint32_t> comp(h, w, 0u);
  const std::uint32_t count =
      label_8(h, w, [src, target](std::size_t i) { return src[i] != target; }, comp.data().data());
  const auto on_border = border_flags(comp.data().data(), h, w, count);
  BinaryGrid out(h, w, std::uint8_t{0});
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = on_border[comp[i]] ? 0 : 1;
  return out;
}

// Run-length labeling of (labels != c). The complement of a class is mostly
// foreground, so a row holds only a few runs and the union-find works on runs
// instead of pixels.
std::size_t enclosed_foreign(const LabelMap& labels, int c, BinaryGrid* out) {
  require_class_any(c);
  const std::size_t h = labels.height();
  const std::size_t w = labels.width();
  if (out) *out = BinaryGrid(h, w, std::uint8_t{0});
  // Every pixel is on the border, or (labels != c) is one border-touching
  // component covering the whole map.
  if (h <= 2 || w <= 2 || !class_present(labels, c)) return 0;

  struct Run {
    std::uint32_t row, first, last;  // inclusive columns
  };
  std::vector<Run> runs;
  std::vector<std::uint32_t> parent;
  auto find = [&parent](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  const auto target = static_cast<ClassId>(c);
  std::size_t prev_begin = 0, prev_end = 0;
  for (std::size_t r = 0; r < h; ++r) {
    const ClassId* row = labels.data().data() + r * w;
    const std::size_t row_begin = runs.size();
    std::size_t p = prev_begin;
    for (std::size_t col = 0; col < w;) {
      if (row[col] == target) {
        ++col;
        continue;
      }
      const std::size_t first = col;
      while (col < w && row[col] != target) ++col;
      const std::size_t last = col - 1;
      const auto id = static_cast<std::uint32_t>(runs.size());
      runs.push_back({static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(first),
                      static_cast<std::uint32_t>(last)});
      parent.push_back(id);
      // Previous-row runs touching [first - 1, last + 1] are 8-neighbours.
      while (p < prev_end && runs[p].last + 1 < first) ++p;
      for (std::size_t q = p; q < prev_end && runs[q].first <= last + 1; ++q) {
        const std::uint32_t a = find(static_cast<std::uint32_t>(q)), b = find(id);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
    prev_begin = row_begin;
    prev_end = runs.size();
  }

  std::vector<std::uint8_t> on_border(runs.size(), 0);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const Run& run = runs[i];
    if (run.row == 0 || run.row + 1 == h || run.first == 0 || run.last + 1 == w)
      on_border[find(static_cast<std::uint32_t>(i))] = 1;
  }
  std::size_t marked = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (on_border[find(static_cast<std::uint32_t>(i))]) continue;
    const Run& run = runs[i];
    marked += run.last - run.first + 1;
    if (out)
      std::fill_n(out->data().begin() + static_cast<std::ptrdiff_t>(run.row * w + run.first),
                  run.last - run.first + 1, std::uint8_t{1});
  }
  return marked;
}

}  // namespace detail

std::array<std::size_t, kNumClasses> enclosed_foreign_counts(const LabelMap& labels) {
  std::array<std::size_t, kNumClasses> counts{};
#pragma omp parallel for schedule(dynamic, 1)
  for (int c = 0; c < kNumClasses; ++c)
    counts[static_cast<std::size_t>(c)] = detail::enclosed_foreign(labels, c, nullptr);
  return counts;
}

}  // namespace hotkit
