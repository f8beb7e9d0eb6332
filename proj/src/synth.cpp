#include "hotkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "hotkit/loss.hpp"
#include "hotkit/rng.hpp"

namespace hotkit {

namespace {

struct Ellipse {
  double cy, cx, b, a;  // centre row/col, vertical and horizontal semi-axes
  bool contains(std::size_t r, std::size_t c) const {
    const double dy = (static_cast<double>(r) - cy) / b;
    const double dx = (static_cast<double>(c) - cx) / a;
    return dy * dy + dx * dx <= 1.0;
  }
};

template <typename T>
void shuffle(std::vector<T>& v, SplitMix64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace

void SceneConfig::validate() const {
  if (height < 16 || width < 16 || height % 4 != 0 || width % 4 != 0)
    fail(ErrorKind::ConfigInvalid,
         fmt::format("scene size {}x{} must be at least 16x16 and divisible by 4", height, width));
  if (persons < 1 || persons > 4)
    fail(ErrorKind::ConfigInvalid, fmt::format("persons must be 1..4, got {}", persons));
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0))
    fail(ErrorKind::ConfigInvalid, fmt::format("noise rate {} outside [0, 1]", noise_rate));
  std::vector<int> seen;
  for (int c : contact_classes) {
    if (c < 1 || c > kNumContactClasses)
      fail(ErrorKind::ConfigInvalid, fmt::format("contact class {} outside 1..17", c));
    if (std::find(seen.begin(), seen.end(), c) != seen.end())
      fail(ErrorKind::ConfigInvalid, fmt::format("contact class {} listed twice", c));
    seen.push_back(c);
  }
}

Scene gen_scene(const SceneConfig& config) {
  config.validate();
  const std::size_t h = config.height;
  const std::size_t w = config.width;
  const std::size_t n = config.persons;
  auto layout = SplitMix64::stream(config.seed, "layout");
  auto depth_rng = SplitMix64::stream(config.seed, "depth");
  auto contact_rng = SplitMix64::stream(config.seed, "contact");

  // Persons sit in disjoint vertical slots; the top rows stay background.
  const std::size_t slot = w / n;
  std::vector<Ellipse> bodies;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::max(1.0, static_cast<double>(slot) * layout.uniform(0.3, 0.45));
    const double b = static_cast<double>(h) * layout.uniform(0.2, 0.3);
    const double cx = static_cast<double>(i * slot + slot / 2);
    const double cy = std::floor(0.6 * static_cast<double>(h));
    bodies.push_back({cy, cx, b, a});
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, depth_rng);
  std::vector<double> plateau(n);
  for (std::size_t i = 0; i < n; ++i)
    plateau[i] = 2.0 + 1.5 * static_cast<double>(order[i]) + depth_rng.uniform(0.0, 0.5);

  ScalarField depth(h, w, 0.0);
  std::vector<std::uint8_t> masks(n * h * w, 0);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      double d = 10.0 + 2.0 * static_cast<double>(r) / static_cast<double>(h) +
                 0.5 * static_cast<double>(c) / static_cast<double>(w);
      for (std::size_t i = 0; i < n; ++i) {
        if (bodies[i].contains(r, c)) {
          masks[(i * h + r) * w + c] = 1;
          d = plateau[i] + 0.05 * (static_cast<double>(r) - bodies[i].cy) / bodies[i].b;
        }
      }
      depth(r, c) = d;
    }
  }

  // Contact rectangles tile a grid of cells inside each body's inscribed
  // rectangle, so they never overlap and never leave the body.
  std::vector<ClassId> gt(h * w, 0);
  std::vector<int> classes = config.contact_classes;
  shuffle(classes, contact_rng);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<int> mine;
    for (std::size_t j = i; j < classes.size(); j += n) mine.push_back(classes[j]);
    if (mine.empty()) continue;
    const auto& e = bodies[i];
    const auto hh = static_cast<std::size_t>(std::floor(e.b / std::sqrt(2.0)));
    const auto hw = static_cast<std::size_t>(std::floor(e.a / std::sqrt(2.0)));
    const std::size_t top = static_cast<std::size_t>(e.cy) - hh;
    const std::size_t left = static_cast<std::size_t>(e.cx) - hw;
    const std::size_t rows_px = 2 * hh + 1;
    const std::size_t cols_px = 2 * hw + 1;
    const std::size_t cols = std::min(cols_px, mine.size());
    const std::size_t rows = (mine.size() + cols - 1) / cols;
    if (rows > rows_px)
      fail(ErrorKind::ConfigInvalid,
           fmt::format("person {} is too small for {} contact classes", i, mine.size()));
    for (std::size_t j = 0; j < mine.size(); ++j) {
      const std::size_t row = j / cols;
      const std::size_t col = j % cols;
      const std::size_t r0 = top + row * rows_px / rows;
      const std::size_t r1 = top + (row + 1) * rows_px / rows;
      const std::size_t c0 = left + col * cols_px / cols;
      const std::size_t c1 = left + (col + 1) * cols_px / cols;
      const std::size_t ch = r1 - r0;
      const std::size_t cw = c1 - c0;
      const std::size_t sh = (ch + 1) / 2 + contact_rng.below(ch / 2 + 1);
      const std::size_t sw = (cw + 1) / 2 + contact_rng.below(cw / 2 + 1);
      const std::size_t oy = r0 + contact_rng.below(ch - sh + 1);
      const std::size_t ox = c0 + contact_rng.below(cw - sw + 1);
      for (std::size_t r = oy; r < oy + sh; ++r)
        for (std::size_t c = ox; c < ox + sw; ++c) gt[r * w + c] = static_cast<ClassId>(mine[j]);
    }
  }

  LabelMap labels(h, w, std::move(gt));
  ContactIndicator indicator = contact_indicator_from_gt(labels);
  return Scene{std::move(labels), DepthMap::raw(std::move(depth)),
               PersonMaskSet(n, h, w, std::move(masks)), indicator};
}

LabelMap perturb_labels(const Scene& scene, const SceneConfig& config) {
  const std::size_t h = scene.gt.height();
  const std::size_t w = scene.gt.width();
  std::vector<ClassId> labels(scene.gt.data().begin(), scene.gt.data().end());

  auto noise = SplitMix64::stream(config.seed, "noise");
  std::vector<std::size_t> contact;
  for (std::size_t p = 0; p < labels.size(); ++p)
    if (labels[p] > 0) contact.push_back(p);
  const auto flips = static_cast<std::size_t>(
      std::llround(config.noise_rate * static_cast<double>(contact.size())));
  for (std::size_t i = 0; i < flips; ++i) {
    std::swap(contact[i], contact[i + noise.below(contact.size() - i)]);
    const std::size_t p = contact[i];
    auto other = static_cast<ClassId>(noise.below(kNumClasses - 1));
    if (other >= labels[p]) ++other;
    labels[p] = other;
  }

  // A foreign centre inside a uniform 3x3 window is its own component of
  // (labels != host), ringed by host pixels, and the centre is off the border.
  auto blobs = SplitMix64::stream(config.seed, "blobs");
  BinaryGrid used(h, w, std::uint8_t{0});
  auto window_free = [&](std::size_t centre) {
    const std::size_t r = centre / w, c = centre % w;
    for (std::size_t dr = 0; dr < 3; ++dr)
      for (std::size_t dc = 0; dc < 3; ++dc)
        if (used(r - 1 + dr, c - 1 + dc)) return false;
    return true;
  };
  // Windows that stay clear of planted blobs keep their uniform labels, so
  // the candidate lists only ever shrink.
  std::array<std::vector<std::size_t>, kNumClasses> candidates;
  if (config.enclosed_blobs > 0) {
    for (std::size_t r = 1; r + 1 < h; ++r) {
      for (std::size_t c = 1; c + 1 < w; ++c) {
        const ClassId host = labels[r * w + c];
        bool ok = true;
        for (std::size_t dr = 0; dr < 3 && ok; ++dr)
          for (std::size_t dc = 0; dc < 3 && ok; ++dc)
            ok = labels[(r - 1 + dr) * w + (c - 1 + dc)] == host;
        if (ok) candidates[host].push_back(r * w + c);
      }
    }
  }
  for (std::size_t k = 0; k < config.enclosed_blobs; ++k) {
    std::vector<int> hosts;
    for (int c = 0; c < kNumClasses; ++c) {
      auto& list = candidates[c];
      list.erase(std::remove_if(list.begin(), list.end(),
                                [&](std::size_t q) { return !window_free(q); }),
                 list.end());
      if (!list.empty()) hosts.push_back(c);
    }
    if (hosts.empty()) break;
    const int host = hosts[blobs.below(hosts.size())];
    const std::size_t centre = candidates[host][blobs.below(candidates[host].size())];
    auto foreign = static_cast<ClassId>(1 + blobs.below(kNumContactClasses));
    if (foreign == host) foreign = foreign == kNumContactClasses ? 1 : foreign + 1;
    labels[centre] = foreign;
    const std::size_t r = centre / w, c = centre % w;
    for (std::size_t dr = 0; dr < 3; ++dr)
      for (std::size_t dc = 0; dc < 3; ++dc) used(r - 1 + dr, c - 1 + dc) = 1;
  }
  return LabelMap(h, w, std::move(labels));
}

ProbMap perturb_prediction(const Scene& scene, const SceneConfig& config, double softening) {
  return ProbMap::one_hot(perturb_labels(scene, config), softening);
}

SimilarityVector matched_similarity(const ContactIndicator& indicator, double noise_rate) {
  std::array<double, kNumContactClasses> s{};
  const double magnitude = 1.0 - std::clamp(noise_rate, 0.0, 1.0);
  for (int k = 1; k <= kNumContactClasses; ++k)
    s[k - 1] = indicator.has_class(k) ? magnitude : -magnitude;
  return SimilarityVector(s);
}

LabelMap all_contact_prediction(const LabelMap& gt) {
  return LabelMap::filled(gt.height(), gt.width(), 1);
}

SceneConfig dataset_scene_config(std::uint64_t seed, std::size_t index, std::size_t height,
                                 std::size_t width, double noise_rate, std::size_t blobs) {
  auto rng = SplitMix64::stream(seed, "dataset", index);
  SceneConfig config;
  config.height = height;
  config.width = width;
  config.persons = 1 + rng.below(3);
  std::vector<int> pool(kNumContactClasses);
  std::iota(pool.begin(), pool.end(), 1);
  shuffle(pool, rng);
  const std::size_t k = 1 + rng.below(4);
  config.contact_classes.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  config.noise_rate = noise_rate;
  config.enclosed_blobs = blobs;
  config.seed = rng.next();
  return config;
}

}  // namespace hotkit
