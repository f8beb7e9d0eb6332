#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "hotkit/parallel.hpp"
#include "hotkit/reference.hpp"
#include "hotkit/regions.hpp"
#include "hotkit/synth.hpp"
#include "oracles.hpp"

using namespace hotkit;
using testing::binary;
using testing::field;
using testing::labels;

namespace {

// Class 1 walls off a single foreign pixel; the other foreign blocks sit on
// the border. The complement's components in raster order are the top-left
// block (1), the top-right block (2), the centre pixel (3) and the
// bottom-left block (4).
LabelMap enclosure_fixture() {
  return labels({{0, 0, 1, 1, 1, 5, 5},
                 {0, 0, 1, 1, 1, 5, 5},
                 {1, 1, 1, 1, 1, 1, 1},
                 {1, 1, 1, 4, 1, 1, 1},
                 {1, 1, 1, 1, 1, 1, 1},
                 {6, 6, 1, 1, 1, 1, 1},
                 {6, 6, 1, 1, 1, 1, 1}});
}

}  // namespace

TEST_SUITE("regions") {
  TEST_CASE("negate") {
    CHECK(negate(ScalarField(2, 2, 0.0)) == ScalarField(2, 2, 1.0));
    CHECK(negate(field({{1, 0}, {0, 1}})) == field({{0, 1}, {1, 0}}));
    const auto m = field({{1, 0, 1}});
    CHECK(negate(negate(m)) == m);
    CHECK_KIND(negate(field({{0.5}})), ErrorKind::NonBinaryInput);
  }

  TEST_CASE("label_components fixtures") {
    const auto zeros = label_components(ScalarField(3, 4, 0.0));
    CHECK(zeros.count() == 0);
    CHECK(zeros.labels() == Grid<std::uint32_t>(3, 4, 0u));
    const auto ones = label_components(ScalarField(3, 4, 1.0));
    CHECK(ones.count() == 1);
    CHECK(ones.labels() == Grid<std::uint32_t>(3, 4, 1u));

    const auto cm = label_components(
        field({{1, 1, 0, 0}, {1, 0, 0, 1}, {0, 0, 1, 1}, {0, 1, 1, 1}}));
    CHECK(cm.count() == 2);
    const Grid<std::uint32_t> expected(
        4, 4, std::vector<std::uint32_t>{1, 1, 0, 0, 1, 0, 0, 2, 0, 0, 2, 2, 0, 2, 2, 2});
    CHECK(cm.labels() == expected);
    CHECK_KIND(label_components(field({{0.2}})), ErrorKind::NonBinaryInput);
  }

  TEST_CASE("labels are dense and numbered in raster order of first pixel") {
    auto rng = SplitMix64::stream(3, "dense");
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t h = 1 + rng.below(20), w = 1 + rng.below(20);
      const auto fg = oracle::random_binary(rng, h * w, 0.45);
      const auto cm = label_components(BinaryGrid(h, w, fg));
      std::uint32_t next = 1;
      for (std::size_t i = 0; i < h * w; ++i) {
        const auto l = cm[i];
        REQUIRE(l <= next);
        if (l == next) ++next;
      }
      CHECK(next - 1 == cm.count());
    }
  }

  TEST_CASE("label_components agrees with flood fill") {
    auto rng = SplitMix64::stream(5, "ccl-oracle");
    int failures = 0;
    for (int trial = 0; trial < 300; ++trial) {
      const std::size_t h = 1 + rng.below(32), w = 1 + rng.below(32);
      const auto fg = oracle::random_binary(rng, h * w, rng.uniform(0.1, 0.9));
      std::uint32_t k = 0;
      const auto bfs = oracle::bfs_components(fg, h, w, &k);
      const auto cm = label_components(BinaryGrid(h, w, fg));
      if (cm.count() != k || !oracle::same_partition(cm.labels().vec(), bfs, h * w)) ++failures;
    }
    CHECK(failures == 0);
  }

  TEST_CASE("boundary_labels") {
    CHECK(boundary_labels(ComponentMap(Grid<std::uint32_t>(1, 1, 1u), 1)).labels() ==
          std::vector<std::uint32_t>{1});
    const Grid<std::uint32_t> g(3, 3, std::vector<std::uint32_t>{1, 1, 0, 1, 0, 2, 1, 0, 0});
    const auto set = boundary_labels(ComponentMap(g, 2));
    CHECK(set.labels() == std::vector<std::uint32_t>{0, 1, 2});
    CHECK(set.contains(2));
    CHECK_FALSE(set.contains(3));
  }

  TEST_CASE("enclosed region procedure on the worked fixture") {
    const auto map = enclosure_fixture();
    const auto comps = label_components(negate(binarize_class(map, 1)));
    CHECK(comps.count() == 4);
    CHECK(comps(3, 3) == 3);
    CHECK(boundary_labels(comps).labels() == std::vector<std::uint32_t>{0, 1, 2, 4});
    ScalarField expected(7, 7, 0.0);
    expected(3, 3) = 1.0;
    CHECK(enclosed_mask(map, 1) == expected);
    CHECK(enclosed_foreign_mask(map, 1) == expected);
  }

  TEST_CASE("enclosed_mask edge cases") {
    CHECK(enclosed_mask(LabelMap::filled(5, 5, 3), 3) == ScalarField(5, 5, 0.0));
    CHECK(enclosed_mask(labels({{1, 2, 1}, {2, 1, 2}}), 1) == ScalarField(2, 3, 0.0));
    CHECK(enclosed_mask(labels({{1, 2}, {2, 1}, {1, 1}}), 2) == ScalarField(3, 2, 0.0));
    const auto centre = labels({{4, 4, 4}, {4, 9, 4}, {4, 4, 4}});
    CHECK(enclosed_mask(centre, 4) == field({{0, 0, 0}, {0, 1, 0}, {0, 0, 0}}));
    // The foreign region reaches the border through (1,2).
    CHECK(enclosed_mask(labels({{4, 4, 4}, {4, 9, 9}, {4, 4, 4}}), 4) == ScalarField(3, 3, 0.0));
    CHECK_KIND(enclosed_mask(centre, 0), ErrorKind::InvalidClass);
    CHECK_KIND(enclosed_mask(centre, 18), ErrorKind::InvalidClass);
  }

  TEST_CASE("literal mask also marks class pixels that never touch the border") {
    const auto map = labels({{0, 0, 0, 0}, {0, 2, 2, 0}, {0, 2, 2, 0}, {0, 0, 0, 0}});
    CHECK(enclosed_mask(map, 2) == binarize_class(map, 2));
    CHECK(enclosed_foreign_mask(map, 2) == ScalarField(4, 4, 0.0));
  }

  TEST_CASE("enclosed masks agree with a flood-fill oracle") {
    auto rng = SplitMix64::stream(9, "enclosed-oracle");
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t h = 1 + rng.below(24), w = 1 + rng.below(24);
      const auto map = oracle::random_labels(rng, h, w, 3);
      for (int c = 0; c < 3; ++c) {
        const auto foreign = oracle::enclosed_foreign_bfs(map, c);
        BinaryGrid got;
        const std::size_t count = detail::enclosed_foreign(map, c, &got);
        REQUIRE(got.vec() == foreign);
        std::size_t ones = 0;
        for (auto v : foreign) ones += v;
        CHECK(count == ones);
        CHECK(detail::enclosed_foreign(map, c, nullptr) == ones);

        bool c_on_border = false;
        for (std::size_t r = 0; r < h; ++r)
          for (std::size_t x = 0; x < w; ++x)
            if ((r == 0 || x == 0 || r + 1 == h || x + 1 == w) && map(r, x) == c) c_on_border = true;
        std::vector<std::uint8_t> literal = foreign;
        for (std::size_t i = 0; i < h * w; ++i)
          if (map[i] == c && !c_on_border) literal[i] = 1;
        CHECK(detail::enclosed_literal(map, c).vec() == literal);
      }
    }
  }

  TEST_CASE("enclosed counts on synthetic scenes agree with the oracle") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
      const auto cfg = dataset_scene_config(seed, 0, 48, 64, 0.2, 3);
      const auto pred = perturb_labels(gen_scene(cfg), cfg);
      for (int c = 0; c < kNumClasses; ++c) {
        BinaryGrid got;
        detail::enclosed_foreign(pred, c, &got);
        REQUIRE(got.vec() == oracle::enclosed_foreign_bfs(pred, c));
      }
    }
  }

  TEST_CASE("class sweep matches the serial sweep at any thread count") {
    auto rng = SplitMix64::stream(13, "sweep");
    const auto map = oracle::random_labels(rng, 40, 37, 18);
    const auto expected = reference::enclosed_foreign_counts(map);
    for (int threads : {1, 3, 8}) {
      set_num_threads(threads);
      CHECK(enclosed_foreign_counts(map) == expected);
    }
    set_num_threads(0);
  }
}
