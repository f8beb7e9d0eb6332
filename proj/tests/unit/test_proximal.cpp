#include <doctest.h>

#include "helpers.hpp"
#include "hotkit/parallel.hpp"
#include "hotkit/proximal.hpp"
#include "hotkit/reference.hpp"
#include "hotkit/synth.hpp"
#include "oracles.hpp"

using namespace hotkit;
using testing::field;

namespace {

DepthMap worked_depth() { return DepthMap::normalized(field({{0.0, 0.5}, {0.5, 1.0}})); }

PersonMaskSet single_pixel_person() { return PersonMaskSet(1, 2, 2, {1, 0, 0, 0}); }

void check_near(const ScalarField& a, const ScalarField& b, double tol = 1e-12) {
  REQUIRE(a.same_shape(b));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(tol));
}

}  // namespace

TEST_SUITE("proximal") {
  TEST_CASE("normalize_depth") {
    const auto n = normalize_depth(DepthMap::raw(field({{2, 4}, {6, 10}})));
    CHECK(n.is_normalized());
    CHECK_FALSE(n.is_degenerate());
    check_near(n.field(), field({{0, 0.25}, {0.5, 1.0}}));
    const auto unit = field({{0, 0.3}, {1, 0.7}});
    CHECK(normalize_depth(DepthMap::raw(unit)).field() == unit);
    const auto flat = normalize_depth(DepthMap::raw(ScalarField(3, 3, 4.2)));
    CHECK(flat.is_degenerate());
    CHECK(flat.field() == ScalarField(3, 3, 0.0));
  }

  TEST_CASE("normalized output spans [0, 1]") {
    auto rng = SplitMix64::stream(1, "norm");
    for (int t = 0; t < 20; ++t) {
      ScalarField f(9, 7);
      for (auto& v : f.data()) v = rng.uniform(-50, 50);
      const auto n = normalize_depth(DepthMap::raw(f));
      const auto [lo, hi] = std::minmax_element(n.data().begin(), n.data().end());
      CHECK(*lo == 0.0);
      CHECK(*hi == 1.0);
    }
  }

  TEST_CASE("person_mean_depth") {
    const auto depth = DepthMap::normalized(field({{0.2, 0.4}, {0.9, 0.1}}));
    const auto s = person_mean_depth(depth, PersonMaskSet(2, 2, 2, {1, 1, 0, 0, 0, 0, 1, 0}));
    CHECK(s.mean(0) == doctest::Approx(0.3));
    CHECK(s.mean(1) == 0.9);
    const auto flat = DepthMap::normalized(ScalarField(2, 2, 0.6));
    CHECK(person_mean_depth(flat, PersonMaskSet(1, 2, 2, {1, 1, 1, 0})).mean(0) ==
          doctest::Approx(0.6));
    CHECK_KIND(person_mean_depth(DepthMap::raw(field({{3.0}})), PersonMaskSet(1, 1, 1, {1})),
               ErrorKind::NotNormalized);
    CHECK_KIND(person_mean_depth(flat, PersonMaskSet(1, 1, 1, {1})), ErrorKind::DimensionMismatch);
  }

  TEST_CASE("mean depth ignores the order of the other persons") {
    const auto depth = DepthMap::normalized(field({{0.1, 0.2, 0.3}, {0.4, 0.5, 0.6}}));
    const BinaryGrid a = testing::binary({{1, 1, 0}, {0, 0, 0}});
    const BinaryGrid b = testing::binary({{0, 0, 1}, {0, 1, 1}});
    const BinaryGrid c = testing::binary({{0, 0, 0}, {1, 0, 0}});
    const auto s1 = person_mean_depth(depth, PersonMaskSet::from_masks({a, b, c}));
    const auto s2 = person_mean_depth(depth, PersonMaskSet::from_masks({c, a, b}));
    CHECK(s1.mean(0) == s2.mean(1));
    CHECK(s1.mean(1) == s2.mean(2));
    CHECK(s1.mean(2) == s2.mean(0));
  }

  TEST_CASE("depth bands and tau validation") {
    const auto bands = depth_bands(PersonDepthSummary({0.4}), 0.1);
    CHECK(bands.bounds[0].first == doctest::Approx(0.3));
    CHECK(bands.bounds[0].second == doctest::Approx(0.5));
    CHECK_KIND(depth_bands(PersonDepthSummary({0.4}), 0.0), ErrorKind::ConfigInvalid);
    CHECK_KIND(hard_filter_mask(worked_depth(), PersonDepthSummary({0.0}), -1), ErrorKind::ConfigInvalid);
    CHECK_KIND(PersonDepthSummary({1.5}), ErrorKind::InvariantViolation);
  }

  TEST_CASE("filter masks on the worked example") {
    const auto depth = worked_depth();
    const auto summary = person_mean_depth(depth, single_pixel_person());
    CHECK(summary.mean(0) == 0.0);
    CHECK(hard_filter_mask(depth, summary, 0.3) == field({{1, 0}, {0, 0}}));
    check_near(soft_filter_mask(depth, summary, 0.3), field({{0.09, 0}, {0, 0}}));
    check_near(soft_mask_tau_grad(depth, summary, 0.3), field({{0.6, 0}, {0, 0}}));
    CHECK(hard_filter_mask(depth, summary, 1.5) == ScalarField(2, 2, 1.0));
    CHECK(hard_filter_mask(depth, summary, 1.0) == field({{1, 1}, {1, 0}}));
  }

  TEST_CASE("zero persons give empty masks") {
    const PersonDepthSummary none({});
    CHECK(hard_filter_mask(worked_depth(), none, 0.2) == ScalarField(2, 2, 0.0));
    CHECK(soft_filter_mask(worked_depth(), none, 0.2) == ScalarField(2, 2, 0.0));
    CHECK(soft_mask_tau_grad(worked_depth(), none, 0.2) == ScalarField(2, 2, 0.0));
  }

  TEST_CASE("soft mask peaks at tau squared and sums over persons") {
    const auto depth = DepthMap::normalized(field({{0.5}}));
    CHECK(soft_filter_mask(depth, PersonDepthSummary({0.5}), 0.1)[0] == doctest::Approx(0.01));
    const PersonDepthSummary two({0.45, 0.52});
    CHECK(soft_mask_tau_grad(depth, two, 0.1)[0] == doctest::Approx(0.4));
    CHECK(hard_filter_mask(depth, two, 0.1)[0] == 1.0);
  }

  TEST_CASE("band edges belong to neither mask") {
    const auto depth = DepthMap::normalized(field({{0.25, 0.75}}));
    const PersonDepthSummary s({0.5});
    CHECK(hard_filter_mask(depth, s, 0.25) == ScalarField(1, 2, 0.0));
    CHECK(soft_filter_mask(depth, s, 0.25) == ScalarField(1, 2, 0.0));
  }

  TEST_CASE("downsample_add") {
    FeatureMap feature(3, 2, 2);
    for (std::size_t i = 0; i < feature.data().size(); ++i) feature.data()[i] = 0.1 * static_cast<double>(i);
    CHECK(downsample_add(ScalarField(8, 8, 0.0), feature) == feature);
    const auto plus_one = downsample_add(ScalarField(8, 8, 1.0), feature);
    for (std::size_t i = 0; i < feature.data().size(); ++i)
      CHECK(plus_one.data()[i] == doctest::Approx(feature.data()[i] + 1.0));
    ScalarField block(8, 8, 0.0);
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 4; ++c) block(r, c) = 0.16;
    const auto pooled = downsample_mean4(block);
    check_near(pooled, field({{0.16, 0}, {0, 0}}));
    const auto out = downsample_add(block, FeatureMap(2, 2, 2, 0.0));
    CHECK(out(1, 0, 0) == doctest::Approx(0.16));
    CHECK(out(1, 1, 1) == 0.0);
    CHECK_KIND(downsample_add(ScalarField(8, 8, 0.0), FeatureMap(1, 3, 2)), ErrorKind::DimensionMismatch);
    CHECK_KIND(downsample_mean4(ScalarField(6, 8, 0.0)), ErrorKind::DimensionMismatch);
  }

  TEST_CASE("downsample_add is linear in the mask") {
    auto rng = SplitMix64::stream(2, "linear");
    ScalarField a(8, 12), b(8, 12);
    for (auto& v : a.data()) v = rng.uniform();
    for (auto& v : b.data()) v = rng.uniform();
    FeatureMap x(2, 2, 3);
    for (auto& v : x.data()) v = rng.uniform();
    ScalarField mix(8, 12);
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 2.0 * a[i] - 0.5 * b[i];
    const auto lhs = downsample_add(mix, x);
    const auto da = downsample_mean4(a), db = downsample_mean4(b);
    for (std::size_t k = 0; k < 2; ++k)
      for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 3; ++c)
          CHECK(lhs(k, r, c) == doctest::Approx(2.0 * da(r, c) - 0.5 * db(r, c) + x(k, r, c)));
  }

  TEST_CASE("parallel masks match the serial reference") {
    SceneConfig cfg;
    cfg.height = 96;
    cfg.width = 128;
    cfg.persons = 3;
    cfg.seed = 77;
    const auto scene = gen_scene(cfg);
    const auto depth = normalize_depth(scene.depth);
    const auto summary = person_mean_depth(depth, scene.persons);
    const auto means = reference::person_mean_depth(depth, scene.persons);
    FeatureMap feature(18, 24, 32, 0.5);
    for (int threads : {1, 2, 5}) {
      set_num_threads(threads);
      const auto again = person_mean_depth(depth, scene.persons);
      CHECK(again.means() == summary.means());
      for (std::size_t i = 0; i < means.size(); ++i)
        CHECK(summary.mean(i) == doctest::Approx(means[i]).epsilon(1e-14));
      CHECK(hard_filter_mask(depth, summary, 0.1) == reference::hard_filter_mask(depth, summary.means(), 0.1));
      CHECK(soft_filter_mask(depth, summary, 0.1) == reference::soft_filter_mask(depth, summary.means(), 0.1));
      CHECK(soft_mask_tau_grad(depth, summary, 0.1) ==
            reference::soft_mask_tau_grad(depth, summary.means(), 0.1));
      const auto fm = soft_filter_mask(depth, summary, 0.1);
      const auto fast = downsample_add(fm, feature);
      const auto slow = reference::downsample_add(fm, feature);
      for (std::size_t i = 0; i < fast.data().size(); ++i)
        CHECK(fast.data()[i] == doctest::Approx(slow.data()[i]).epsilon(1e-14));
    }
    set_num_threads(0);
  }
}
