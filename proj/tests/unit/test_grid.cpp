#include <doctest.h>

#include "helpers.hpp"
#include "hotkit/grid.hpp"
#include "hotkit/parallel.hpp"
#include "hotkit/reference.hpp"
#include "oracles.hpp"

using namespace hotkit;
using testing::field;
using testing::labels;

TEST_SUITE("grid") {
  TEST_CASE("label map rejects ids above 17 and empty shapes") {
    CHECK_KIND(labels({{0, 18}}), ErrorKind::InvariantViolation);
    CHECK_KIND(LabelMap(0, 0, {}), ErrorKind::InvariantViolation);
    CHECK_KIND(LabelMap(2, 2, {0, 1, 2}), ErrorKind::DimensionMismatch);
    CHECK_NOTHROW(labels({{17, 0}}));
  }

  TEST_CASE("probability map range and normalization flag") {
    CHECK_KIND(ProbMap(1, 1, std::vector<double>(18, 1.5)), ErrorKind::InvariantViolation);
    CHECK_FALSE(ProbMap(1, 1, std::vector<double>(18, 0.5)).is_normalized());
    CHECK(ProbMap(1, 1, std::vector<double>(18, 1.0 / 18)).is_normalized());
    const auto soft = ProbMap::one_hot(labels({{3}}), 0.17);
    CHECK(soft.is_normalized());
    CHECK(soft(3, 0, 0) == doctest::Approx(0.83));
    CHECK(soft(0, 0, 0) == doctest::Approx(0.01));
  }

  TEST_CASE("person masks must be binary and nonempty") {
    CHECK_KIND(PersonMaskSet(1, 1, 2, {0, 2}), ErrorKind::InvariantViolation);
    CHECK_KIND(PersonMaskSet(2, 1, 2, {1, 0, 0, 0}), ErrorKind::InvariantViolation);
    CHECK(PersonMaskSet(0, 3, 3, {}).union_mask() == BinaryGrid(3, 3, std::uint8_t{0}));
    const auto set = PersonMaskSet(2, 1, 3, {1, 0, 0, 0, 0, 1});
    CHECK(set.union_mask() == testing::binary({{1, 0, 1}}));
  }

  TEST_CASE("similarity and indicator invariants") {
    std::array<double, 17> s{};
    s[4] = 1.2;
    CHECK_KIND(SimilarityVector{s}, ErrorKind::InvariantViolation);
    std::array<std::uint8_t, 17> f{};
    f[0] = 2;
    CHECK_KIND(ContactIndicator{f}, ErrorKind::InvariantViolation);
  }

  TEST_CASE("binarize_class") {
    CHECK(binarize_class(LabelMap::filled(2, 3, 4), 4) == ScalarField(2, 3, 1.0));
    CHECK(binarize_class(LabelMap::filled(2, 3, 0), 4) == ScalarField(2, 3, 0.0));
    CHECK(binarize_class(labels({{1, 2}, {2, 1}}), 2) == field({{0, 1}, {1, 0}}));
    CHECK_KIND(binarize_class(labels({{1}}), 0), ErrorKind::InvalidClass);
    CHECK_KIND(binarize_class(labels({{1}}), 18), ErrorKind::InvalidClass);
  }

  TEST_CASE("binarized classes partition the grid") {
    auto rng = SplitMix64::stream(7, "partition");
    const auto map = oracle::random_labels(rng, 13, 9, 18);
    ScalarField sum = binarize_nonzero(map);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = 1.0 - sum[i];
    for (int c = 1; c <= 17; ++c) {
      const auto b = binarize_class(map, c);
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += b[i];
    }
    CHECK(sum == ScalarField(13, 9, 1.0));
  }

  TEST_CASE("argmax_labels") {
    const auto map = labels({{0, 5}, {17, 9}});
    CHECK(argmax_labels(ProbMap::one_hot(map)) == map);
    CHECK(argmax_labels(ProbMap(2, 2, std::vector<double>(72, 1.0 / 18))) ==
          LabelMap::filled(2, 2, 0));
    std::vector<double> p(18, 0.2 / 16);
    p[0] = 0.1;
    p[5] = 0.7;
    CHECK(argmax_labels(ProbMap(1, 1, p)) == labels({{5}}));
  }

  TEST_CASE("binarize_nonzero") {
    CHECK(binarize_nonzero(LabelMap::filled(2, 2, 0)) == ScalarField(2, 2, 0.0));
    CHECK(binarize_nonzero(LabelMap::filled(2, 2, 6)) == ScalarField(2, 2, 1.0));
    CHECK(binarize_nonzero(labels({{0, 3}, {17, 0}})) == field({{0, 1}, {1, 0}}));
  }

  TEST_CASE("resolution helpers") {
    const auto map = labels({{1, 2, 3, 4, 5, 6, 7, 8}, {0, 0, 0, 0, 0, 0, 0, 0},
                             {0, 0, 0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0, 0, 0}});
    CHECK(downsample_labels_nearest(map, 4) == labels({{1, 5}}));
    BinaryGrid mask(4, 8, std::uint8_t{0});
    mask(3, 7) = 1;
    CHECK(max_pool_mask(mask, 4) == testing::binary({{0, 1}}));
  }

  TEST_CASE("parallel kernels match the serial reference at any thread count") {
    auto rng = SplitMix64::stream(11, "grid-kernels");
    const auto map = oracle::random_labels(rng, 67, 45, 18);
    std::vector<double> p(18 * map.size());
    for (auto& x : p) x = rng.uniform();
    const ProbMap probs(67, 45, p);
    for (int threads : {1, 2, 4}) {
      set_num_threads(threads);
      for (int c = 1; c <= 17; ++c) CHECK(binarize_class(map, c) == reference::binarize_class(map, c));
      CHECK(argmax_labels(probs) == reference::argmax_labels(probs));
    }
    set_num_threads(0);
  }
}
