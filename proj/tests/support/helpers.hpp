#pragma once

#include <doctest.h>

#include <initializer_list>
#include <vector>

#include "hotkit/error.hpp"
#include "hotkit/grid.hpp"

namespace testing {

inline hotkit::LabelMap labels(std::initializer_list<std::initializer_list<int>> rows) {
  std::vector<hotkit::ClassId> v;
  std::size_t w = 0;
  for (const auto& r : rows) {
    w = r.size();
    for (int x : r) v.push_back(static_cast<hotkit::ClassId>(x));
  }
  return hotkit::LabelMap(rows.size(), w, std::move(v));
}

inline hotkit::ScalarField field(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<double> v;
  std::size_t w = 0;
  for (const auto& r : rows) {
    w = r.size();
    v.insert(v.end(), r.begin(), r.end());
  }
  return hotkit::ScalarField(rows.size(), w, std::move(v));
}

inline hotkit::BinaryGrid binary(std::initializer_list<std::initializer_list<int>> rows) {
  std::vector<std::uint8_t> v;
  std::size_t w = 0;
  for (const auto& r : rows) {
    w = r.size();
    for (int x : r) v.push_back(static_cast<std::uint8_t>(x));
  }
  return hotkit::BinaryGrid(rows.size(), w, std::move(v));
}

template <typename F>
hotkit::ErrorKind error_kind(F&& f) {
  try {
    f();
  } catch (const hotkit::Error& e) {
    return e.kind();
  }
  FAIL("expected a hotkit::Error");
  return hotkit::ErrorKind::IoError;
}

}  // namespace testing

#define CHECK_KIND(expr, kind) CHECK(testing::error_kind([&] { (void)(expr); }) == (kind))
