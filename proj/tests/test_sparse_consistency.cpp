// Copyright 2026 The tinit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <optional>

#include "doctest.h"
#include "oracles.hpp"
#include "tinit/sparse_consistency.hpp"

using namespace tinit;

namespace {

std::vector<std::uint32_t> as_vec(std::span<const std::uint32_t> s) { return {s.begin(), s.end()}; }

std::optional<ErrorCode> code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("membership of a 2x2 map") {
  const LabelMap map(2, 2, std::vector<std::uint32_t>{0, 0, 1, 1});
  const auto m = SparseMembership::from_label_map(map);
  CHECK(m.n_superpixels() == 2);
  CHECK(m.n_pixels() == 4);
  CHECK(as_vec(m.row(0)) == std::vector<std::uint32_t>{0, 1});
  CHECK(as_vec(m.row(1)) == std::vector<std::uint32_t>{2, 3});
}

TEST_CASE("membership keeps an unused id as an empty row") {
  const LabelMap map(1, 3, std::vector<std::uint32_t>{0, 2, 0});
  const auto m = SparseMembership::from_label_map(map);
  CHECK(m.n_superpixels() == 3);
  CHECK(m.row_size(1) == 0);
  CHECK(m.nnz() == 3);
  const auto wider = SparseMembership::from_label_map(map, 5);
  CHECK(wider.n_superpixels() == 5);
  CHECK(wider.nnz() == 3);
}

TEST_CASE("membership of a random 64x64 map has one entry per pixel") {
  oracle::TestRng rng(31);
  const LabelMap map = oracle::random_label_map(rng, 64, 64, 100);
  const auto m = SparseMembership::from_label_map(map);
  CHECK(m.nnz() == 4096);
  std::vector<int> hits(4096, 0);
  for (std::size_t s = 0; s < m.n_superpixels(); ++s) {
    const auto row = m.row(s);
    for (std::size_t i = 0; i < row.size(); ++i) {
      CHECK(map.ids[row[i]] == s);
      if (i > 0) CHECK(row[i - 1] < row[i]);
      ++hits[row[i]];
    }
  }
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
}

TEST_CASE("membership errors") {
  CHECK(code_of([] { SparseMembership::from_label_map(LabelMap()); }) ==
        ErrorCode::invalid_argument);
  const LabelMap map(1, 2, std::vector<std::uint32_t>{0, 4});
  CHECK(code_of([&] { SparseMembership::from_label_map(map, 3); }) == ErrorCode::invalid_argument);
  // Malformed CSR arrays.
  CHECK(code_of([] { SparseMembership(2, 3, {0, 2}, {0, 1, 2}); }) == ErrorCode::format);
  CHECK(code_of([] { SparseMembership(1, 3, {0, 2}, {0, 1}); }) == ErrorCode::format);
  CHECK(code_of([] { SparseMembership(2, 3, {0, 2, 3}, {1, 0, 2}); }) == ErrorCode::format);
  CHECK(code_of([] { SparseMembership(2, 3, {0, 2, 3}, {0, 1, 1}); }) == ErrorCode::format);
  CHECK(code_of([] { SparseMembership(2, 3, {0, 2, 3}, {0, 1, 7}); }) == ErrorCode::format);
  CHECK(code_of([] { SparseMembership(2, 3, {0, 2, 3}, {0, 2, 1}); }) == std::nullopt);
}

TEST_CASE("encode examples") {
  const auto one = SparseMembership::from_label_map(LabelMap(1, 2, 0));
  const MatrixD logits{{1, 3}};
  const MatrixD enc = encode(one, logits);
  REQUIRE(enc.rows() == 1);
  REQUIRE(enc.cols() == 1);
  CHECK(enc(0, 0) == 2.0);

  const auto singles = SparseMembership::from_label_map(LabelMap(1, 3, std::vector<std::uint32_t>{0, 1, 2}));
  const MatrixD x{{0.5, -1, 7}, {2, 2, 9}};
  const MatrixD e = encode(singles, x);
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t l = 0; l < 2; ++l) CHECK(e(s, l) == x(l, s));
  CHECK(decode(singles, e) == x);
}

TEST_CASE("three pixels with logits 0, 3, 6 all become 3") {
  const auto m = SparseMembership::from_label_map(LabelMap(1, 3, 0));
  const MatrixD out = enforce_consistency(m, MatrixD{{0, 3, 6}});
  CHECK(out == MatrixD{{3, 3, 3}});
}

TEST_CASE("empty superpixel yields a zero row and a warning") {
  const auto m = SparseMembership::from_label_map(LabelMap(1, 2, std::vector<std::uint32_t>{0, 2}));
  Warnings w;
  const MatrixD e = encode(m, MatrixD{{1, 5}}, &w);
  CHECK(e(1, 0) == 0.0);
  REQUIRE(w.size() == 1);
  CHECK(w.front().find("superpixel 1") != std::string::npos);
}

TEST_CASE("dimension errors") {
  const auto m = SparseMembership::from_label_map(LabelMap(2, 2, 0));
  CHECK(code_of([&] { encode(m, MatrixD(2, 3)); }) == ErrorCode::dimension_mismatch);
  CHECK(code_of([&] { decode(m, MatrixD(2, 3)); }) == ErrorCode::dimension_mismatch);
  CHECK(code_of([&] { enforce_consistency_dense(LabelMap(2, 2, 0), MatrixD(1, 3), 1); }) ==
        ErrorCode::dimension_mismatch);
}

TEST_CASE("sparse and dense paths match the explicit-matrix oracle") {
  oracle::TestRng rng(32);
  for (int i = 0; i < 25; ++i) {
    const auto h = static_cast<std::uint32_t>(8 + rng.below(40));
    const auto w = static_cast<std::uint32_t>(8 + rng.below(40));
    const std::size_t ns = 1 + rng.below(std::min<std::size_t>(256, std::size_t{h} * w));
    const std::size_t nl = 1 + rng.below(20);
    const LabelMap map = oracle::random_label_map(rng, h, w, ns);
    const MatrixD x = rng.uniform_matrix(nl, map.pixel_count(), -5, 5);
    const MatrixD expect = oracle::dense_consistency(map, x, ns);
    const auto m = SparseMembership::from_label_map(map);
    CHECK(oracle::max_abs(enforce_consistency(m, x), expect) <= 1e-12);
    CHECK(oracle::max_abs(enforce_consistency_dense(map, x, ns), expect) <= 1e-12);
  }
}

TEST_CASE("150-label 64x64 instance with 100 superpixels") {
  oracle::TestRng rng(33);
  const LabelMap map = oracle::random_label_map(rng, 64, 64, 100);
  const MatrixD x = rng.normal_matrix(150, 4096, 3.0);
  const auto m = SparseMembership::from_label_map(map);
  const MatrixD expect = oracle::dense_consistency(map, x, 100);
  CHECK(oracle::max_abs(enforce_consistency(m, x), expect) <= 1e-6);
  const auto xf = x.cast<float>();
  CHECK(max_abs_diff(enforce_consistency(m, xf), expect.cast<float>()) <= 1e-5);
}

TEST_CASE("idempotence, zero spread and mean preservation") {
  oracle::TestRng rng(34);
  for (int i = 0; i < 20; ++i) {
    const LabelMap map = oracle::random_label_map(rng, 24, 24, 1 + rng.below(60));
    const std::size_t ns = map.id_bound();
    const MatrixD x = rng.uniform_matrix(1 + rng.below(10), map.pixel_count(), -100, 100);
    const auto m = SparseMembership::from_label_map(map);
    const MatrixD once = enforce_consistency(m, x);
    CHECK(enforce_consistency(m, once) == once);
    for (std::size_t l = 0; l < x.rows(); ++l) {
      std::vector<double> before(ns, 0.0), after(ns, 0.0), count(ns, 0.0);
      std::vector<double> first(ns, std::nan(""));
      for (std::size_t p = 0; p < map.pixel_count(); ++p) {
        const auto s = map.ids[p];
        before[s] += x(l, p);
        after[s] += once(l, p);
        count[s] += 1;
        if (std::isnan(first[s])) first[s] = once(l, p);
        CHECK(once(l, p) == first[s]);
      }
      for (std::size_t s = 0; s < ns; ++s)
        CHECK(std::abs(before[s] / count[s] - after[s] / count[s]) <= 1e-9);
    }
  }
}

TEST_CASE("argmax ties and constant labels per superpixel") {
  const LogitTensor<double> single(1, 3, MatrixD{{4, -1, 0}});
  CHECK(argmax_labels(single).ids == std::vector<std::uint32_t>{0, 0, 0});
  const LogitTensor<double> tie(1, 1, MatrixD{{1}, {1}});
  CHECK(argmax_labels(tie).ids == std::vector<std::uint32_t>{0});
  const LogitTensor<double> later(1, 2, MatrixD{{0, 2}, {1, 2}, {1, 3}});
  CHECK(argmax_labels(later).ids == std::vector<std::uint32_t>{1, 2});
  CHECK(code_of([] { argmax_labels(LogitTensor<double>(1, 1, MatrixD(0, 1))); }) ==
        ErrorCode::invalid_argument);

  oracle::TestRng rng(35);
  const LabelMap map = oracle::random_label_map(rng, 32, 32, 40);
  const MatrixD x = rng.uniform_matrix(12, 1024, -1, 1);
  const LogitTensor<double> y(32, 32, enforce_consistency(SparseMembership::from_label_map(map), x));
  const LabelMap labels = argmax_labels(y);
  std::vector<std::int64_t> seen(40, -1);
  for (std::size_t p = 0; p < 1024; ++p) {
    auto& s = seen[map.ids[p]];
    if (s < 0) s = labels.ids[p];
    CHECK(labels.ids[p] == static_cast<std::uint32_t>(s));
  }
}
