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

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "tinit/superpixel_loss.hpp"

using namespace tinit;

namespace {

// Rows are softmax of normals, so every row is a distribution.
MatrixD distributions(oracle::TestRng& rng, std::size_t n, std::size_t k) {
  MatrixD f = rng.normal_matrix(n, k);
  for (std::size_t p = 0; p < n; ++p) {
    double z = 0.0;
    for (double& v : f.row(p)) z += (v = std::exp(v));
    for (double& v : f.row(p)) v /= z;
  }
  return f;
}

struct Instance {
  PixelField pf;
  AssignmentMap a;
};

Instance random_instance(oracle::TestRng& rng, std::size_t h, std::size_t w, std::size_t d,
                         std::size_t k, bool cross_entropy) {
  const SuperpixelGrid grid(h, w, d);
  MatrixD f = cross_entropy ? distributions(rng, h * w, k) : rng.uniform_matrix(h * w, k, -1, 1);
  return {make_pixel_field(std::move(f), h, w), grid.softmax_assignment(rng.normal_matrix(h * w, 9))};
}

// Central differences of the dense oracle loss at every stored q entry.
std::vector<double> oracle_gradient(const Instance& in, const LossConfig& cfg, double step) {
  const bool ce = cfg.distance == DistanceKind::cross_entropy;
  MatrixD q = oracle::dense_q(in.a);
  std::vector<double> g;
  for (std::size_t p = 0; p < in.a.n_pixels(); ++p) {
    for (std::uint32_t s : in.a.neighbours(p)) {
      const double orig = q(p, s);
      q(p, s) = orig + step;
      const double up = oracle::loss(in.pf.features, in.pf.coords, q, cfg.m_weight,
                                     cfg.sampling_interval, ce);
      q(p, s) = orig - step;
      const double down = oracle::loss(in.pf.features, in.pf.coords, q, cfg.m_weight,
                                       cfg.sampling_interval, ce);
      q(p, s) = orig;
      g.push_back((up - down) / (2 * step));
    }
  }
  return g;
}

double relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / std::max(1.0, std::abs(numeric[i])));
  }
  return worst;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::check_failed;
}

}  // namespace

TEST_CASE("pixel field coordinates are (column, row)") {
  const PixelField pf = make_pixel_field(MatrixD(6, 1), 2, 3);
  CHECK(pf.coords(4, 0) == 1.0);
  CHECK(pf.coords(4, 1) == 1.0);
  CHECK(pf.coords(2, 0) == 2.0);
  CHECK(pf.coords(2, 1) == 0.0);
  CHECK(code_of([] { make_pixel_field(MatrixD(5, 1), 2, 3); }) == ErrorCode::dimension_mismatch);
  CHECK(code_of([] { make_pixel_field(MatrixD(6, 0), 2, 3); }) == ErrorCode::invalid_argument);
}

TEST_CASE("grid neighbourhoods") {
  const SuperpixelGrid g(5, 7, 2);
  CHECK(g.cell_rows == 3);
  CHECK(g.cell_cols == 4);
  CHECK(g.n_superpixels() == 12);
  CHECK(g.cell_of(0) == 0);
  CHECK(g.cell_of(3 * 7 + 6) == 7);
  CHECK(g.neighbours(0) == std::vector<std::uint32_t>{0, 1, 4, 5});
  CHECK(g.neighbours(2 * 7 + 3).size() == 9);
  CHECK(code_of([] { SuperpixelGrid(0, 4, 2); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { SuperpixelGrid(4, 4, 0); }) == ErrorCode::invalid_argument);
}

TEST_CASE("softmax assignment is a distribution over the neighbours") {
  oracle::TestRng rng(41);
  const SuperpixelGrid g(6, 6, 3);
  const MatrixD scores = rng.normal_matrix(36, 9);
  const AssignmentMap a = g.softmax_assignment(scores);
  for (std::size_t p = 0; p < 36; ++p) {
    const auto pr = a.probs(p);
    double sum = 0.0;
    for (double v : pr) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(pr.size() == g.neighbours(p).size());
  }
  CHECK(code_of([&] { g.softmax_assignment(MatrixD(36, 8)); }) == ErrorCode::dimension_mismatch);
}

TEST_CASE("assignment validation") {
  CHECK(code_of([] { AssignmentMap(2, {0, 2}, {0, 1}, {0.5, 0.6}); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { AssignmentMap(2, {0, 2}, {0, 0}, {0.5, 0.5}); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { AssignmentMap(2, {0, 1}, {2}, {1.0}); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { AssignmentMap(2, {0, 2}, {0, 1}, {1.5, -0.5}); }) == ErrorCode::invalid_argument);
  CHECK(code_of([] { AssignmentMap(2, {1, 2}, {0, 1}, {0.5, 0.5}); }) == ErrorCode::format);
}

TEST_CASE("aggregate examples") {
  // Two pixels, each half in superpixel 0 and half in 1.
  const AssignmentMap a(2, {0, 2, 4}, {0, 1, 0, 1}, {0.5, 0.5, 0.5, 0.5});
  const PixelField pf = make_pixel_field(MatrixD{{0}, {2}}, 1, 2);
  const Centroids c = aggregate(pf, a);
  CHECK(c.properties(0, 0) == 1.0);
  CHECK(c.properties(1, 0) == 1.0);

  const SuperpixelGrid g(4, 4, 2);
  MatrixD f(16, 2);
  for (std::size_t p = 0; p < 16; ++p) {
    f(p, 0) = 10.0 * g.cell_of(p);
    f(p, 1) = -1.0;
  }
  const Centroids hard = aggregate(make_pixel_field(f, 4, 4), g.hard_assignment());
  for (std::size_t s = 0; s < 4; ++s) {
    CHECK(hard.properties(s, 0) == 10.0 * s);
    CHECK(hard.properties(s, 1) == -1.0);
  }
}

TEST_CASE("reconstruct examples") {
  const AssignmentMap a(2, {0, 2}, {0, 1}, {0.5, 0.5});
  Centroids c{MatrixD{{0}, {4}}, MatrixD{{0, 0}, {0, 0}}};
  CHECK(reconstruct(c, a).properties(0, 0) == 2.0);

  const SuperpixelGrid g(4, 4, 2);
  Centroids u{MatrixD{{1}, {2}, {3}, {4}}, MatrixD(4, 2)};
  const Reconstruction r = reconstruct(u, g.hard_assignment());
  for (std::size_t p = 0; p < 16; ++p) CHECK(r.properties(p, 0) == 1.0 + g.cell_of(p));
  Centroids bad{MatrixD(3, 1), MatrixD(4, 2)};
  CHECK(code_of([&] { reconstruct(bad, g.hard_assignment()); }) == ErrorCode::dimension_mismatch);
}

TEST_CASE("aggregate and reconstruct match the double-loop oracle") {
  oracle::TestRng rng(42);
  for (int i = 0; i < 10; ++i) {
    const Instance in = random_instance(rng, 9, 11, 3, 4, false);
    const MatrixD q = oracle::dense_q(in.a);
    const Centroids c = aggregate(in.pf, in.a);
    const MatrixD u = oracle::centroids(in.pf.features, q);
    const MatrixD l = oracle::centroids(in.pf.coords, q);
    CHECK(oracle::max_abs(c.properties, u) <= 1e-12);
    CHECK(oracle::max_abs(c.coords, l) <= 1e-12);
    const Reconstruction r = reconstruct(c, in.a);
    CHECK(oracle::max_abs(r.properties, oracle::matmul(q, u)) <= 1e-12);
    CHECK(oracle::max_abs(r.coords, oracle::matmul(q, l)) <= 1e-12);
  }
}

TEST_CASE("zero-weight superpixel is rejected") {
  const AssignmentMap a(2, {0, 1}, {0}, {1.0});
  const PixelField pf = make_pixel_field(MatrixD{{1}}, 1, 1);
  CHECK(code_of([&] { aggregate(pf, a); }) == ErrorCode::invalid_argument);
}

TEST_CASE("constant properties with hard assignment leave only the centroid distance") {
  const std::size_t h = 8, w = 6, d = 3;
  const SuperpixelGrid g(h, w, d);
  MatrixD f(h * w, 3);
  for (std::size_t p = 0; p < h * w; ++p)
    for (std::size_t k = 0; k < 3; ++k) f(p, k) = std::sin(1.0 + g.cell_of(p) + 7.0 * k);
  const PixelField pf = make_pixel_field(f, h, w);
  LossConfig cfg;
  cfg.m_weight = 2.5;
  cfg.sampling_interval = double(d);
  const LossTerms t = loss(pf, g.hard_assignment(), cfg);
  CHECK(t.property_term <= 1e-20);

  // Cell centroids from pixel coordinates, then summed Euclidean distances.
  std::vector<double> cx(g.n_superpixels()), cy(g.n_superpixels()), n(g.n_superpixels());
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) {
      const auto s = g.cell_of(r * w + c);
      cx[s] += double(c);
      cy[s] += double(r);
      n[s] += 1;
    }
  double expect = 0.0;
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) {
      const auto s = g.cell_of(r * w + c);
      expect += std::hypot(double(c) - cx[s] / n[s], double(r) - cy[s] / n[s]);
    }
  expect *= cfg.m_weight / cfg.sampling_interval;
  CHECK(std::abs(t.coordinate_term - expect) <= 1e-10);
  CHECK(std::abs(t.total() - expect) <= 1e-10);
}

TEST_CASE("zero weight with perfect reconstruction gives zero loss") {
  const SuperpixelGrid g(4, 4, 2);
  MatrixD f(16, 1);
  for (std::size_t p = 0; p < 16; ++p) f(p, 0) = double(g.cell_of(p));
  LossConfig cfg;
  cfg.m_weight = 0.0;
  CHECK(loss(make_pixel_field(f, 4, 4), g.hard_assignment(), cfg).total() == 0.0);
}

TEST_CASE("loss matches an independent implementation") {
  oracle::TestRng rng(43);
  for (bool ce : {false, true}) {
    for (int i = 0; i < 10; ++i) {
      const Instance in = random_instance(rng, 7, 9, 3, 3, ce);
      LossConfig cfg;
      cfg.m_weight = rng.uniform(0, 3);
      cfg.sampling_interval = 3.0;
      cfg.distance = ce ? DistanceKind::cross_entropy : DistanceKind::l2;
      const double expect = oracle::loss(in.pf.features, in.pf.coords, oracle::dense_q(in.a),
                                         cfg.m_weight, cfg.sampling_interval, ce);
      CHECK(std::abs(loss(in.pf, in.a, cfg).total() - expect) <= 1e-10 * std::max(1.0, expect));
    }
  }
}

TEST_CASE("analytic gradient against central differences on 16-pixel instances") {
  oracle::TestRng rng(44);
  for (bool ce : {false, true}) {
    for (int i = 0; i < 20; ++i) {
      const Instance in = random_instance(rng, 4, 4, 2, 3, ce);
      REQUIRE(in.a.n_superpixels() == 4);
      LossConfig cfg;
      cfg.m_weight = rng.uniform(0.1, 2);
      cfg.sampling_interval = 2.0;
      cfg.distance = ce ? DistanceKind::cross_entropy : DistanceKind::l2;
      const double bound = ce ? 1e-3 : 1e-4;
      const auto analytic = loss_gradient(in.pf, in.a, cfg);
      REQUIRE(analytic.size() == in.a.entry_count());
      CHECK(relative_error(analytic, oracle_gradient(in, cfg, 1e-5)) <= bound);
      CHECK(fd_gradient_check(in.pf, in.a, cfg, 1e-5) <= bound);
    }
  }
}

TEST_CASE("gradient vanishes at a symmetric stationary point") {
  const SuperpixelGrid g(4, 4, 2);
  const PixelField pf = make_pixel_field(MatrixD(16, 2, 0.25), 4, 4);
  LossConfig cfg;
  cfg.m_weight = 0.0;
  cfg.sampling_interval = 2.0;
  for (double v : loss_gradient(pf, g.uniform_assignment(), cfg)) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("l2 loss is non-negative") {
  oracle::TestRng rng(45);
  for (int i = 0; i < 50; ++i) {
    const Instance in = random_instance(rng, 6, 6, 2, 2, false);
    LossConfig cfg;
    cfg.m_weight = rng.uniform(0, 5);
    cfg.sampling_interval = 2.0;
    const LossTerms t = loss(in.pf, in.a, cfg);
    CHECK(t.property_term >= 0.0);
    CHECK(t.coordinate_term >= 0.0);
  }
}

TEST_CASE("loss configuration and input errors") {
  oracle::TestRng rng(46);
  const Instance in = random_instance(rng, 4, 4, 2, 2, false);
  LossConfig cfg;
  cfg.sampling_interval = 0.0;
  CHECK(code_of([&] { loss(in.pf, in.a, cfg); }) == ErrorCode::invalid_argument);
  cfg.sampling_interval = 1.0;
  cfg.m_weight = std::nan("");
  CHECK(code_of([&] { loss(in.pf, in.a, cfg); }) == ErrorCode::invalid_argument);
  cfg.m_weight = 1.0;
  cfg.distance = DistanceKind::cross_entropy;
  // Uniform(-1, 1) features are not distributions.
  CHECK(code_of([&] { loss(in.pf, in.a, cfg); }) == ErrorCode::invalid_argument);
  cfg.distance = DistanceKind::l2;
  CHECK(code_of([&] { fd_gradient_check(in.pf, in.a, cfg, 0.0); }) == ErrorCode::invalid_argument);
  CHECK(parse_distance_kind("cross_entropy") == DistanceKind::cross_entropy);
  CHECK(code_of([] { parse_distance_kind("l1"); }) == ErrorCode::invalid_argument);
}
