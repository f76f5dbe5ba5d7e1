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

#include "tinit/rng.hpp"

#include <cmath>
#include <numbers>
#include <tuple>
#include <utility>

namespace tinit {

std::uint64_t CounterRng::next_below(std::uint64_t bound) {
  if (bound == 0) {
    throw Error(ErrorCode::invalid_argument, "next_below: bound must be > 0");
  }
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % bound;
}

double CounterRng::next_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = next_unit_open();
  const double u2 = next_unit();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = CounterRng::mix(base ^ 0x6A09E667F3BCC909ULL);
  s = CounterRng::mix(s + a * 0x9E3779B97F4A7C15ULL + 1);
  return CounterRng::mix(s + b * 0xC2B2AE3D27D4EB4FULL + 2);
}

template <Real T>
Matrix<T> sample_matrix(std::size_t rows, std::size_t cols, const RngSpec& rng) {
  if (rows == 0 || cols == 0) {
    throw Error(ErrorCode::invalid_argument, "sample_matrix: empty shape");
  }
  const Distribution& d = rng.distribution;
  if (d.kind == Distribution::Kind::normal && !(d.b >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "sample_matrix: negative variance");
  }
  if (d.kind == Distribution::Kind::uniform && !(d.a <= d.b)) {
    throw Error(ErrorCode::invalid_argument, "sample_matrix: lo > hi");
  }
  CounterRng gen(rng.seed);
  Matrix<T> out(rows, cols);
  const double stddev = std::sqrt(d.b);
  for (T& v : out.values()) {
    double x = d.kind == Distribution::Kind::normal
                   ? d.a + stddev * gen.next_normal()
                   : d.a + (d.b - d.a) * gen.next_unit();
    v = static_cast<T>(x);
  }
  return out;
}

template <Real T>
ColumnStats column_stats(const Matrix<T>& a) {
  const std::size_t n = a.cols();
  if (n < 2) {
    throw Error(ErrorCode::invalid_argument, "column_stats needs >= 2 columns");
  }
  const std::size_t m = a.rows();
  std::vector<double> sq(n, 0.0);
  std::vector<double> inner;
  inner.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < m; ++r) {
        s += static_cast<double>(a(r, i)) * static_cast<double>(a(r, j));
      }
      if (i == j) {
        sq[i] = s;
      } else {
        inner.push_back(s);
      }
    }
  }
  auto mean_var = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var = v.size() > 1 ? var / static_cast<double>(v.size() - 1) : 0.0;
    return std::pair{mean, var};
  };
  ColumnStats out;
  std::tie(out.sq_length_mean, out.sq_length_var) = mean_var(sq);
  std::tie(out.inner_mean, out.inner_var) = mean_var(inner);
  return out;
}

template Matrix<float> sample_matrix(std::size_t, std::size_t, const RngSpec&);
template Matrix<double> sample_matrix(std::size_t, std::size_t, const RngSpec&);
template ColumnStats column_stats(const Matrix<float>&);
template ColumnStats column_stats(const Matrix<double>&);

}  // namespace tinit
