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

#pragma once

#include <cstddef>
#include <cstdint>

#include "tinit/linalg.hpp"

namespace tinit {

/// Counter-based generator: the i-th 64-bit draw is the SplitMix64 finalizer
/// applied to seed + (i + 1) * 0x9E3779B97F4A7C15. Draw i depends only on
/// (seed, i), so streams are reproducible and can be indexed directly.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0)
      : seed_(seed), counter_(counter) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t at(std::uint64_t seed, std::uint64_t index) {
    return mix(seed + (index + 1) * 0x9E3779B97F4A7C15ULL);
  }

  std::uint64_t next_u64() { return at(seed_, counter_++); }

  /// Uniform in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1]; safe as a log argument.
  double next_unit_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound) by rejection.
  std::uint64_t next_below(std::uint64_t bound);

  /// One standard normal via Box–Muller; the generator keeps the paired
  /// sine variate for the following call.
  double next_normal();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Derives an independent stream seed from a base seed and a tag list.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                          std::uint64_t b = 0);

struct Distribution {
  enum class Kind { normal, uniform };
  Kind kind = Kind::normal;
  double a = 0.0;  // normal: mean; uniform: lower bound
  double b = 1.0;  // normal: variance; uniform: upper bound

  static Distribution normal(double mean, double variance) {
    return {Kind::normal, mean, variance};
  }
  static Distribution uniform(double lo, double hi) {
    return {Kind::uniform, lo, hi};
  }
};

struct RngSpec {
  std::uint64_t seed = 0;
  Distribution distribution;
};

/// i.i.d. entries in row-major order. Samples are generated in double and
/// rounded once to T, so a float matrix is the rounding of the double one.
template <Real T>
Matrix<T> sample_matrix(std::size_t rows, std::size_t cols, const RngSpec& rng);

/// Column geometry summary: squared lengths of each column and inner
/// products of every distinct column pair. Variances are unbiased (n - 1).
struct ColumnStats {
  double sq_length_mean = 0.0;
  double sq_length_var = 0.0;
  double inner_mean = 0.0;
  double inner_var = 0.0;
};

template <Real T>
ColumnStats column_stats(const Matrix<T>& a);

}  // namespace tinit
