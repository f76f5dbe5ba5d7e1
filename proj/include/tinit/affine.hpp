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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tinit/linalg.hpp"
#include "tinit/rng.hpp"

namespace tinit {

/// Row-vector affine map x -> x·A + b with A of shape m x n and b of length n.
/// Homogeneous form is [[A, 0ᵀ], [b, 1]].
template <Real T>
struct AffineTransform {
  Matrix<T> weight;
  std::vector<T> bias;

  AffineTransform() = default;
  AffineTransform(Matrix<T> w, std::vector<T> b)
      : weight(std::move(w)), bias(std::move(b)) {
    if (bias.size() != weight.cols()) {
      throw Error(ErrorCode::dimension_mismatch,
                  "affine bias length " + std::to_string(bias.size()) +
                      " does not match weight columns " +
                      std::to_string(weight.cols()));
    }
  }

  static AffineTransform identity(std::size_t n) {
    return {Matrix<T>::identity(n), std::vector<T>(n, T{0})};
  }

  std::size_t in_dim() const noexcept { return weight.rows(); }
  std::size_t out_dim() const noexcept { return weight.cols(); }

  /// (m+1) x (n+1) homogeneous matrix.
  Matrix<T> homogeneous() const;

  friend bool operator==(const AffineTransform&, const AffineTransform&) = default;
};

template <Real T>
std::vector<T> apply(const AffineTransform<T>& t, std::span<const T> x);

/// Applies t to every row of batch.
template <Real T>
Matrix<T> apply_rows(const AffineTransform<T>& t, const Matrix<T>& batch);

/// The map "first t1, then t2": weight A₁A₂, bias b₁A₂ + b₂.
template <Real T>
AffineTransform<T> compose(const AffineTransform<T>& t1,
                           const AffineTransform<T>& t2);

/// Weight Aᴿ and bias −b·Aᴿ, so compose(t, inverse) is the identity on ℝᵐ.
template <Real T>
AffineTransform<T> affine_right_inverse(const AffineTransform<T>& t,
                                        double cond_limit = kDefaultCondLimit);

/// Composes a whole chain left to right.
template <Real T>
AffineTransform<T> compose_all(std::span<const AffineTransform<T>> chain);

struct ChainSpec {
  std::vector<std::size_t> dims;  // m0, m1, ..., mk
  std::uint64_t seed = 0;
  double bias_variance = 1.0;
  double cond_limit = kDefaultCondLimit;
};

/// Empty iff spec is buildable: at least two transforms, m0 == mk, every
/// intermediate width at least m0, positive widths, bias variance >= 0.
std::vector<std::string> validate_chain_spec(const ChainSpec& spec);

constexpr int kChainRetries = 8;

/// Seed used for layer `layer` on attempt `attempt` of a chain build.
std::uint64_t chain_layer_seed(std::uint64_t base, std::size_t layer,
                               int attempt, bool bias);

/// Samples transforms 1..k-1 (weights N(0, 1/m_{i-1}), biases
/// N(0, bias_variance)) and sets transform k to the right inverse of their
/// composition. Ill-conditioned draws are resampled from derived seeds up to
/// kChainRetries times.
template <Real T>
std::vector<AffineTransform<T>> build_identity_chain(const ChainSpec& spec);

/// Chain container: a u32 count then, per transform, an MTRX weight record and
/// a 1 x n MTRX bias record.
template <Real T>
void save_chain(const std::filesystem::path& path,
                std::span<const AffineTransform<T>> chain);
template <Real T>
std::vector<AffineTransform<T>> load_chain(const std::filesystem::path& path);

}  // namespace tinit
