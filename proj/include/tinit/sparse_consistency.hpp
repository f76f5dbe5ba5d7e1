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
#include <optional>
#include <span>
#include <vector>

#include "tinit/error.hpp"
#include "tinit/label_map.hpp"
#include "tinit/linalg.hpp"

namespace tinit {

/// Binary superpixel-by-pixel membership in CSR form, one row per superpixel.
/// Every pixel belongs to exactly one superpixel, so nnz == n_pixels.
class SparseMembership {
 public:
  SparseMembership() = default;
  /// Validates the CSR invariants; throws format on violation.
  SparseMembership(std::size_t n_superpixels, std::size_t n_pixels,
                   std::vector<std::size_t> row_offsets,
                   std::vector<std::uint32_t> col_indices);

  /// Row s lists the pixels with id s in row-major order. n_superpixels
  /// defaults to the map's id bound; ids at or above it are rejected.
  static SparseMembership from_label_map(
      const LabelMap& map, std::optional<std::size_t> n_superpixels = std::nullopt);

  std::size_t n_superpixels() const noexcept { return n_superpixels_; }
  std::size_t n_pixels() const noexcept { return n_pixels_; }
  std::size_t nnz() const noexcept { return col_indices_.size(); }
  std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
  std::span<const std::uint32_t> col_indices() const noexcept { return col_indices_; }

  std::span<const std::uint32_t> row(std::size_t s) const {
    return {col_indices_.data() + row_offsets_[s],
            row_offsets_[s + 1] - row_offsets_[s]};
  }
  std::size_t row_size(std::size_t s) const {
    return row_offsets_[s + 1] - row_offsets_[s];
  }

 private:
  std::size_t n_superpixels_ = 0;
  std::size_t n_pixels_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::uint32_t> col_indices_;
};

/// Per-superpixel mean logits, N_s x N_l, from N_l x N_p logits.
///
/// Each mean is accumulated in ascending pixel order as
/// x_first + Σ (x_p − x_first) / |P_s| in double, so a superpixel whose
/// pixels already share a value maps back to exactly that value. Empty
/// superpixels yield a zero row and a warning.
template <Real T>
Matrix<T> encode(const SparseMembership& m, const Matrix<T>& logits,
                 Warnings* warnings = nullptr);

/// Broadcasts superpixel rows back to pixels: out(l, p) = sp(s(p), l).
template <Real T>
Matrix<T> decode(const SparseMembership& m, const Matrix<T>& sp_logits);

/// decode(encode(logits)): every pixel takes its superpixel's mean logit.
template <Real T>
Matrix<T> enforce_consistency(const SparseMembership& m, const Matrix<T>& logits,
                              Warnings* warnings = nullptr);

/// The same average through an explicit dense N_s x N_p membership matrix and
/// two dense products; O(N_l·N_s·N_p) work. Used as a cross-check.
template <Real T>
Matrix<T> enforce_consistency_dense(const LabelMap& sp_map, const Matrix<T>& logits,
                                    std::size_t n_superpixels);

/// Per-pixel index of the largest logit; ties go to the lowest label.
template <Real T>
LabelMap argmax_labels(const LogitTensor<T>& logits);

}  // namespace tinit
