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

// Superpixel clustering objective: pixel properties and coordinates are
// pooled into superpixel centroids through soft assignments q, mixed back to
// pixels, and compared with the originals.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "tinit/linalg.hpp"

namespace tinit {

/// Per-pixel properties f (N_p x K) and coordinates c (N_p x 2, x then y).
struct PixelField {
  MatrixD features;
  MatrixD coords;

  std::size_t n_pixels() const noexcept { return features.rows(); }
  std::size_t n_features() const noexcept { return features.cols(); }
};

/// Pixel properties for an H x W image with coordinates (col, row).
PixelField make_pixel_field(MatrixD features, std::size_t height, std::size_t width);

/// Soft assignment of every pixel to its neighbouring superpixels, stored per
/// pixel: entries offsets[p] .. offsets[p+1] of `superpixels`/`probs`.
class AssignmentMap {
 public:
  AssignmentMap() = default;
  /// Validates q >= 0, Σ q = 1 per pixel (1e-6), distinct neighbours and ids
  /// below n_superpixels.
  AssignmentMap(std::size_t n_superpixels, std::vector<std::size_t> offsets,
                std::vector<std::uint32_t> superpixels, std::vector<double> probs);

  std::size_t n_superpixels() const noexcept { return n_superpixels_; }
  std::size_t n_pixels() const noexcept { return offsets_.size() - 1; }
  std::size_t entry_count() const noexcept { return probs_.size(); }

  std::span<const std::uint32_t> neighbours(std::size_t p) const {
    return {superpixels_.data() + offsets_[p], offsets_[p + 1] - offsets_[p]};
  }
  std::span<const double> probs(std::size_t p) const {
    return {probs_.data() + offsets_[p], offsets_[p + 1] - offsets_[p]};
  }
  std::span<const std::size_t> offsets() const noexcept { return offsets_; }
  std::span<const std::uint32_t> superpixel_ids() const noexcept { return superpixels_; }
  std::span<const double> all_probs() const noexcept { return probs_; }

  /// Same neighbourhoods, new probabilities (not revalidated; used for
  /// finite-difference perturbations).
  AssignmentMap with_probs(std::vector<double> probs) const;

 private:
  std::size_t n_superpixels_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint32_t> superpixels_;
  std::vector<double> probs_;
};

/// Regular grid of superpixel cells with spacing `interval`; the neighbours of
/// a pixel are the (up to) 3 x 3 cells around the cell containing it, listed
/// row-major.
struct SuperpixelGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t interval = 1;
  std::size_t cell_rows = 0;
  std::size_t cell_cols = 0;

  SuperpixelGrid(std::size_t height, std::size_t width, std::size_t interval);

  std::size_t n_superpixels() const { return cell_rows * cell_cols; }
  std::size_t n_pixels() const { return height * width; }
  std::uint32_t cell_of(std::size_t pixel) const;
  std::vector<std::uint32_t> neighbours(std::size_t pixel) const;

  /// Softmax over each pixel's neighbours of scores[p][slot], where slot runs
  /// over the 3 x 3 window (row-major, 9 slots); slots outside the grid are
  /// skipped. scores must be N_p x 9.
  AssignmentMap softmax_assignment(const MatrixD& scores) const;
  /// All mass on the pixel's own cell.
  AssignmentMap hard_assignment() const;
  /// All mass on the given superpixel per pixel (must be a neighbour).
  AssignmentMap hard_assignment(std::span<const std::uint32_t> labels) const;
  /// Equal mass on every neighbour.
  AssignmentMap uniform_assignment() const;
};

enum class DistanceKind { l2, cross_entropy };

std::string_view to_string(DistanceKind d);
DistanceKind parse_distance_kind(std::string_view s);

struct LossConfig {
  double m_weight = 0.0;
  double sampling_interval = 1.0;
  DistanceKind distance = DistanceKind::l2;
};

constexpr double kCrossEntropyClamp = 1e-12;

struct Centroids {
  MatrixD properties;  // N_s x K
  MatrixD coords;      // N_s x 2
};

struct Reconstruction {
  MatrixD properties;  // N_p x K
  MatrixD coords;      // N_p x 2
};

struct LossTerms {
  double property_term = 0.0;
  double coordinate_term = 0.0;
  double total() const { return property_term + coordinate_term; }
};

/// u_s = Σ_p f(p) q_s(p) / Σ_p q_s(p), likewise l_s for coordinates.
Centroids aggregate(const PixelField& pf, const AssignmentMap& a);

/// f'(p) = Σ_{s ∈ N_p} u_s q_s(p), likewise c'(p).
Reconstruction reconstruct(const Centroids& centroids, const AssignmentMap& a);

/// Σ_p E(f(p), f'(p)) + (m / D) Σ_p ‖c(p) − c'(p)‖₂ with E the squared l2
/// distance or the cross-entropy −Σ_k f_k log max(f'_k, 1e-12). The
/// cross-entropy form requires every f'(p) to be a distribution.
LossTerms loss(const PixelField& pf, const AssignmentMap& a, const LossConfig& cfg);

/// Analytic ∂L/∂q for every stored assignment entry, same layout as
/// a.all_probs(). Entries are treated as free variables.
std::vector<double> loss_gradient(const PixelField& pf, const AssignmentMap& a,
                                  const LossConfig& cfg);

/// max over entries of |analytic − central difference| / max(1, |central|).
double fd_gradient_check(const PixelField& pf, const AssignmentMap& a,
                         const LossConfig& cfg, double h);

}  // namespace tinit
