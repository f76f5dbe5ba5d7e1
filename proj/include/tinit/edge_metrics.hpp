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
#include <vector>

#include "tinit/error.hpp"
#include "tinit/label_map.hpp"

namespace tinit {

struct EdgeMask {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<std::uint8_t> bits;  // 1 = edge

  EdgeMask() = default;
  EdgeMask(std::uint32_t h, std::uint32_t w)
      : height(h), width(w), bits(static_cast<std::size_t>(h) * w, 0) {}

  bool at(std::size_t r, std::size_t c) const { return bits[r * width + c] != 0; }
  void set(std::size_t r, std::size_t c, bool v = true) { bits[r * width + c] = v ? 1 : 0; }
  std::size_t count() const;

  friend bool operator==(const EdgeMask&, const EdgeMask&) = default;
};

/// A pixel is an edge iff one of its 4-neighbours carries a different label.
EdgeMask extract_edges(const LabelMap& map);

/// Dilation by the (2r+1) x (2r+1) square (Chebyshev ball of radius r).
EdgeMask dilate(const EdgeMask& e, int radius);

/// Returned by performance_ratio when no predicted edge is false.
constexpr double kPerformanceRatioCap = 1e9;

/// TP / FP with TP the predicted edge pixels inside dilate(gt, r) and FP the
/// rest. FP = 0 gives kPerformanceRatioCap; an empty prediction gives 0 and a
/// warning.
double performance_ratio(const EdgeMask& pred, const EdgeMask& gt, int radius,
                         Warnings* warnings = nullptr);

struct EdgeScores {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  double performance_ratio = 0.0;
};

/// P = |pred ∩ dilate(gt, r)| / |pred|, R = |gt ∩ dilate(pred, r)| / |gt|,
/// FM = 2RP / (R + P), 0 when R + P = 0. An empty gt gives 0 and a warning.
double f_measure(const EdgeMask& pred, const EdgeMask& gt, int radius,
                 Warnings* warnings = nullptr);

/// All four scores at one tolerance.
EdgeScores score_edges(const EdgeMask& pred, const EdgeMask& gt, int radius,
                       Warnings* warnings = nullptr);

}  // namespace tinit
