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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tinit/error.hpp"
#include "tinit/linalg.hpp"

namespace tinit {

/// H x W grid of region or class ids, row-major.
struct LabelMap {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<std::uint32_t> ids;

  LabelMap() = default;
  LabelMap(std::uint32_t h, std::uint32_t w, std::vector<std::uint32_t> v)
      : height(h), width(w), ids(std::move(v)) {
    if (ids.size() != static_cast<std::size_t>(h) * w) {
      throw Error(ErrorCode::dimension_mismatch,
                  "label map payload has " + std::to_string(ids.size()) +
                      " ids, expected " + std::to_string(std::size_t{h} * w));
    }
  }
  LabelMap(std::uint32_t h, std::uint32_t w, std::uint32_t fill = 0)
      : height(h), width(w), ids(static_cast<std::size_t>(h) * w, fill) {}

  std::size_t pixel_count() const noexcept { return ids.size(); }
  std::uint32_t& at(std::size_t r, std::size_t c) { return ids[r * width + c]; }
  std::uint32_t at(std::size_t r, std::size_t c) const {
    return ids[r * width + c];
  }
  /// One past the largest id (0 for an empty map).
  std::uint32_t id_bound() const {
    return ids.empty() ? 0 : *std::max_element(ids.begin(), ids.end()) + 1;
  }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

/// Dense N_l x N_p logits, label-major; pixels are the row-major flattening of
/// a height x width grid.
template <Real T>
struct LogitTensor {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  Matrix<T> values;

  LogitTensor() = default;
  LogitTensor(std::uint32_t h, std::uint32_t w, Matrix<T> v)
      : height(h), width(w), values(std::move(v)) {
    if (values.cols() != static_cast<std::size_t>(h) * w) {
      throw Error(ErrorCode::dimension_mismatch,
                  "logit tensor has " + std::to_string(values.cols()) +
                      " pixel columns, expected " +
                      std::to_string(std::size_t{h} * w));
    }
  }

  std::size_t n_labels() const noexcept { return values.rows(); }
  std::size_t n_pixels() const noexcept { return values.cols(); }
};

}  // namespace tinit
