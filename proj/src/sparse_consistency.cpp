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

#include "tinit/sparse_consistency.hpp"

#include <string>

#include "tinit/parallel.hpp"

namespace tinit {

SparseMembership::SparseMembership(std::size_t n_superpixels, std::size_t n_pixels,
                                   std::vector<std::size_t> row_offsets,
                                   std::vector<std::uint32_t> col_indices)
    : n_superpixels_(n_superpixels),
      n_pixels_(n_pixels),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)) {
  if (row_offsets_.size() != n_superpixels_ + 1 || row_offsets_.front() != 0 ||
      row_offsets_.back() != col_indices_.size()) {
    throw Error(ErrorCode::format, "membership: malformed row offsets");
  }
  if (col_indices_.size() != n_pixels_) {
    throw Error(ErrorCode::format,
                "membership: expected exactly one entry per pixel (nnz " +
                    std::to_string(col_indices_.size()) + ", pixels " +
                    std::to_string(n_pixels_) + ")");
  }
  std::vector<bool> seen(n_pixels_, false);
  for (std::size_t s = 0; s < n_superpixels_; ++s) {
    if (row_offsets_[s] > row_offsets_[s + 1]) {
      throw Error(ErrorCode::format, "membership: row offsets decrease");
    }
    for (std::size_t i = row_offsets_[s]; i < row_offsets_[s + 1]; ++i) {
      const std::uint32_t p = col_indices_[i];
      if (p >= n_pixels_) throw Error(ErrorCode::format, "membership: pixel index out of range");
      if (i > row_offsets_[s] && col_indices_[i - 1] >= p) {
        throw Error(ErrorCode::format, "membership: column indices not strictly increasing");
      }
      if (seen[p]) {
        throw Error(ErrorCode::format,
                    "membership: pixel " + std::to_string(p) + " listed twice");
      }
      seen[p] = true;
    }
  }
}

SparseMembership SparseMembership::from_label_map(const LabelMap& map,
                                                  std::optional<std::size_t> n_superpixels) {
  if (map.ids.empty()) {
    throw Error(ErrorCode::invalid_argument, "membership: empty superpixel map");
  }
  const std::size_t ns = n_superpixels.value_or(map.id_bound());
  std::vector<std::size_t> offsets(ns + 1, 0);
  for (std::size_t p = 0; p < map.ids.size(); ++p) {
    const std::uint32_t s = map.ids[p];
    if (s >= ns) {
      throw Error(ErrorCode::invalid_argument,
                  "membership: superpixel id " + std::to_string(s) +
                      " at pixel " + std::to_string(p) + " is outside [0, " +
                      std::to_string(ns) + ")");
    }
    ++offsets[s + 1];
  }
  for (std::size_t s = 0; s < ns; ++s) offsets[s + 1] += offsets[s];
  std::vector<std::uint32_t> cols(map.ids.size());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (std::size_t p = 0; p < map.ids.size(); ++p) {
    cols[cursor[map.ids[p]]++] = static_cast<std::uint32_t>(p);
  }
  SparseMembership m;
  m.n_superpixels_ = ns;
  m.n_pixels_ = map.ids.size();
  m.row_offsets_ = std::move(offsets);
  m.col_indices_ = std::move(cols);
  return m;
}

template <Real T>
Matrix<T> encode(const SparseMembership& m, const Matrix<T>& logits, Warnings* warnings) {
  if (logits.cols() != m.n_pixels()) {
    throw Error(ErrorCode::dimension_mismatch,
                "encode: logits cover " + std::to_string(logits.cols()) +
                    " pixels, membership has " + std::to_string(m.n_pixels()));
  }
  const std::size_t ns = m.n_superpixels();
  const std::size_t nl = logits.rows();
  Matrix<T> out(ns, nl);
  for (std::size_t s = 0; s < ns; ++s) {
    if (m.row_size(s) == 0) {
      warn(warnings, "superpixel " + std::to_string(s) + " has no pixels; its logits are set to 0");
    }
  }
  parallel_for(ns, [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      auto pixels = m.row(s);
      if (pixels.empty()) continue;
      const double count = static_cast<double>(pixels.size());
      for (std::size_t l = 0; l < nl; ++l) {
        auto x = logits.row(l);
        const double pivot = x[pixels[0]];
        double acc = 0.0;
        for (std::uint32_t p : pixels) acc += static_cast<double>(x[p]) - pivot;
        out(s, l) = static_cast<T>(pivot + acc / count);
      }
    }
  }, 8);
  return out;
}

template <Real T>
Matrix<T> decode(const SparseMembership& m, const Matrix<T>& sp_logits) {
  if (sp_logits.rows() != m.n_superpixels()) {
    throw Error(ErrorCode::dimension_mismatch,
                "decode: expected " + std::to_string(m.n_superpixels()) +
                    " superpixel rows, got " + std::to_string(sp_logits.rows()));
  }
  const std::size_t nl = sp_logits.cols();
  Matrix<T> out(nl, m.n_pixels());
  parallel_for(nl, [&](std::size_t begin, std::size_t end) {
    for (std::size_t l = begin; l < end; ++l) {
      auto dst = out.row(l);
      for (std::size_t s = 0; s < m.n_superpixels(); ++s) {
        const T v = sp_logits(s, l);
        for (std::uint32_t p : m.row(s)) dst[p] = v;
      }
    }
  }, 4);
  return out;
}

template <Real T>
Matrix<T> enforce_consistency(const SparseMembership& m, const Matrix<T>& logits,
                              Warnings* warnings) {
  return decode(m, encode(m, logits, warnings));
}

template <Real T>
Matrix<T> enforce_consistency_dense(const LabelMap& sp_map, const Matrix<T>& logits,
                                    std::size_t n_superpixels) {
  const std::size_t np = sp_map.pixel_count();
  if (logits.cols() != np) {
    throw Error(ErrorCode::dimension_mismatch, "dense consistency: pixel count mismatch");
  }
  // membership_t is N_p x N_s so that logits (N_l x N_p) · membership_t gives
  // per-superpixel sums.
  MatrixD membership_t(np, n_superpixels);
  for (std::size_t p = 0; p < np; ++p) {
    if (sp_map.ids[p] >= n_superpixels) {
      throw Error(ErrorCode::invalid_argument, "dense consistency: id out of range");
    }
    membership_t(p, sp_map.ids[p]) = 1.0;
  }
  MatrixD x = logits.template cast<double>();
  MatrixD sums = matmul(x, membership_t);  // N_l x N_s
  std::vector<double> counts(n_superpixels, 0.0);
  for (std::size_t p = 0; p < np; ++p)
    for (std::size_t s = 0; s < n_superpixels; ++s) counts[s] += membership_t(p, s);
  for (std::size_t l = 0; l < sums.rows(); ++l)
    for (std::size_t s = 0; s < n_superpixels; ++s)
      sums(l, s) = counts[s] > 0.0 ? sums(l, s) / counts[s] : 0.0;
  return matmul(sums, transpose(membership_t)).template cast<T>();
}

template <Real T>
LabelMap argmax_labels(const LogitTensor<T>& logits) {
  if (logits.n_labels() == 0) {
    throw Error(ErrorCode::invalid_argument, "argmax_labels: no labels");
  }
  LabelMap out(logits.height, logits.width, 0u);
  for (std::size_t p = 0; p < logits.n_pixels(); ++p) {
    std::uint32_t best = 0;
    T best_v = logits.values(0, p);
    for (std::size_t l = 1; l < logits.n_labels(); ++l) {
      if (logits.values(l, p) > best_v) {
        best_v = logits.values(l, p);
        best = static_cast<std::uint32_t>(l);
      }
    }
    out.ids[p] = best;
  }
  return out;
}

#define TINIT_INSTANTIATE(T)                                                              \
  template Matrix<T> encode(const SparseMembership&, const Matrix<T>&, Warnings*);        \
  template Matrix<T> decode(const SparseMembership&, const Matrix<T>&);                   \
  template Matrix<T> enforce_consistency(const SparseMembership&, const Matrix<T>&,       \
                                         Warnings*);                                      \
  template Matrix<T> enforce_consistency_dense(const LabelMap&, const Matrix<T>&,         \
                                               std::size_t);                              \
  template LabelMap argmax_labels(const LogitTensor<T>&);

TINIT_INSTANTIATE(float)
TINIT_INSTANTIATE(double)

#undef TINIT_INSTANTIATE

}  // namespace tinit
