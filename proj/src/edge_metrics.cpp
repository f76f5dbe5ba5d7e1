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

#include "tinit/edge_metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace tinit {

namespace {

void check_same(const EdgeMask& a, const EdgeMask& b) {
  if (a.height != b.height || a.width != b.width) {
    throw Error(ErrorCode::dimension_mismatch,
                "edge masks differ in size: " + std::to_string(a.height) + "x" +
                    std::to_string(a.width) + " vs " + std::to_string(b.height) + "x" +
                    std::to_string(b.width));
  }
}

std::size_t overlap(const EdgeMask& a, const EdgeMask& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) n += (a.bits[i] && b.bits[i]) ? 1 : 0;
  return n;
}

}  // namespace

std::size_t EdgeMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

EdgeMask extract_edges(const LabelMap& map) {
  EdgeMask e(map.height, map.width);
  for (std::size_t r = 0; r < map.height; ++r) {
    for (std::size_t c = 0; c < map.width; ++c) {
      const std::uint32_t v = map.at(r, c);
      const bool edge = (r > 0 && map.at(r - 1, c) != v) ||
                        (r + 1 < map.height && map.at(r + 1, c) != v) ||
                        (c > 0 && map.at(r, c - 1) != v) ||
                        (c + 1 < map.width && map.at(r, c + 1) != v);
      e.set(r, c, edge);
    }
  }
  return e;
}

EdgeMask dilate(const EdgeMask& e, int radius) {
  if (radius < 0) throw Error(ErrorCode::invalid_argument, "dilate: radius must be >= 0");
  if (radius == 0) return e;
  const std::size_t h = e.height;
  const std::size_t w = e.width;
  const auto rad = static_cast<std::size_t>(radius);
  // The square structuring element separates into a row pass and a column pass.
  EdgeMask rows(e.height, e.width);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      if (!e.at(r, c)) continue;
      const std::size_t lo = c >= rad ? c - rad : 0;
      const std::size_t hi = std::min(w - 1, c + rad);
      for (std::size_t cc = lo; cc <= hi; ++cc) rows.set(r, cc);
    }
  }
  EdgeMask out(e.height, e.width);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      if (!rows.at(r, c)) continue;
      const std::size_t lo = r >= rad ? r - rad : 0;
      const std::size_t hi = std::min(h - 1, r + rad);
      for (std::size_t rr = lo; rr <= hi; ++rr) out.set(rr, c);
    }
  }
  return out;
}

double performance_ratio(const EdgeMask& pred, const EdgeMask& gt, int radius,
                         Warnings* warnings) {
  check_same(pred, gt);
  const std::size_t predicted = pred.count();
  if (predicted == 0) {
    warn(warnings, "performance ratio: prediction has no edge pixels");
    return 0.0;
  }
  const std::size_t tp = overlap(pred, dilate(gt, radius));
  const std::size_t fp = predicted - tp;
  if (fp == 0) return kPerformanceRatioCap;
  return static_cast<double>(tp) / static_cast<double>(fp);
}

double f_measure(const EdgeMask& pred, const EdgeMask& gt, int radius, Warnings* warnings) {
  return score_edges(pred, gt, radius, warnings).f_measure;
}

EdgeScores score_edges(const EdgeMask& pred, const EdgeMask& gt, int radius,
                       Warnings* warnings) {
  check_same(pred, gt);
  EdgeScores s;
  s.performance_ratio = performance_ratio(pred, gt, radius, warnings);
  const std::size_t n_gt = gt.count();
  if (n_gt == 0) {
    warn(warnings, "f-measure: ground truth has no edge pixels");
    return s;
  }
  const std::size_t n_pred = pred.count();
  s.precision = n_pred == 0 ? 0.0
                            : static_cast<double>(overlap(pred, dilate(gt, radius))) /
                                  static_cast<double>(n_pred);
  s.recall = static_cast<double>(overlap(gt, dilate(pred, radius))) / static_cast<double>(n_gt);
  s.f_measure = s.precision + s.recall > 0.0
                    ? 2.0 * s.recall * s.precision / (s.recall + s.precision)
                    : 0.0;
  return s;
}

}  // namespace tinit
