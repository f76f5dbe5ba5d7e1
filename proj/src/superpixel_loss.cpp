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

#include "tinit/superpixel_loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tinit {

PixelField make_pixel_field(MatrixD features, std::size_t height, std::size_t width) {
  if (features.rows() != height * width) {
    throw Error(ErrorCode::dimension_mismatch,
                "pixel field: " + std::to_string(features.rows()) +
                    " feature rows for a " + std::to_string(height) + "x" +
                    std::to_string(width) + " image");
  }
  if (features.cols() == 0) {
    throw Error(ErrorCode::invalid_argument, "pixel field needs K >= 1 features");
  }
  MatrixD coords(height * width, 2);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      coords(r * width + c, 0) = static_cast<double>(c);
      coords(r * width + c, 1) = static_cast<double>(r);
    }
  }
  return {std::move(features), std::move(coords)};
}

AssignmentMap::AssignmentMap(std::size_t n_superpixels, std::vector<std::size_t> offsets,
                             std::vector<std::uint32_t> superpixels,
                             std::vector<double> probs)
    : n_superpixels_(n_superpixels),
      offsets_(std::move(offsets)),
      superpixels_(std::move(superpixels)),
      probs_(std::move(probs)) {
  if (offsets_.empty() || offsets_.front() != 0 || offsets_.back() != probs_.size() ||
      superpixels_.size() != probs_.size()) {
    throw Error(ErrorCode::format, "assignment: malformed offsets");
  }
  for (std::size_t p = 0; p + 1 < offsets_.size(); ++p) {
    if (offsets_[p] > offsets_[p + 1]) {
      throw Error(ErrorCode::format, "assignment: offsets decrease");
    }
    double total = 0.0;
    for (std::size_t i = offsets_[p]; i < offsets_[p + 1]; ++i) {
      if (superpixels_[i] >= n_superpixels_) {
        throw Error(ErrorCode::invalid_argument, "assignment: superpixel id out of range");
      }
      for (std::size_t j = offsets_[p]; j < i; ++j) {
        if (superpixels_[j] == superpixels_[i]) {
          throw Error(ErrorCode::invalid_argument, "assignment: repeated neighbour");
        }
      }
      if (!(probs_[i] >= 0.0) || !std::isfinite(probs_[i])) {
        throw Error(ErrorCode::invalid_argument,
                    "assignment: negative or non-finite probability at pixel " +
                        std::to_string(p));
      }
      total += probs_[i];
    }
    if (std::abs(total - 1.0) > 1e-6) {
      throw Error(ErrorCode::invalid_argument,
                  "assignment: probabilities of pixel " + std::to_string(p) +
                      " sum to " + std::to_string(total));
    }
  }
}

AssignmentMap AssignmentMap::with_probs(std::vector<double> probs) const {
  if (probs.size() != probs_.size()) {
    throw Error(ErrorCode::dimension_mismatch, "assignment: probability count changed");
  }
  AssignmentMap out = *this;
  out.probs_ = std::move(probs);
  return out;
}

SuperpixelGrid::SuperpixelGrid(std::size_t h, std::size_t w, std::size_t d)
    : height(h), width(w), interval(d) {
  if (h == 0 || w == 0) throw Error(ErrorCode::invalid_argument, "grid: empty image");
  if (d == 0) throw Error(ErrorCode::invalid_argument, "grid: sampling interval must be > 0");
  cell_rows = (h + d - 1) / d;
  cell_cols = (w + d - 1) / d;
}

std::uint32_t SuperpixelGrid::cell_of(std::size_t pixel) const {
  const std::size_t r = pixel / width;
  const std::size_t c = pixel % width;
  return static_cast<std::uint32_t>((r / interval) * cell_cols + c / interval);
}

std::vector<std::uint32_t> SuperpixelGrid::neighbours(std::size_t pixel) const {
  const auto cr = static_cast<long long>((pixel / width) / interval);
  const auto cc = static_cast<long long>((pixel % width) / interval);
  std::vector<std::uint32_t> out;
  for (long long dr = -1; dr <= 1; ++dr) {
    for (long long dc = -1; dc <= 1; ++dc) {
      const long long r = cr + dr;
      const long long c = cc + dc;
      if (r < 0 || c < 0 || r >= static_cast<long long>(cell_rows) ||
          c >= static_cast<long long>(cell_cols)) {
        continue;
      }
      out.push_back(static_cast<std::uint32_t>(r * static_cast<long long>(cell_cols) + c));
    }
  }
  return out;
}

AssignmentMap SuperpixelGrid::softmax_assignment(const MatrixD& scores) const {
  if (scores.rows() != n_pixels() || scores.cols() != 9) {
    throw Error(ErrorCode::dimension_mismatch, "softmax assignment needs N_p x 9 scores");
  }
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> ids;
  std::vector<double> probs;
  for (std::size_t p = 0; p < n_pixels(); ++p) {
    const auto cr = static_cast<long long>((p / width) / interval);
    const auto cc = static_cast<long long>((p % width) / interval);
    std::vector<double> raw;
    for (long long dr = -1; dr <= 1; ++dr) {
      for (long long dc = -1; dc <= 1; ++dc) {
        const long long r = cr + dr;
        const long long c = cc + dc;
        if (r < 0 || c < 0 || r >= static_cast<long long>(cell_rows) ||
            c >= static_cast<long long>(cell_cols)) {
          continue;
        }
        ids.push_back(static_cast<std::uint32_t>(r * static_cast<long long>(cell_cols) + c));
        raw.push_back(scores(p, static_cast<std::size_t>((dr + 1) * 3 + (dc + 1))));
      }
    }
    const double mx = *std::max_element(raw.begin(), raw.end());
    double z = 0.0;
    for (double& v : raw) z += (v = std::exp(v - mx));
    for (double v : raw) probs.push_back(v / z);
    offsets.push_back(probs.size());
  }
  return AssignmentMap(n_superpixels(), std::move(offsets), std::move(ids), std::move(probs));
}

AssignmentMap SuperpixelGrid::hard_assignment() const {
  std::vector<std::uint32_t> labels(n_pixels());
  for (std::size_t p = 0; p < n_pixels(); ++p) labels[p] = cell_of(p);
  return hard_assignment(labels);
}

AssignmentMap SuperpixelGrid::hard_assignment(std::span<const std::uint32_t> labels) const {
  if (labels.size() != n_pixels()) {
    throw Error(ErrorCode::dimension_mismatch, "hard assignment: one label per pixel");
  }
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> ids;
  std::vector<double> probs;
  for (std::size_t p = 0; p < n_pixels(); ++p) {
    auto nb = neighbours(p);
    if (std::find(nb.begin(), nb.end(), labels[p]) == nb.end()) {
      throw Error(ErrorCode::invalid_argument,
                  "hard assignment: superpixel " + std::to_string(labels[p]) +
                      " is not a neighbour of pixel " + std::to_string(p));
    }
    for (std::uint32_t s : nb) {
      ids.push_back(s);
      probs.push_back(s == labels[p] ? 1.0 : 0.0);
    }
    offsets.push_back(probs.size());
  }
  return AssignmentMap(n_superpixels(), std::move(offsets), std::move(ids), std::move(probs));
}

AssignmentMap SuperpixelGrid::uniform_assignment() const {
  return softmax_assignment(MatrixD(n_pixels(), 9, 0.0));
}

std::string_view to_string(DistanceKind d) {
  return d == DistanceKind::l2 ? "l2" : "cross_entropy";
}

DistanceKind parse_distance_kind(std::string_view s) {
  if (s == "l2") return DistanceKind::l2;
  if (s == "cross_entropy" || s == "ce") return DistanceKind::cross_entropy;
  throw Error(ErrorCode::invalid_argument, "unknown distance '" + std::string(s) + "'");
}

namespace {

void check_shapes(const PixelField& pf, const AssignmentMap& a) {
  if (pf.coords.rows() != pf.n_pixels() || pf.coords.cols() != 2) {
    throw Error(ErrorCode::dimension_mismatch, "pixel field coordinates must be N_p x 2");
  }
  if (a.n_pixels() != pf.n_pixels()) {
    throw Error(ErrorCode::dimension_mismatch,
                "assignment covers " + std::to_string(a.n_pixels()) +
                    " pixels, field has " + std::to_string(pf.n_pixels()));
  }
}

std::vector<double> superpixel_weights(const AssignmentMap& a) {
  std::vector<double> w(a.n_superpixels(), 0.0);
  for (std::size_t p = 0; p < a.n_pixels(); ++p) {
    auto ids = a.neighbours(p);
    auto q = a.probs(p);
    for (std::size_t i = 0; i < ids.size(); ++i) w[ids[i]] += q[i];
  }
  return w;
}

MatrixD pool(const MatrixD& values, const AssignmentMap& a, const std::vector<double>& w) {
  MatrixD out(a.n_superpixels(), values.cols());
  for (std::size_t p = 0; p < a.n_pixels(); ++p) {
    auto ids = a.neighbours(p);
    auto q = a.probs(p);
    auto v = values.row(p);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      auto dst = out.row(ids[i]);
      for (std::size_t k = 0; k < v.size(); ++k) dst[k] += v[k] * q[i];
    }
  }
  for (std::size_t s = 0; s < out.rows(); ++s) {
    for (double& x : out.row(s)) x /= w[s];
  }
  return out;
}

MatrixD mix(const MatrixD& centroids, const AssignmentMap& a) {
  MatrixD out(a.n_pixels(), centroids.cols());
  for (std::size_t p = 0; p < a.n_pixels(); ++p) {
    auto ids = a.neighbours(p);
    auto q = a.probs(p);
    auto dst = out.row(p);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      auto u = centroids.row(ids[i]);
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += u[k] * q[i];
    }
  }
  return out;
}

Centroids aggregate_unchecked(const PixelField& pf, const AssignmentMap& a) {
  auto w = superpixel_weights(a);
  return {pool(pf.features, a, w), pool(pf.coords, a, w)};
}

LossTerms loss_unchecked(const PixelField& pf, const Reconstruction& rec,
                         const LossConfig& cfg) {
  LossTerms t;
  for (std::size_t p = 0; p < pf.n_pixels(); ++p) {
    auto f = pf.features.row(p);
    auto fr = rec.properties.row(p);
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (cfg.distance == DistanceKind::l2) {
        const double d = f[k] - fr[k];
        t.property_term += d * d;
      } else {
        t.property_term -= f[k] * std::log(std::max(fr[k], kCrossEntropyClamp));
      }
    }
    const double dx = pf.coords(p, 0) - rec.coords(p, 0);
    const double dy = pf.coords(p, 1) - rec.coords(p, 1);
    t.coordinate_term += std::sqrt(dx * dx + dy * dy);
  }
  t.coordinate_term *= cfg.m_weight / cfg.sampling_interval;
  return t;
}

void check_config(const LossConfig& cfg) {
  if (!(cfg.sampling_interval > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "loss: sampling interval must be > 0");
  }
  if (!std::isfinite(cfg.m_weight)) {
    throw Error(ErrorCode::invalid_argument, "loss: m_weight must be finite");
  }
}

void check_distribution(const Reconstruction& rec) {
  for (std::size_t p = 0; p < rec.properties.rows(); ++p) {
    double total = 0.0;
    for (double v : rec.properties.row(p)) {
      if (v < -1e-9) {
        throw Error(ErrorCode::invalid_argument,
                    "cross-entropy: reconstructed property of pixel " +
                        std::to_string(p) + " has a negative entry");
      }
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-6) {
      throw Error(ErrorCode::invalid_argument,
                  "cross-entropy: reconstructed property of pixel " + std::to_string(p) +
                      " is not a distribution (sums to " + std::to_string(total) + ")");
    }
  }
}

}  // namespace

Centroids aggregate(const PixelField& pf, const AssignmentMap& a) {
  check_shapes(pf, a);
  auto w = superpixel_weights(a);
  for (std::size_t s = 0; s < w.size(); ++s) {
    if (!(w[s] > 0.0)) {
      throw Error(ErrorCode::invalid_argument,
                  "aggregate: superpixel " + std::to_string(s) + " has zero total weight");
    }
  }
  return {pool(pf.features, a, w), pool(pf.coords, a, w)};
}

Reconstruction reconstruct(const Centroids& centroids, const AssignmentMap& a) {
  if (centroids.properties.rows() != a.n_superpixels() ||
      centroids.coords.rows() != a.n_superpixels() || centroids.coords.cols() != 2) {
    throw Error(ErrorCode::dimension_mismatch, "reconstruct: centroid shapes do not match");
  }
  return {mix(centroids.properties, a), mix(centroids.coords, a)};
}

LossTerms loss(const PixelField& pf, const AssignmentMap& a, const LossConfig& cfg) {
  check_config(cfg);
  Reconstruction rec = reconstruct(aggregate(pf, a), a);
  if (cfg.distance == DistanceKind::cross_entropy) check_distribution(rec);
  return loss_unchecked(pf, rec, cfg);
}

std::vector<double> loss_gradient(const PixelField& pf, const AssignmentMap& a,
                                  const LossConfig& cfg) {
  check_config(cfg);
  const Centroids cen = aggregate(pf, a);
  const Reconstruction rec = reconstruct(cen, a);
  const auto w = superpixel_weights(a);
  const std::size_t np = pf.n_pixels();
  const std::size_t kf = pf.n_features();

  // g(p) = ∂E/∂f'(p), h(p) = ∂(coordinate term)/∂c'(p).
  MatrixD g(np, kf);
  MatrixD h(np, 2);
  const double coord_scale = cfg.m_weight / cfg.sampling_interval;
  for (std::size_t p = 0; p < np; ++p) {
    for (std::size_t k = 0; k < kf; ++k) {
      const double f = pf.features(p, k);
      const double fr = rec.properties(p, k);
      if (cfg.distance == DistanceKind::l2) {
        g(p, k) = 2.0 * (fr - f);
      } else {
        g(p, k) = fr > kCrossEntropyClamp ? -f / fr : 0.0;
      }
    }
    const double dx = rec.coords(p, 0) - pf.coords(p, 0);
    const double dy = rec.coords(p, 1) - pf.coords(p, 1);
    const double norm = std::sqrt(dx * dx + dy * dy);
    if (norm > 0.0) {
      h(p, 0) = coord_scale * dx / norm;
      h(p, 1) = coord_scale * dy / norm;
    }
  }

  // G_s = Σ_p g(p) q_s(p): sensitivity of the loss to centroid u_s.
  MatrixD gs(a.n_superpixels(), kf);
  MatrixD hs(a.n_superpixels(), 2);
  for (std::size_t p = 0; p < np; ++p) {
    auto ids = a.neighbours(p);
    auto q = a.probs(p);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t k = 0; k < kf; ++k) gs(ids[i], k) += g(p, k) * q[i];
      for (std::size_t k = 0; k < 2; ++k) hs(ids[i], k) += h(p, k) * q[i];
    }
  }

  std::vector<double> grad(a.entry_count(), 0.0);
  for (std::size_t p = 0; p < np; ++p) {
    auto ids = a.neighbours(p);
    const std::size_t base = a.offsets()[p];
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const std::size_t s = ids[i];
      double d = 0.0;
      for (std::size_t k = 0; k < kf; ++k) {
        d += g(p, k) * cen.properties(s, k);
        d += gs(s, k) * (pf.features(p, k) - cen.properties(s, k)) / w[s];
      }
      for (std::size_t k = 0; k < 2; ++k) {
        d += h(p, k) * cen.coords(s, k);
        d += hs(s, k) * (pf.coords(p, k) - cen.coords(s, k)) / w[s];
      }
      grad[base + i] = d;
    }
  }
  return grad;
}

double fd_gradient_check(const PixelField& pf, const AssignmentMap& a,
                         const LossConfig& cfg, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::invalid_argument, "gradient check: step must be > 0");
  loss(pf, a, cfg);  // validates the base point
  const auto analytic = loss_gradient(pf, a, cfg);
  std::vector<double> q(a.all_probs().begin(), a.all_probs().end());
  auto eval = [&](const std::vector<double>& probs) {
    AssignmentMap moved = a.with_probs(probs);
    Reconstruction rec = reconstruct(aggregate_unchecked(pf, moved), moved);
    return loss_unchecked(pf, rec, cfg).total();
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double orig = q[i];
    q[i] = orig + h;
    const double up = eval(q);
    q[i] = orig - h;
    const double down = eval(q);
    q[i] = orig;
    const double numeric = (up - down) / (2.0 * h);
    worst = std::max(worst, std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric)));
  }
  return worst;
}

}  // namespace tinit
