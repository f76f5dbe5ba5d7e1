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

#include "tinit/affine.hpp"

#include <fstream>
#include <sstream>
#include <type_traits>

#include "tinit/io.hpp"
#include "tinit/parallel.hpp"

namespace tinit {

template <Real T>
Matrix<T> AffineTransform<T>::homogeneous() const {
  const std::size_t m = in_dim();
  const std::size_t n = out_dim();
  Matrix<T> h(m + 1, n + 1);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) h(i, j) = weight(i, j);
  for (std::size_t j = 0; j < n; ++j) h(m, j) = bias[j];
  h(m, n) = T{1};
  return h;
}

template <Real T>
std::vector<T> apply(const AffineTransform<T>& t, std::span<const T> x) {
  if (x.size() != t.in_dim()) {
    throw Error(ErrorCode::dimension_mismatch,
                "apply: input length " + std::to_string(x.size()) +
                    ", transform expects " + std::to_string(t.in_dim()));
  }
  std::vector<T> y(t.out_dim(), T{0});
  for (std::size_t k = 0; k < x.size(); ++k) {
    auto w = t.weight.row(k);
    for (std::size_t j = 0; j < y.size(); ++j) y[j] += x[k] * w[j];
  }
  for (std::size_t j = 0; j < y.size(); ++j) y[j] += t.bias[j];
  return y;
}

template <Real T>
Matrix<T> apply_rows(const AffineTransform<T>& t, const Matrix<T>& batch) {
  if (batch.cols() != t.in_dim()) {
    throw Error(ErrorCode::dimension_mismatch,
                "apply_rows: batch has " + std::to_string(batch.cols()) +
                    " columns, transform expects " + std::to_string(t.in_dim()));
  }
  Matrix<T> out = matmul(batch, t.weight);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += t.bias[j];
  }
  return out;
}

template <Real T>
AffineTransform<T> compose(const AffineTransform<T>& t1,
                           const AffineTransform<T>& t2) {
  if (t1.out_dim() != t2.in_dim()) {
    throw Error(ErrorCode::dimension_mismatch,
                "compose: first transform outputs " +
                    std::to_string(t1.out_dim()) + ", second expects " +
                    std::to_string(t2.in_dim()));
  }
  Matrix<T> w = matmul(t1.weight, t2.weight);
  std::vector<T> b = apply(t2, std::span<const T>(t1.bias));
  return {std::move(w), std::move(b)};
}

template <Real T>
AffineTransform<T> affine_right_inverse(const AffineTransform<T>& t,
                                        double cond_limit) {
  Matrix<T> r = right_inverse(t.weight, cond_limit);
  std::vector<T> b(r.cols(), T{0});
  for (std::size_t k = 0; k < t.bias.size(); ++k) {
    auto rk = r.row(k);
    for (std::size_t j = 0; j < b.size(); ++j) b[j] -= t.bias[k] * rk[j];
  }
  return {std::move(r), std::move(b)};
}

template <Real T>
AffineTransform<T> compose_all(std::span<const AffineTransform<T>> chain) {
  if (chain.empty()) {
    throw Error(ErrorCode::invalid_argument, "compose_all: empty chain");
  }
  AffineTransform<T> acc = chain.front();
  for (std::size_t i = 1; i < chain.size(); ++i) acc = compose(acc, chain[i]);
  return acc;
}

std::vector<std::string> validate_chain_spec(const ChainSpec& spec) {
  std::vector<std::string> diag;
  const auto& d = spec.dims;
  if (d.size() < 3) {
    diag.push_back("identity chain needs at least two transforms (k >= 2), got dims of length " +
                   std::to_string(d.size()));
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] == 0) diag.push_back("dimension m" + std::to_string(i) + " is zero");
  }
  if (d.size() >= 2 && d.front() != d.back()) {
    diag.push_back("identity chain requires m0 == mk (got " +
                   std::to_string(d.front()) + " and " + std::to_string(d.back()) + ")");
  }
  for (std::size_t i = 1; i + 1 < d.size(); ++i) {
    if (d[i] < d.front()) {
      diag.push_back("intermediate width m" + std::to_string(i) + " = " +
                     std::to_string(d[i]) + " is below m0 = " +
                     std::to_string(d.front()) +
                     "; a right inverse of the composed chain exists only when every m_i >= m0");
    }
  }
  if (!(spec.bias_variance >= 0.0)) diag.push_back("bias variance must be >= 0");
  if (!(spec.cond_limit > 1.0)) diag.push_back("condition limit must be > 1");
  return diag;
}

std::uint64_t chain_layer_seed(std::uint64_t base, std::size_t layer,
                               int attempt, bool bias) {
  return derive_seed(base, static_cast<std::uint64_t>(attempt),
                     2 * static_cast<std::uint64_t>(layer) + (bias ? 1 : 0));
}

namespace {

template <Real T>
AffineTransform<T> cast_transform(const AffineTransform<double>& t) {
  if constexpr (std::is_same_v<T, double>) {
    return t;
  } else {
    return {t.weight.cast<T>(), std::vector<T>(t.bias.begin(), t.bias.end())};
  }
}

}  // namespace

// Construction always runs in double; a float chain is the rounding of the
// double one.
template <Real T>
std::vector<AffineTransform<T>> build_identity_chain(const ChainSpec& spec) {
  if (auto diag = validate_chain_spec(spec); !diag.empty()) {
    throw Error(ErrorCode::invalid_argument, "invalid chain spec: " + diag.front());
  }
  const auto& d = spec.dims;
  const std::size_t k = d.size() - 1;
  std::string last_error;
  for (int attempt = 0; attempt <= kChainRetries; ++attempt) {
    std::vector<AffineTransform<double>> chain;
    chain.reserve(k);
    for (std::size_t i = 0; i + 1 < k; ++i) {
      const double var = 1.0 / static_cast<double>(d[i]);
      MatrixD w = sample_matrix<double>(
          d[i], d[i + 1],
          {chain_layer_seed(spec.seed, i, attempt, false), Distribution::normal(0.0, var)});
      std::vector<double> b(d[i + 1], 0.0);
      if (spec.bias_variance > 0.0) {
        MatrixD bm = sample_matrix<double>(
            1, d[i + 1],
            {chain_layer_seed(spec.seed, i, attempt, true),
             Distribution::normal(0.0, spec.bias_variance)});
        b.assign(bm.values().begin(), bm.values().end());
      }
      chain.emplace_back(std::move(w), std::move(b));
    }
    try {
      AffineTransform<double> prefix = compose_all<double>(chain);
      chain.push_back(affine_right_inverse(prefix, spec.cond_limit));
      std::vector<AffineTransform<T>> out;
      out.reserve(chain.size());
      for (const auto& t : chain) out.push_back(cast_transform<T>(t));
      return out;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ill_conditioned) throw;
      last_error = e.what();
    }
  }
  throw Error(ErrorCode::ill_conditioned,
              "identity chain stayed ill-conditioned after " +
                  std::to_string(kChainRetries) + " resamples: " + last_error);
}

template <Real T>
void save_chain(const std::filesystem::path& path,
                std::span<const AffineTransform<T>> chain) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  const auto n = static_cast<std::uint32_t>(chain.size());
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((n >> (8 * i)) & 0xFF));
  for (const auto& t : chain) {
    write_matrix(out, t.weight);
    write_matrix(out, Matrix<T>(1, t.bias.size(), t.bias));
  }
  out.flush();
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

template <Real T>
std::vector<AffineTransform<T>> load_chain(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  unsigned char b[4] = {};
  in.read(reinterpret_cast<char*>(b), 4);
  if (in.gcount() != 4) throw Error(ErrorCode::format, "truncated chain file");
  const std::uint32_t n = b[0] | (b[1] << 8) | (b[2] << 16) |
                          (static_cast<std::uint32_t>(b[3]) << 24);
  std::vector<AffineTransform<T>> chain;
  chain.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    Matrix<T> w = read_matrix_as<T>(in);
    Matrix<T> bias = read_matrix_as<T>(in);
    if (bias.rows() != 1) {
      throw Error(ErrorCode::format, "chain bias record must be a single row");
    }
    chain.emplace_back(std::move(w),
                       std::vector<T>(bias.values().begin(), bias.values().end()));
  }
  return chain;
}

#define TINIT_INSTANTIATE(T)                                                          \
  template struct AffineTransform<T>;                                                 \
  template std::vector<T> apply(const AffineTransform<T>&, std::span<const T>);       \
  template Matrix<T> apply_rows(const AffineTransform<T>&, const Matrix<T>&);         \
  template AffineTransform<T> compose(const AffineTransform<T>&,                      \
                                      const AffineTransform<T>&);                     \
  template AffineTransform<T> affine_right_inverse(const AffineTransform<T>&, double); \
  template AffineTransform<T> compose_all(std::span<const AffineTransform<T>>);       \
  template std::vector<AffineTransform<T>> build_identity_chain(const ChainSpec&);    \
  template void save_chain(const std::filesystem::path&,                              \
                           std::span<const AffineTransform<T>>);                      \
  template std::vector<AffineTransform<T>> load_chain(const std::filesystem::path&);

TINIT_INSTANTIATE(float)
TINIT_INSTANTIATE(double)

#undef TINIT_INSTANTIATE

}  // namespace tinit
