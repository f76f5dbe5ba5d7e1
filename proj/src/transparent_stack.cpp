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

#include "tinit/transparent_stack.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "tinit/parallel.hpp"

namespace tinit {

namespace {

template <Real T>
void check_chain(std::span<const AffineTransform<T>> chain) {
  if (chain.size() < 2) {
    throw Error(ErrorCode::invalid_argument,
                "transparent stack needs a chain of at least two transforms");
  }
  for (std::size_t i = 1; i < chain.size(); ++i) {
    if (chain[i - 1].out_dim() != chain[i].in_dim()) {
      throw Error(ErrorCode::dimension_mismatch,
                  "chain transform " + std::to_string(i) + " expects " +
                      std::to_string(chain[i].in_dim()) + " inputs, previous emits " +
                      std::to_string(chain[i - 1].out_dim()));
    }
  }
  if (chain.front().in_dim() != chain.back().out_dim()) {
    throw Error(ErrorCode::dimension_mismatch,
                "chain input and output widths differ");
  }
}

template <Real T>
std::vector<std::size_t> chain_dims(std::span<const AffineTransform<T>> chain) {
  std::vector<std::size_t> d{chain.front().in_dim()};
  for (const auto& t : chain) d.push_back(t.out_dim());
  return d;
}

template <Real T>
std::vector<AffineTransform<T>> widen(std::span<const AffineTransform<T>> chain,
                                      double c) {
  const T s = static_cast<T>(1.0 / c);
  const std::size_t k = chain.size();
  std::vector<AffineTransform<T>> layers;
  layers.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& a = chain[i].weight;
    const auto& b = chain[i].bias;
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    const bool first = i == 0;
    const bool last = i + 1 == k;
    const std::size_t rows = first ? m : 2 * m;
    const std::size_t cols = last ? n : 2 * n;
    const T scale = first ? T{1} : s;
    Matrix<T> w(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      // Row r < m reads +A, the mirrored half (second input block) reads −A.
      const std::size_t ar = r % m;
      const T row_sign = r < m ? T{1} : T{-1};
      for (std::size_t col = 0; col < cols; ++col) {
        const std::size_t ac = col % n;
        const T col_sign = col < n ? T{1} : T{-1};
        w(r, col) = scale * row_sign * col_sign * a(ar, ac);
      }
    }
    std::vector<T> bias(cols);
    for (std::size_t col = 0; col < cols; ++col) {
      bias[col] = col < n ? b[col] : -b[col - n];
    }
    layers.emplace_back(std::move(w), std::move(bias));
  }
  return layers;
}

template <Real T>
void activate(const TransparentStack<T>& stack, Matrix<T>& x) {
  if (stack.activation.kind == ActivationKind::none) return;
  const Activation& act = stack.activation;
  if (stack.wrapper != Wrapper::general) {
    parallel_for(x.rows(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t r = begin; r < end; ++r) activation_apply(act, x.row(r));
    });
    return;
  }
  const std::size_t half = x.cols() / 2;
  parallel_for(x.rows(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      auto row = x.row(r);
      for (std::size_t j = 0; j < half; ++j) {
        const T s = act(row[j]);
        row[j] = s;
        row[half + j] = s + row[half + j];
      }
    }
  });
}

}  // namespace

std::string_view to_string(Wrapper w) {
  switch (w) {
    case Wrapper::none: return "none";
    case Wrapper::sign_split: return "sign_split";
    case Wrapper::general: return "general";
  }
  return "unknown";
}

std::string_view to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::random: return "random";
    case BaselineKind::xavier: return "xavier";
    case BaselineKind::net2net: return "net2net";
  }
  return "unknown";
}

BaselineKind parse_baseline_kind(std::string_view s) {
  if (s == "random") return BaselineKind::random;
  if (s == "xavier") return BaselineKind::xavier;
  if (s == "net2net") return BaselineKind::net2net;
  throw Error(ErrorCode::invalid_argument, "unknown baseline '" + std::string(s) + "'");
}

template <Real T>
std::size_t TransparentStack<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

template <Real T>
TransparentStack<T> build_transparent_stack(std::span<const AffineTransform<T>> chain,
                                            const Activation& activation) {
  check_chain(chain);
  TransparentStack<T> stack;
  stack.activation = activation;
  stack.base_dims = chain_dims(chain);
  if (activation.kind == ActivationKind::none) {
    stack.layers.assign(chain.begin(), chain.end());
    stack.wrapper = Wrapper::none;
    return stack;
  }
  const auto c = activation.recovery_constant();
  if (!c) {
    throw Error(ErrorCode::invalid_argument,
                "activation '" + activation.name() +
                    "' has no constant c with s(x) - s(-x) = c*x; use the general wrapper");
  }
  stack.layers = widen(chain, *c);
  stack.wrapper = Wrapper::sign_split;
  return stack;
}

template <Real T>
TransparentStack<T> build_general_stack(std::span<const AffineTransform<T>> chain,
                                        const Activation& activation) {
  check_chain(chain);
  TransparentStack<T> stack;
  stack.activation = activation;
  stack.base_dims = chain_dims(chain);
  stack.layers = widen(chain, 1.0);
  stack.wrapper = Wrapper::general;
  return stack;
}

template <Real T>
Matrix<T> forward(const TransparentStack<T>& stack, const Matrix<T>& batch) {
  if (stack.layers.empty()) {
    throw Error(ErrorCode::invalid_argument, "forward: stack has no layers");
  }
  if (batch.cols() != stack.in_dim()) {
    throw Error(ErrorCode::dimension_mismatch,
                "forward: batch has " + std::to_string(batch.cols()) +
                    " columns, stack expects " + std::to_string(stack.in_dim()));
  }
  Matrix<T> x = apply_rows(stack.layers.front(), batch);
  for (std::size_t i = 1; i < stack.layers.size(); ++i) {
    activate(stack, x);
    x = apply_rows(stack.layers[i], x);
  }
  return x;
}

template <Real T>
TransparentStack<T> baseline_init(BaselineKind kind,
                                  std::span<const std::size_t> dims,
                                  std::uint64_t seed,
                                  const Activation& activation) {
  if (dims.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "baseline needs at least one layer");
  }
  if (kind == BaselineKind::net2net &&
      std::adjacent_find(dims.begin(), dims.end(), std::not_equal_to<>()) != dims.end()) {
    throw Error(ErrorCode::invalid_argument,
                "net2net: square layers required (all widths equal)");
  }
  TransparentStack<T> stack;
  stack.activation = activation;
  stack.wrapper = Wrapper::none;
  stack.base_dims.assign(dims.begin(), dims.end());
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const std::size_t fan_in = dims[i];
    const std::size_t fan_out = dims[i + 1];
    Matrix<T> w;
    if (kind == BaselineKind::net2net) {
      w = Matrix<T>::identity(fan_in);
    } else {
      const double bound = kind == BaselineKind::random
                               ? 1.0 / std::sqrt(static_cast<double>(fan_in))
                               : std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      w = sample_matrix<T>(fan_in, fan_out,
                           {derive_seed(seed, 0xBA5E, i), Distribution::uniform(-bound, bound)});
    }
    stack.layers.emplace_back(std::move(w), std::vector<T>(fan_out, T{0}));
  }
  return stack;
}

template <Real T>
double init_rate(const TransparentStack<T>& stack, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::invalid_argument, "init_rate: eps must be > 0");
  std::size_t total = 0;
  std::size_t above = 0;
  auto count = [&](T v) {
    ++total;
    if (std::abs(static_cast<double>(v)) > eps) ++above;
  };
  for (const auto& l : stack.layers) {
    for (T v : l.weight.values()) count(v);
    for (T v : l.bias) count(v);
  }
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(above) / static_cast<double>(total);
}

template <Real T>
double recovery_rate(const TransparentStack<T>& stack, const Matrix<T>& inputs,
                     double eps) {
  if (!(eps > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "recovery_rate: eps must be > 0");
  }
  Matrix<T> out = forward(stack, inputs);
  if (out.cols() != inputs.cols()) {
    throw Error(ErrorCode::dimension_mismatch,
                "recovery_rate: stack output width differs from input width");
  }
  if (inputs.empty()) return 0.0;
  std::size_t hits = 0;
  auto a = out.values();
  auto b = inputs.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])) < eps) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(a.size());
}

template <Real T>
std::vector<double> stability_sweep(const TransparentStack<T>& stack,
                                    std::span<const InputRange> ranges,
                                    std::size_t samples, std::uint64_t seed) {
  std::vector<double> errors;
  errors.reserve(ranges.size());
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    const auto& r = ranges[i];
    Matrix<T> x = sample_matrix<T>(samples, stack.in_dim(),
                                   {derive_seed(seed, 0x57AB, i),
                                    Distribution::uniform(r.lo, r.hi)});
    errors.push_back(max_abs_diff(forward(stack, x), x));
  }
  return errors;
}

template <Real T>
void save_stack(const std::filesystem::path& layers_path,
                const std::filesystem::path& sidecar_path,
                const TransparentStack<T>& stack, const std::string& meta_json) {
  save_chain<T>(layers_path, stack.layers);
  nlohmann::ordered_json side = nlohmann::ordered_json::parse(meta_json);
  side["precision"] = sizeof(T) * 8;
  side["activation"] = stack.activation.name();
  if (stack.activation.kind == ActivationKind::leaky_relu) {
    side["leaky_relu_delta"] = stack.activation.delta;
  }
  side["wrapper"] = std::string(to_string(stack.wrapper));
  side["base_dims"] = stack.base_dims;
  std::ofstream out(sidecar_path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + sidecar_path.string());
  out << side.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::io, "write failed for " + sidecar_path.string());
}

#define TINIT_INSTANTIATE(T)                                                             \
  template struct TransparentStack<T>;                                                   \
  template TransparentStack<T> build_transparent_stack(                                  \
      std::span<const AffineTransform<T>>, const Activation&);                          \
  template TransparentStack<T> build_general_stack(std::span<const AffineTransform<T>>, \
                                                   const Activation&);                   \
  template Matrix<T> forward(const TransparentStack<T>&, const Matrix<T>&);             \
  template TransparentStack<T> baseline_init(BaselineKind, std::span<const std::size_t>, \
                                             std::uint64_t, const Activation&);          \
  template double init_rate(const TransparentStack<T>&, double);                        \
  template double recovery_rate(const TransparentStack<T>&, const Matrix<T>&, double);  \
  template std::vector<double> stability_sweep(const TransparentStack<T>&,              \
                                               std::span<const InputRange>, std::size_t, \
                                               std::uint64_t);                           \
  template void save_stack(const std::filesystem::path&, const std::filesystem::path&,  \
                           const TransparentStack<T>&, const std::string&);

TINIT_INSTANTIATE(float)
TINIT_INSTANTIATE(double)

#undef TINIT_INSTANTIATE

}  // namespace tinit
