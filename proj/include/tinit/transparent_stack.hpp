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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tinit/activation.hpp"
#include "tinit/affine.hpp"

namespace tinit {

/// How the activation sits between widened layers.
enum class Wrapper {
  /// Unwidened layers with σ applied elementwise between them (baselines and
  /// activation-free chains).
  none,
  /// Each hidden layer emits (v, −v); σ is applied to both halves and the
  /// next layer subtracts them, scaled by 1/c.
  sign_split,
  /// Each hidden layer emits (v, −v) = (x0, x1); the activation block
  /// outputs (σ(x0), σ(x0) + x1) and the next layer subtracts. Works for any σ.
  general,
};

std::string_view to_string(Wrapper w);

/// A stack of affine layers with activations between consecutive layers
/// (none after the last). Parameters are free after construction; only the
/// initial values encode the identity.
template <Real T>
struct TransparentStack {
  std::vector<AffineTransform<T>> layers;
  Activation activation;
  Wrapper wrapper = Wrapper::none;
  std::vector<std::size_t> base_dims;

  std::size_t in_dim() const { return layers.front().in_dim(); }
  std::size_t out_dim() const { return layers.back().out_dim(); }
  std::size_t parameter_count() const;
};

/// Widens an identity chain so the stack stays the identity through a
/// sign-split recoverable activation. First layer [A₁ | −A₁], (b₁, −b₁);
/// middle layers (1/c)[[Aᵢ, −Aᵢ], [−Aᵢ, Aᵢ]], (bᵢ, −bᵢ); last layer
/// (1/c)[[A_k], [−A_k]], b_k. With ActivationKind::none the chain is used
/// as is.
template <Real T>
TransparentStack<T> build_transparent_stack(std::span<const AffineTransform<T>> chain,
                                            const Activation& activation);

/// Same widened layers, evaluated with the general activation block, so the
/// identity holds for an arbitrary σ.
template <Real T>
TransparentStack<T> build_general_stack(std::span<const AffineTransform<T>> chain,
                                        const Activation& activation);

/// Row-wise evaluation of a batch (rows are samples).
template <Real T>
Matrix<T> forward(const TransparentStack<T>& stack, const Matrix<T>& batch);

enum class BaselineKind { random, xavier, net2net };

std::string_view to_string(BaselineKind k);
BaselineKind parse_baseline_kind(std::string_view s);

/// Conventional initializers over unwidened layers dims[i] -> dims[i+1]:
///   random   U(±1/sqrt(fan_in)) weights
///   xavier   U(±sqrt(6/(fan_in + fan_out))) weights
///   net2net  identity weights; every layer must be square
/// Biases start at zero for all three.
template <Real T>
TransparentStack<T> baseline_init(BaselineKind kind,
                                  std::span<const std::size_t> dims,
                                  std::uint64_t seed,
                                  const Activation& activation);

/// Percentage of weight and bias entries with |v| > eps.
template <Real T>
double init_rate(const TransparentStack<T>& stack, double eps);

/// Percentage of output entries with |out − in| < eps.
template <Real T>
double recovery_rate(const TransparentStack<T>& stack, const Matrix<T>& inputs,
                     double eps);

struct InputRange {
  double lo = -1.0;
  double hi = 1.0;
};

/// max |forward(x) − x| over `samples` uniform rows per range.
template <Real T>
std::vector<double> stability_sweep(const TransparentStack<T>& stack,
                                    std::span<const InputRange> ranges,
                                    std::size_t samples, std::uint64_t seed);

/// Writes the layers in the chain container and a JSON sidecar with the
/// activation, wrapper, base dims and any extra fields in `meta_json`.
template <Real T>
void save_stack(const std::filesystem::path& layers_path,
                const std::filesystem::path& sidecar_path,
                const TransparentStack<T>& stack,
                const std::string& meta_json = "{}");

}  // namespace tinit
