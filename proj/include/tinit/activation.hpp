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

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "tinit/error.hpp"

namespace tinit {

enum class ActivationKind {
  none,         // no activation between layers
  relu,
  leaky_relu,   // slope delta on the negative side
  soft_relu,    // log(1 + e^x)
  log_sigmoid,  // log(1 / (1 + e^-x))
  tanh,
  sigmoid,
  cube,         // x^3
  zero,         // constant 0
  custom,       // caller-supplied function
};

/// An elementwise activation.
///
/// Kinds in {relu, leaky_relu, soft_relu, log_sigmoid} satisfy
/// σ(x) − σ(−x) = c·x and can sit inside a sign-split transparent stack;
/// everything else needs the general wrapper.
struct Activation {
  ActivationKind kind = ActivationKind::relu;
  double delta = 0.01;
  std::function<double(double)> fn;  // only for custom
  std::string custom_name;           // only for custom

  static Activation of(ActivationKind k, double delta = 0.01) {
    Activation a;
    a.kind = k;
    a.delta = delta;
    return a;
  }
  static Activation none() { return of(ActivationKind::none); }
  static Activation relu() { return of(ActivationKind::relu); }
  static Activation leaky_relu(double delta) {
    if (!(delta > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "leaky_relu slope must be > 0");
    }
    return of(ActivationKind::leaky_relu, delta);
  }
  static Activation soft_relu() { return of(ActivationKind::soft_relu); }
  static Activation log_sigmoid() { return of(ActivationKind::log_sigmoid); }
  static Activation custom(std::string name, std::function<double(double)> f) {
    Activation a = of(ActivationKind::custom, 0.0);
    a.fn = std::move(f);
    a.custom_name = std::move(name);
    return a;
  }

  double operator()(double x) const;
  float operator()(float x) const;

  /// The constant c with σ(x) − σ(−x) = c·x, when one exists.
  std::optional<double> recovery_constant() const;
  bool sign_split_recoverable() const { return recovery_constant().has_value(); }

  std::string name() const;
};

std::string_view to_string(ActivationKind k);
/// Parses "relu", "leaky_relu", "soft_relu", ... ; throws on unknown names.
ActivationKind parse_activation_kind(std::string_view s);

template <typename T>
void activation_apply(const Activation& a, std::span<T> x) {
  for (T& v : x) v = a(v);
}

}  // namespace tinit
