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

#include "tinit/activation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

namespace tinit {

namespace {

// soft_relu and log_sigmoid are split into an odd piece and the shared even
// piece log1p(e^-|x|); the even piece cancels exactly in σ(x) − σ(−x).
template <typename T>
T evaluate(const Activation& a, T x) {
  switch (a.kind) {
    case ActivationKind::none:
      return x;
    case ActivationKind::relu:
      return x > T{0} ? x : T{0};
    case ActivationKind::leaky_relu:
      return x >= T{0} ? x : static_cast<T>(a.delta) * x;
    case ActivationKind::soft_relu:
      return std::max(x, T{0}) + std::log1p(std::exp(-std::abs(x)));
    case ActivationKind::log_sigmoid:
      return std::min(x, T{0}) - std::log1p(std::exp(-std::abs(x)));
    case ActivationKind::tanh:
      return std::tanh(x);
    case ActivationKind::sigmoid:
      return T{1} / (T{1} + std::exp(-x));
    case ActivationKind::cube:
      return x * x * x;
    case ActivationKind::zero:
      return T{0};
    case ActivationKind::custom:
      if (!a.fn) throw Error(ErrorCode::invalid_argument, "custom activation without a function");
      return static_cast<T>(a.fn(static_cast<double>(x)));
  }
  return x;
}

constexpr std::array<std::pair<ActivationKind, std::string_view>, 10> kNames{{
    {ActivationKind::none, "none"},
    {ActivationKind::relu, "relu"},
    {ActivationKind::leaky_relu, "leaky_relu"},
    {ActivationKind::soft_relu, "soft_relu"},
    {ActivationKind::log_sigmoid, "log_sigmoid"},
    {ActivationKind::tanh, "tanh"},
    {ActivationKind::sigmoid, "sigmoid"},
    {ActivationKind::cube, "cube"},
    {ActivationKind::zero, "zero"},
    {ActivationKind::custom, "custom"},
}};

}  // namespace

double Activation::operator()(double x) const { return evaluate(*this, x); }
float Activation::operator()(float x) const { return evaluate(*this, x); }

std::optional<double> Activation::recovery_constant() const {
  switch (kind) {
    case ActivationKind::relu:
    case ActivationKind::soft_relu:
    case ActivationKind::log_sigmoid:
      return 1.0;
    case ActivationKind::leaky_relu:
      return 1.0 + delta;
    default:
      return std::nullopt;
  }
}

std::string Activation::name() const {
  if (kind == ActivationKind::custom) return custom_name.empty() ? "custom" : custom_name;
  return std::string(to_string(kind));
}

std::string_view to_string(ActivationKind k) {
  for (const auto& [kind, name] : kNames) {
    if (kind == k) return name;
  }
  return "unknown";
}

ActivationKind parse_activation_kind(std::string_view s) {
  for (const auto& [kind, name] : kNames) {
    if (name == s && kind != ActivationKind::custom) return kind;
  }
  throw Error(ErrorCode::invalid_argument,
              "unknown activation '" + std::string(s) + "'");
}

}  // namespace tinit
