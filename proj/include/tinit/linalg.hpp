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

#include <cmath>
#include <concepts>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tinit/error.hpp"

namespace tinit {

template <typename T>
concept Real = std::same_as<T, float> || std::same_as<T, double>;

/// Dense row-major matrix. Values are owned; copies are deep.
template <Real T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{0})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw Error(ErrorCode::dimension_mismatch,
                  "matrix payload has " + std::to_string(data_.size()) +
                      " values, expected " + std::to_string(rows_ * cols_));
    }
  }
  Matrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) {
        throw Error(ErrorCode::dimension_mismatch, "ragged matrix literal");
      }
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  template <Real U>
  Matrix<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Matrix<U>(rows_, cols_, std::move(out));
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using MatrixF = Matrix<float>;
using MatrixD = Matrix<double>;

/// Row-major product; each output entry accumulates left to right over the
/// shared dimension. Rows may be computed on separate workers.
template <Real T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b);

template <Real T>
Matrix<T> transpose(const Matrix<T>& a);

/// Largest absolute entry of a - b.
template <Real T>
double max_abs_diff(const Matrix<T>& a, const Matrix<T>& b);

template <Real T>
bool all_finite(const Matrix<T>& a);

constexpr double kDefaultCondLimit = 1e8;

/// Cholesky factor L (lower triangular, A = L Lᵀ) of a symmetric positive
/// definite matrix. Throws ill_conditioned when a pivot is not positive.
template <Real T>
Matrix<T> cholesky(const Matrix<T>& spd);

/// Right inverse R = Aᵀ(AAᵀ)⁻¹ with A·R = I, for a with rows <= cols.
///
/// The Gram matrix AAᵀ is Cholesky-factored and each column of (AAᵀ)⁻¹ is
/// obtained by a forward/back substitution. The condition estimate is
/// (max Lᵢᵢ / min Lᵢᵢ)², an estimate for cond(AAᵀ); inputs whose estimate
/// exceeds cond_limit are rejected as rank deficient. The 32-bit overload
/// factors in double and rounds the result once.
template <Real T>
Matrix<T> right_inverse(const Matrix<T>& a,
                        double cond_limit = kDefaultCondLimit);

}  // namespace tinit
