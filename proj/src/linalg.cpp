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

#include "tinit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <type_traits>

#include "tinit/parallel.hpp"

namespace tinit {

namespace {

std::string shape(std::size_t r, std::size_t c) {
  std::ostringstream os;
  os << r << "x" << c;
  return os.str();
}

}  // namespace

template <Real T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::dimension_mismatch,
                "matmul: " + shape(a.rows(), a.cols()) + " times " +
                    shape(b.rows(), b.cols()));
  }
  Matrix<T> out(a.rows(), b.cols());
  const std::size_t inner = a.cols();
  const std::size_t n = b.cols();
  // i-k-j loop order: out(i, j) still accumulates over k in ascending order.
  parallel_for(a.rows(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto out_row = out.row(i);
      auto a_row = a.row(i);
      for (std::size_t k = 0; k < inner; ++k) {
        const T aik = a_row[k];
        auto b_row = b.row(k);
        for (std::size_t j = 0; j < n; ++j) out_row[j] += aik * b_row[j];
      }
    }
  }, 16);
  return out;
}

template <Real T>
Matrix<T> transpose(const Matrix<T>& a) {
  Matrix<T> out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

template <Real T>
double max_abs_diff(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::dimension_mismatch,
                "max_abs_diff: " + shape(a.rows(), a.cols()) + " vs " +
                    shape(b.rows(), b.cols()));
  }
  double worst = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(av[i]) -
                                     static_cast<double>(bv[i])));
  }
  return worst;
}

template <Real T>
bool all_finite(const Matrix<T>& a) {
  return std::all_of(a.values().begin(), a.values().end(),
                     [](T v) { return std::isfinite(v); });
}

template <Real T>
Matrix<T> cholesky(const Matrix<T>& spd) {
  if (spd.rows() != spd.cols()) {
    throw Error(ErrorCode::dimension_mismatch,
                "cholesky: matrix is " + shape(spd.rows(), spd.cols()));
  }
  const std::size_t n = spd.rows();
  Matrix<T> l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    T diag = spd(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > T{0}) || !std::isfinite(diag)) {
      throw Error(ErrorCode::ill_conditioned,
                  "cholesky: non-positive pivot at column " + std::to_string(j) +
                      " (matrix is singular or not positive definite)");
    }
    const T ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      T s = spd(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

template <Real T>
Matrix<T> right_inverse(const Matrix<T>& a, double cond_limit) {
  if constexpr (std::is_same_v<T, float>) {
    // Factor in double and round once.
    return right_inverse(a.template cast<double>(), cond_limit).template cast<float>();
  }
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m == 0 || m > n) {
    throw Error(ErrorCode::dimension_mismatch,
                "right_inverse needs 0 < rows <= cols, got " + shape(m, n));
  }
  if (!all_finite(a)) {
    throw Error(ErrorCode::invalid_argument, "right_inverse: non-finite input");
  }

  // Gram = A Aᵀ, symmetric; fill the lower triangle and mirror it.
  Matrix<T> gram(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    auto ri = a.row(i);
    for (std::size_t j = 0; j <= i; ++j) {
      auto rj = a.row(j);
      T s{0};
      for (std::size_t k = 0; k < n; ++k) s += ri[k] * rj[k];
      gram(i, j) = s;
      gram(j, i) = s;
    }
  }

  Matrix<T> l = cholesky(gram);
  T dmax = l(0, 0);
  T dmin = l(0, 0);
  for (std::size_t i = 1; i < m; ++i) {
    dmax = std::max(dmax, l(i, i));
    dmin = std::min(dmin, l(i, i));
  }
  const double ratio = static_cast<double>(dmax) / static_cast<double>(dmin);
  const double cond_estimate = ratio * ratio;
  if (!(cond_estimate <= cond_limit)) {
    std::ostringstream os;
    os << "right_inverse: Gram matrix condition estimate " << cond_estimate
       << " exceeds limit " << cond_limit << " (input is rank deficient)";
    throw Error(ErrorCode::ill_conditioned, os.str());
  }

  // Solve L Lᵀ g_j = e_j for every column j of G = (AAᵀ)⁻¹.
  Matrix<T> gram_inv(m, m);
  std::vector<T> y(m);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      T s = (i == j) ? T{1} : T{0};
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
      y[i] = s / l(i, i);
    }
    for (std::size_t ii = m; ii-- > 0;) {
      T s = y[ii];
      for (std::size_t k = ii + 1; k < m; ++k) s -= l(k, ii) * gram_inv(k, j);
      gram_inv(ii, j) = s / l(ii, ii);
    }
  }

  Matrix<T> r = matmul(transpose(a), gram_inv);
  if (!all_finite(r)) {
    throw Error(ErrorCode::ill_conditioned,
                "right_inverse produced non-finite values");
  }
  return r;
}

#define TINIT_INSTANTIATE(T)                                             \
  template Matrix<T> matmul(const Matrix<T>&, const Matrix<T>&);         \
  template Matrix<T> transpose(const Matrix<T>&);                        \
  template double max_abs_diff(const Matrix<T>&, const Matrix<T>&);      \
  template bool all_finite(const Matrix<T>&);                            \
  template Matrix<T> cholesky(const Matrix<T>&);                         \
  template Matrix<T> right_inverse(const Matrix<T>&, double);

TINIT_INSTANTIATE(float)
TINIT_INSTANTIATE(double)

#undef TINIT_INSTANTIATE

}  // namespace tinit
