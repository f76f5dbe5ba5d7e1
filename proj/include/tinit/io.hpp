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

// Binary containers, all little-endian:
//
//   MTRX  "MTRX" u8 precision(4|8) u32 rows u32 cols  payload rows*cols
//   SPXL  "SPXL" u32 height u32 width                 payload u32 ids
//   LGTS  "LGTS" u32 n_labels u32 height u32 width    payload f32 values
//
// A file may hold several MTRX records back to back (affine chains do).

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>

#include "tinit/label_map.hpp"
#include "tinit/linalg.hpp"

namespace tinit {

using AnyMatrix = std::variant<MatrixF, MatrixD>;

template <Real T>
void write_matrix(std::ostream& os, const Matrix<T>& m);
/// Reads one MTRX record in its stored precision.
AnyMatrix read_matrix(std::istream& is);
/// Reads one MTRX record and converts it to T.
template <Real T>
Matrix<T> read_matrix_as(std::istream& is);

template <Real T>
void save_matrix(const std::filesystem::path& path, const Matrix<T>& m);
AnyMatrix load_matrix(const std::filesystem::path& path);
template <Real T>
Matrix<T> load_matrix_as(const std::filesystem::path& path);

/// Plain CSV: one matrix row per line, comma separated, no header.
/// Values are written with round-trip precision.
template <Real T>
void write_matrix_csv(std::ostream& os, const Matrix<T>& m);
MatrixD read_matrix_csv(std::istream& is);

void write_label_map(std::ostream& os, const LabelMap& map);
LabelMap read_label_map(std::istream& is);
void save_label_map(const std::filesystem::path& path, const LabelMap& map);
/// Accepts SPXL, or CSV when the extension is .csv.
LabelMap load_label_map(const std::filesystem::path& path);

void write_logits(std::ostream& os, const LogitTensor<float>& t);
LogitTensor<float> read_logits(std::istream& is);
void save_logits(const std::filesystem::path& path, const LogitTensor<float>& t);
/// Accepts LGTS, or CSV (N_l rows of N_p values, one-row height) for .csv.
LogitTensor<float> load_logits(const std::filesystem::path& path);

}  // namespace tinit
