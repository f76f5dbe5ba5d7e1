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

#include "tinit/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <type_traits>
#include <variant>

namespace tinit {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b.data(), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b.data(), 8);
}

void read_exact(std::istream& is, char* dst, std::size_t n, const char* what) {
  is.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n) {
    throw Error(ErrorCode::format, std::string("truncated ") + what + " record");
  }
}

std::uint32_t get_u32(std::istream& is, const char* what) {
  std::array<unsigned char, 4> b{};
  read_exact(is, reinterpret_cast<char*>(b.data()), 4, what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& is, const char* what) {
  std::array<unsigned char, 8> b{};
  read_exact(is, reinterpret_cast<char*>(b.data()), 8, what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_value(std::ostream& os, float v) { put_u32(os, std::bit_cast<std::uint32_t>(v)); }
void put_value(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

void expect_magic(std::istream& is, const char (&magic)[5]) {
  std::array<char, 4> got{};
  read_exact(is, got.data(), 4, magic);
  if (std::memcmp(got.data(), magic, 4) != 0) {
    throw Error(ErrorCode::format, std::string("bad magic, expected ") + magic);
  }
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::invalid_argument,
                std::string(what) + " does not fit in u32");
  }
  return static_cast<std::uint32_t>(v);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  return out;
}

void finish(std::ostream& os, const std::filesystem::path& path) {
  os.flush();
  if (!os) throw Error(ErrorCode::io, "write failed for " + path.string());
}

bool is_csv(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  return ext == ".csv" || ext == ".CSV";
}

std::vector<std::vector<double>> parse_csv_rows(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t b = cell.find_first_not_of(" \t");
      std::size_t e = cell.find_last_not_of(" \t");
      if (b == std::string::npos) {
        throw Error(ErrorCode::format, "empty CSV cell");
      }
      cell = cell.substr(b, e - b + 1);
      try {
        std::size_t used = 0;
        double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        throw Error(ErrorCode::format, "bad CSV number '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::format, "ragged CSV rows");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

template <Real T>
void write_matrix(std::ostream& os, const Matrix<T>& m) {
  os.write("MTRX", 4);
  const char tag = static_cast<char>(sizeof(T));
  os.write(&tag, 1);
  put_u32(os, checked_u32(m.rows(), "rows"));
  put_u32(os, checked_u32(m.cols(), "cols"));
  for (T v : m.values()) put_value(os, v);
}

AnyMatrix read_matrix(std::istream& is) {
  expect_magic(is, "MTRX");
  char tag = 0;
  read_exact(is, &tag, 1, "MTRX");
  const std::uint32_t rows = get_u32(is, "MTRX");
  const std::uint32_t cols = get_u32(is, "MTRX");
  const std::size_t n = std::size_t{rows} * cols;
  if (tag == 4) {
    std::vector<float> data(n);
    for (auto& v : data) v = std::bit_cast<float>(get_u32(is, "MTRX"));
    return MatrixF(rows, cols, std::move(data));
  }
  if (tag == 8) {
    std::vector<double> data(n);
    for (auto& v : data) v = std::bit_cast<double>(get_u64(is, "MTRX"));
    return MatrixD(rows, cols, std::move(data));
  }
  throw Error(ErrorCode::format,
              "MTRX precision tag must be 4 or 8, got " + std::to_string(int(tag)));
}

template <Real T>
Matrix<T> read_matrix_as(std::istream& is) {
  return std::visit(
      [](auto&& m) -> Matrix<T> {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<typename M::value_type, T>) {
          return std::move(m);
        } else {
          return m.template cast<T>();
        }
      },
      read_matrix(is));
}

template <Real T>
void save_matrix(const std::filesystem::path& path, const Matrix<T>& m) {
  auto out = open_out(path);
  write_matrix(out, m);
  finish(out, path);
}

AnyMatrix load_matrix(const std::filesystem::path& path) {
  if (is_csv(path)) {
    auto in = open_in(path);
    return read_matrix_csv(in);
  }
  auto in = open_in(path);
  return read_matrix(in);
}

template <Real T>
Matrix<T> load_matrix_as(const std::filesystem::path& path) {
  if (is_csv(path)) {
    auto in = open_in(path);
    return read_matrix_csv(in).cast<T>();
  }
  auto in = open_in(path);
  return read_matrix_as<T>(in);
}

template <Real T>
void write_matrix_csv(std::ostream& os, const Matrix<T>& m) {
  std::array<char, 64> buf{};
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      auto res = std::to_chars(buf.data(), buf.data() + buf.size(), m(r, c));
      os.write(buf.data(), res.ptr - buf.data());
    }
    os << '\n';
  }
}

MatrixD read_matrix_csv(std::istream& is) {
  auto rows = parse_csv_rows(is);
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.front().size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (auto& row : rows) data.insert(data.end(), row.begin(), row.end());
  return MatrixD(r, c, std::move(data));
}

void write_label_map(std::ostream& os, const LabelMap& map) {
  os.write("SPXL", 4);
  put_u32(os, map.height);
  put_u32(os, map.width);
  for (std::uint32_t id : map.ids) put_u32(os, id);
}

LabelMap read_label_map(std::istream& is) {
  expect_magic(is, "SPXL");
  const std::uint32_t h = get_u32(is, "SPXL");
  const std::uint32_t w = get_u32(is, "SPXL");
  std::vector<std::uint32_t> ids(std::size_t{h} * w);
  for (auto& id : ids) id = get_u32(is, "SPXL");
  return LabelMap(h, w, std::move(ids));
}

void save_label_map(const std::filesystem::path& path, const LabelMap& map) {
  auto out = open_out(path);
  write_label_map(out, map);
  finish(out, path);
}

LabelMap load_label_map(const std::filesystem::path& path) {
  auto in = open_in(path);
  if (!is_csv(path)) return read_label_map(in);
  auto rows = parse_csv_rows(in);
  const std::size_t h = rows.size();
  const std::size_t w = h ? rows.front().size() : 0;
  std::vector<std::uint32_t> ids;
  ids.reserve(h * w);
  for (const auto& row : rows) {
    for (double v : row) {
      if (v < 0 || v != std::floor(v) || v > 4294967295.0) {
        throw Error(ErrorCode::format, "label CSV holds a non-id value");
      }
      ids.push_back(static_cast<std::uint32_t>(v));
    }
  }
  return LabelMap(checked_u32(h, "height"), checked_u32(w, "width"),
                  std::move(ids));
}

void write_logits(std::ostream& os, const LogitTensor<float>& t) {
  os.write("LGTS", 4);
  put_u32(os, checked_u32(t.n_labels(), "n_labels"));
  put_u32(os, t.height);
  put_u32(os, t.width);
  for (float v : t.values.values()) put_value(os, v);
}

LogitTensor<float> read_logits(std::istream& is) {
  expect_magic(is, "LGTS");
  const std::uint32_t labels = get_u32(is, "LGTS");
  const std::uint32_t h = get_u32(is, "LGTS");
  const std::uint32_t w = get_u32(is, "LGTS");
  std::vector<float> data(std::size_t{labels} * h * w);
  for (auto& v : data) v = std::bit_cast<float>(get_u32(is, "LGTS"));
  MatrixF values(labels, std::size_t{h} * w, std::move(data));
  if (!all_finite(values)) {
    throw Error(ErrorCode::format, "LGTS payload holds non-finite values");
  }
  return LogitTensor<float>(h, w, std::move(values));
}

void save_logits(const std::filesystem::path& path, const LogitTensor<float>& t) {
  auto out = open_out(path);
  write_logits(out, t);
  finish(out, path);
}

LogitTensor<float> load_logits(const std::filesystem::path& path) {
  auto in = open_in(path);
  if (!is_csv(path)) return read_logits(in);
  MatrixF values = read_matrix_csv(in).cast<float>();
  if (!all_finite(values)) {
    throw Error(ErrorCode::format, "logit CSV holds non-finite values");
  }
  const auto w = checked_u32(values.cols(), "width");
  return LogitTensor<float>(1, w, std::move(values));
}

template void write_matrix(std::ostream&, const Matrix<float>&);
template void write_matrix(std::ostream&, const Matrix<double>&);
template Matrix<float> read_matrix_as(std::istream&);
template Matrix<double> read_matrix_as(std::istream&);
template void save_matrix(const std::filesystem::path&, const Matrix<float>&);
template void save_matrix(const std::filesystem::path&, const Matrix<double>&);
template Matrix<float> load_matrix_as(const std::filesystem::path&);
template Matrix<double> load_matrix_as(const std::filesystem::path&);
template void write_matrix_csv(std::ostream&, const Matrix<float>&);
template void write_matrix_csv(std::ostream&, const Matrix<double>&);

}  // namespace tinit
