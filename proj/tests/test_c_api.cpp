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

// Exercises the shared library through its C header only.

#include <cmath>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "tinit/tinit.h"

namespace {

struct Free {
  void operator()(ti_matrix* m) const { ti_matrix_free(m); }
  void operator()(ti_stack* s) const { ti_stack_free(s); }
  void operator()(ti_label_map* m) const { ti_label_map_free(m); }
  void operator()(ti_logits* l) const { ti_logits_free(l); }
};
template <typename T>
using Handle = std::unique_ptr<T, Free>;

template <typename T>
struct Out {
  T* raw = nullptr;
  T** operator&() { return &raw; }
  Handle<T> take() { return Handle<T>(std::exchange(raw, nullptr)); }
};

std::vector<double> values(const ti_matrix* m) {
  std::vector<double> v(ti_matrix_rows(m) * ti_matrix_cols(m));
  REQUIRE(ti_matrix_copy_out(m, v.data(), v.size()) == TI_OK);
  return v;
}

Handle<ti_matrix> matrix(std::size_t r, std::size_t c, const std::vector<double>& v, int precision = 64) {
  Out<ti_matrix> out;
  REQUIRE(ti_matrix_create(precision, r, c, v.data(), &out) == TI_OK);
  return out.take();
}

std::string take(char* s) {
  std::string out = s ? s : "";
  ti_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("version and status strings") {
  CHECK(std::string(ti_version()) == "0.1.0");
  CHECK(std::string(ti_status_string(TI_OK)) == "ok");
  CHECK(std::strlen(ti_status_string(TI_ERR_CONFIG)) > 0);
  CHECK(std::strlen(ti_status_string(static_cast<ti_status>(999))) > 0);
  ti_string_free(nullptr);
  ti_matrix_free(nullptr);
  ti_stack_free(nullptr);
  ti_label_map_free(nullptr);
  ti_logits_free(nullptr);
}

TEST_CASE("matrix basics") {
  auto m = matrix(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(ti_matrix_rows(m.get()) == 2);
  CHECK(ti_matrix_cols(m.get()) == 3);
  CHECK(ti_matrix_precision(m.get()) == 64);
  CHECK(values(m.get()) == std::vector<double>{1, 2, 3, 4, 5, 6});
  double small[2];
  CHECK(ti_matrix_copy_out(m.get(), small, 2) == TI_ERR_DIMENSION_MISMATCH);

  Out<ti_matrix> zero;
  REQUIRE(ti_matrix_create(32, 2, 2, nullptr, &zero) == TI_OK);
  auto z = zero.take();
  CHECK(ti_matrix_precision(z.get()) == 32);
  CHECK(values(z.get()) == std::vector<double>(4, 0.0));

  Out<ti_matrix> bad;
  CHECK(ti_matrix_create(16, 2, 2, nullptr, &bad) == TI_ERR_INVALID_ARGUMENT);
  CHECK(bad.raw == nullptr);
  CHECK(std::strlen(ti_last_error_message()) > 0);
  CHECK(ti_matrix_create(64, 2, 2, nullptr, nullptr) == TI_ERR_INVALID_ARGUMENT);
}

TEST_CASE("matmul and right inverse") {
  auto a = matrix(2, 3, {2, 0, 0, 0, 4, 0});
  Out<ti_matrix> inv;
  REQUIRE(ti_matrix_right_inverse(a.get(), 0.0, &inv) == TI_OK);
  auto ar = inv.take();
  const auto v = values(ar.get());
  CHECK(v[0] == doctest::Approx(0.5));
  CHECK(v[3] == doctest::Approx(0.25));
  Out<ti_matrix> prod;
  REQUIRE(ti_matrix_matmul(a.get(), ar.get(), &prod) == TI_OK);
  auto p = prod.take();
  const auto pv = values(p.get());
  CHECK(std::abs(pv[0] - 1) + std::abs(pv[1]) + std::abs(pv[2]) + std::abs(pv[3] - 1) <= 1e-15);

  Out<ti_matrix> mismatch;
  CHECK(ti_matrix_matmul(a.get(), a.get(), &mismatch) == TI_ERR_DIMENSION_MISMATCH);
  const std::string msg = ti_last_error_message();
  CHECK_FALSE(msg.empty());

  auto singular = matrix(2, 2, {1, 1, 1, 1});
  Out<ti_matrix> none;
  CHECK(ti_matrix_right_inverse(singular.get(), 0.0, &none) == TI_ERR_ILL_CONDITIONED);
  auto f32 = matrix(2, 2, {1, 0, 0, 1}, 32);
  CHECK(ti_matrix_matmul(a.get(), f32.get(), &mismatch) != TI_OK);
}

TEST_CASE("sampling and column statistics") {
  Out<ti_matrix> a, b;
  REQUIRE(ti_matrix_sample_normal(64, 512, 8, 3, 0.0, 1.0 / 512, &a) == TI_OK);
  REQUIRE(ti_matrix_sample_normal(64, 512, 8, 3, 0.0, 1.0 / 512, &b) == TI_OK);
  auto ha = a.take(), hb = b.take();
  CHECK(values(ha.get()) == values(hb.get()));
  ti_column_stats s{};
  REQUIRE(ti_matrix_column_stats(ha.get(), &s) == TI_OK);
  CHECK(s.sq_length_mean == doctest::Approx(1.0).epsilon(0.2));
  Out<ti_matrix> u;
  REQUIRE(ti_matrix_sample_uniform(32, 10, 10, 4, -2, 2, &u) == TI_OK);
  auto hu = u.take();
  for (double x : values(hu.get())) {
    CHECK(x >= -2);
    CHECK(x <= 2);
  }
  Out<ti_matrix> reversed;
  CHECK(ti_matrix_sample_uniform(64, 2, 2, 4, 2, 1, &reversed) == TI_ERR_INVALID_ARGUMENT);
  CHECK(ti_matrix_sample_normal(64, 2, 2, 4, 0, -1, &reversed) == TI_ERR_INVALID_ARGUMENT);
  CHECK(reversed.raw == nullptr);
}

TEST_CASE("matrix save and load") {
  const auto path = (std::filesystem::current_path() / "capi_m.bin").string();
  auto m = matrix(2, 2, {1.5, -2, 3, 4}, 32);
  REQUIRE(ti_matrix_save(m.get(), path.c_str()) == TI_OK);
  Out<ti_matrix> back;
  REQUIRE(ti_matrix_load(path.c_str(), &back) == TI_OK);
  auto hb = back.take();
  CHECK(ti_matrix_precision(hb.get()) == 32);
  CHECK(values(hb.get()) == values(m.get()));
  std::filesystem::remove(path);
  Out<ti_matrix> missing;
  CHECK(ti_matrix_load("no_such_matrix.bin", &missing) == TI_ERR_IO);
}

TEST_CASE("transparent stack through the C API") {
  const std::size_t dims[] = {42, 64, 64, 42};
  Out<ti_stack> out;
  REQUIRE(ti_stack_build(32, dims, 4, 1, "relu", 0.0, "sign_split", &out) == TI_OK);
  auto s = out.take();
  CHECK(ti_stack_in_dim(s.get()) == 42);
  CHECK(ti_stack_out_dim(s.get()) == 42);
  // Widened: 42x128 + 128, 128x128 + 128, 128x42 + 42.
  CHECK(ti_stack_parameter_count(s.get()) == 42 * 128 + 128 + 128 * 128 + 128 + 128 * 42 + 42);
  Out<ti_matrix> x;
  REQUIRE(ti_matrix_sample_uniform(32, 1000, 42, 9, -10, 10, &x) == TI_OK);
  auto hx = x.take();
  double rate = 0;
  REQUIRE(ti_stack_recovery_rate(s.get(), hx.get(), 1e-4, &rate) == TI_OK);
  CHECK(rate == 100.0);
  REQUIRE(ti_stack_init_rate(s.get(), 1e-4, &rate) == TI_OK);
  CHECK(rate >= 99.0);
  Out<ti_matrix> y;
  REQUIRE(ti_stack_forward(s.get(), hx.get(), &y) == TI_OK);
  auto hy = y.take();
  const auto a = values(hx.get()), b = values(hy.get());
  double err = 0;
  for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a[i] - b[i]));
  CHECK(err <= 1e-4);

  auto wrong = matrix(1, 5, {1, 2, 3, 4, 5}, 32);
  CHECK(ti_stack_forward(s.get(), wrong.get(), &y) == TI_ERR_DIMENSION_MISMATCH);
  CHECK(ti_stack_init_rate(s.get(), 0.0, &rate) == TI_ERR_INVALID_ARGUMENT);

  const std::size_t narrow[] = {8, 4, 8};
  CHECK(ti_stack_build(64, narrow, 3, 1, "relu", 0.0, "sign_split", &out) == TI_ERR_INVALID_ARGUMENT);
  CHECK(ti_stack_build(64, dims, 4, 1, "tanh", 0.0, "sign_split", &out) == TI_ERR_INVALID_ARGUMENT);
  CHECK(ti_stack_build(64, dims, 4, 1, "tanh", 0.0, "general", &out) == TI_OK);
  ti_stack_free(out.raw);
  CHECK(ti_stack_build(64, dims, 4, 1, "leaky_relu", 0.0, "sign_split", &out) ==
        TI_ERR_INVALID_ARGUMENT);
  CHECK(ti_stack_build(64, dims, 4, 1, "relu", 0.0, "diagonal", &out) == TI_ERR_INVALID_ARGUMENT);

  const auto dir = std::filesystem::current_path();
  REQUIRE(ti_stack_save(s.get(), (dir / "capi_s.bin").string().c_str(),
                        (dir / "capi_s.json").string().c_str()) == TI_OK);
  CHECK(std::filesystem::exists(dir / "capi_s.json"));
  std::filesystem::remove(dir / "capi_s.bin");
  std::filesystem::remove(dir / "capi_s.json");
}

TEST_CASE("baselines through the C API") {
  const std::size_t sq[] = {42, 42, 42, 42};
  const std::size_t dims[] = {42, 64, 64, 42};
  Out<ti_stack> n2n;
  REQUIRE(ti_stack_baseline(64, "net2net", sq, 4, 1, "relu", 0.0, &n2n) == TI_OK);
  auto hn = n2n.take();
  double rate = 0;
  REQUIRE(ti_stack_init_rate(hn.get(), 1e-4, &rate) == TI_OK);
  CHECK(rate <= 3.0);
  Out<ti_stack> bad;
  CHECK(ti_stack_baseline(64, "net2net", dims, 4, 1, "relu", 0.0, &bad) == TI_ERR_INVALID_ARGUMENT);
  CHECK(std::string(ti_last_error_message()).find("square layers required") != std::string::npos);
  CHECK(ti_stack_baseline(64, "he", dims, 4, 1, "relu", 0.0, &bad) == TI_ERR_INVALID_ARGUMENT);
}

TEST_CASE("consistency, argmax and edges through the C API") {
  const std::uint32_t ids[] = {0, 0, 1, 1};
  Out<ti_label_map> sp;
  REQUIRE(ti_label_map_create(2, 2, ids, &sp) == TI_OK);
  auto hsp = sp.take();
  CHECK(ti_label_map_height(hsp.get()) == 2);
  CHECK(ti_label_map_width(hsp.get()) == 2);
  const float lv[] = {0, 2, 5, 7, 1, 1, 1, 9};
  Out<ti_logits> lg;
  REQUIRE(ti_logits_create(2, 2, 2, lv, &lg) == TI_OK);
  auto hl = lg.take();
  CHECK(ti_logits_n_labels(hl.get()) == 2);
  Out<ti_logits> en;
  REQUIRE(ti_enforce_consistency(hl.get(), hsp.get(), &en) == TI_OK);
  auto he = en.take();
  float got[8];
  REQUIRE(ti_logits_copy_out(he.get(), got, 8) == TI_OK);
  const float expect[] = {1, 1, 6, 6, 1, 1, 5, 5};
  for (int i = 0; i < 8; ++i) CHECK(got[i] == expect[i]);
  Out<ti_label_map> am;
  REQUIRE(ti_argmax_labels(he.get(), &am) == TI_OK);
  auto ha = am.take();
  std::uint32_t labels[4];
  REQUIRE(ti_label_map_copy_out(ha.get(), labels, 4) == TI_OK);
  CHECK(labels[0] == 0);
  CHECK(labels[1] == 0);
  CHECK(labels[2] == 0);
  CHECK(labels[3] == 0);

  Out<ti_label_map> other;
  const std::uint32_t ids3[] = {0, 0, 0, 1, 1, 1};
  REQUIRE(ti_label_map_create(2, 3, ids3, &other) == TI_OK);
  auto ho = other.take();
  CHECK(ti_enforce_consistency(hl.get(), ho.get(), &en) == TI_ERR_DIMENSION_MISMATCH);

  ti_edge_scores es{};
  REQUIRE(ti_score_edges(hsp.get(), hsp.get(), 0, &es) == TI_OK);
  CHECK(es.f_measure == 1.0);
  CHECK(es.performance_ratio == 1e9);
  CHECK(ti_score_edges(hsp.get(), ho.get(), 0, &es) == TI_ERR_DIMENSION_MISMATCH);
  CHECK(ti_score_edges(hsp.get(), hsp.get(), -1, &es) == TI_ERR_INVALID_ARGUMENT);

  const auto dir = std::filesystem::current_path();
  const auto mp = (dir / "capi.spxl").string(), lp = (dir / "capi.lgts").string();
  REQUIRE(ti_label_map_save(hsp.get(), mp.c_str()) == TI_OK);
  REQUIRE(ti_logits_save(hl.get(), lp.c_str()) == TI_OK);
  Out<ti_label_map> m2;
  Out<ti_logits> l2;
  REQUIRE(ti_label_map_load(mp.c_str(), &m2) == TI_OK);
  REQUIRE(ti_logits_load(lp.c_str(), &l2) == TI_OK);
  auto hm2 = m2.take();
  auto hl2 = l2.take();
  std::uint32_t ids_back[4];
  REQUIRE(ti_label_map_copy_out(hm2.get(), ids_back, 4) == TI_OK);
  CHECK(std::memcmp(ids_back, ids, sizeof ids) == 0);
  std::filesystem::remove(mp);
  std::filesystem::remove(lp);
  CHECK(ti_label_map_load(lp.c_str(), &m2) == TI_ERR_IO);
}

TEST_CASE("superpixel loss through the C API") {
  std::vector<double> f(16 * 2), sc(16 * 9);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::sin(0.7 * double(i));
  for (std::size_t i = 0; i < sc.size(); ++i) sc[i] = std::cos(1.3 * double(i));
  auto hf = matrix(16, 2, f);
  auto hs = matrix(16, 9, sc);
  ti_loss_terms t{};
  double grad = -1;
  REQUIRE(ti_superpixel_loss(hf.get(), hs.get(), 4, 4, 2, 1.0, "l2", 1e-5, &t, &grad) == TI_OK);
  CHECK(t.total == doctest::Approx(t.property_term + t.coordinate_term));
  CHECK(t.property_term >= 0);
  CHECK(grad >= 0);
  CHECK(grad <= 1e-4);
  CHECK(ti_superpixel_loss(hf.get(), hs.get(), 4, 4, 2, 1.0, "hinge", 0, &t, nullptr) ==
        TI_ERR_INVALID_ARGUMENT);
  CHECK(ti_superpixel_loss(hf.get(), hs.get(), 5, 4, 2, 1.0, "l2", 0, &t, nullptr) ==
        TI_ERR_DIMENSION_MISMATCH);
}

TEST_CASE("experiments through the C API") {
  char* diag = nullptr;
  REQUIRE(ti_experiment_validate(R"({"command": "ti-recovery"})", &diag) == TI_OK);
  CHECK(take(diag) == "[]");
  REQUIRE(ti_experiment_validate(R"({"command": "ti-recovery", "dims": [4, 2, 4]})", &diag) == TI_OK);
  const auto list = nlohmann::json::parse(take(diag));
  REQUIRE(list.size() == 1);
  CHECK(list[0].get<std::string>().find("m_i >= m0") != std::string::npos);
  CHECK(ti_experiment_validate("{", &diag) == TI_ERR_CONFIG);

  char* summary = nullptr;
  char* report = nullptr;
  REQUIRE(ti_experiment_run(R"({"command": "edge-eval", "tolerances": [2]})", &summary, &report) == TI_OK);
  CHECK(take(summary).find("f_measure") != std::string::npos);
  CHECK(take(report).find("# command: edge-eval") != std::string::npos);
  REQUIRE(ti_experiment_run(R"({"command": "gauss-stats", "rows": 64, "cols": 4})", nullptr, nullptr) == TI_OK);
  CHECK(ti_experiment_run(R"({"command": "gauss-stats", "rows": 1})", &summary, &report) == TI_ERR_CONFIG);
  CHECK(ti_experiment_run(R"({"command": "sp-consistency", "logits_path": "a.lgts", "spmap_path": "b.spxl"})",
                          &summary, &report) == TI_ERR_IO);
  CHECK(ti_experiment_run(R"({"command": "edge-eval", "unknown": 1})", &summary, &report) == TI_ERR_CONFIG);
}
