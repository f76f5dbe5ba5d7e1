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

#include "tinit/tinit.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>
#include <variant>

#include "json.hpp"
#include "tinit/edge_metrics.hpp"
#include "tinit/experiment.hpp"
#include "tinit/io.hpp"
#include "tinit/rng.hpp"
#include "tinit/sparse_consistency.hpp"
#include "tinit/superpixel_loss.hpp"
#include "tinit/transparent_stack.hpp"

struct ti_matrix {
  tinit::AnyMatrix m;
};
struct ti_stack {
  std::variant<tinit::TransparentStack<float>, tinit::TransparentStack<double>> s;
};
struct ti_label_map {
  tinit::LabelMap m;
};
struct ti_logits {
  tinit::LogitTensor<float> t;
};

namespace {

using tinit::Error;
using tinit::ErrorCode;

thread_local std::string g_last_error;

ti_status fail(ti_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

// Runs f, mapping exceptions onto status codes and the thread's error text.
template <typename F>
ti_status guard(F&& f) noexcept {
  try {
    f();
    return TI_OK;
  } catch (const Error& e) {
    return fail(static_cast<ti_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(TI_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(TI_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(TI_ERR_INTERNAL, "unknown error");
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) {
    throw Error(ErrorCode::invalid_argument, std::string(what) + " must not be NULL");
  }
}

void check_precision(int precision) {
  if (precision != 32 && precision != 64) {
    throw Error(ErrorCode::invalid_argument, "precision must be 32 or 64");
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p == nullptr) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

tinit::Activation make_activation(const char* name, double delta) {
  need(name, "activation");
  const auto k = tinit::parse_activation_kind(name);
  return k == tinit::ActivationKind::leaky_relu ? tinit::Activation::leaky_relu(delta)
                                                : tinit::Activation::of(k);
}

tinit::MatrixD as_double(const tinit::AnyMatrix& m) {
  return std::visit([](const auto& x) { return x.template cast<double>(); }, m);
}

ti_status make_sampled(int precision, std::size_t rows, std::size_t cols,
                       const tinit::RngSpec& spec, ti_matrix** out) {
  return guard([&] {
    need(out, "out");
    check_precision(precision);
    if (precision == 32) {
      *out = new ti_matrix{tinit::sample_matrix<float>(rows, cols, spec)};
    } else {
      *out = new ti_matrix{tinit::sample_matrix<double>(rows, cols, spec)};
    }
  });
}

// Calls f(stack, batch) with matching precisions.
template <typename F>
void with_batch(const ti_stack* s, const ti_matrix* batch, F&& f) {
  need(s, "stack");
  need(batch, "batch");
  if (s->s.index() != batch->m.index()) {
    throw Error(ErrorCode::invalid_argument, "stack and batch differ in precision");
  }
  std::visit(
      [&](const auto& st) {
        using S = std::decay_t<decltype(st)>;
        using T = std::decay_t<decltype(st.layers.front().bias.front())>;
        static_assert(std::is_same_v<S, tinit::TransparentStack<T>>);
        f(st, std::get<tinit::Matrix<T>>(batch->m));
      },
      s->s);
}

}  // namespace

extern "C" {

const char* ti_version(void) { return tinit::kToolkitVersion.data(); }

const char* ti_status_string(ti_status status) {
  switch (status) {
    case TI_OK: return "ok";
    case TI_ERR_INVALID_ARGUMENT: return "invalid argument";
    case TI_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case TI_ERR_ILL_CONDITIONED: return "ill-conditioned";
    case TI_ERR_IO: return "i/o error";
    case TI_ERR_FORMAT: return "format error";
    case TI_ERR_CONFIG: return "invalid configuration";
    case TI_ERR_CHECK_FAILED: return "check failed";
    case TI_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* ti_last_error_message(void) { return g_last_error.c_str(); }

void ti_string_free(char* s) { std::free(s); }

// ---------------------------------------------------------------- matrices

ti_status ti_matrix_create(int precision, size_t rows, size_t cols, const double* values,
                           ti_matrix** out) {
  return guard([&] {
    need(out, "out");
    check_precision(precision);
    tinit::MatrixD d(rows, cols, 0.0);
    if (values != nullptr) std::copy(values, values + rows * cols, d.values().begin());
    if (precision == 32) {
      *out = new ti_matrix{d.cast<float>()};
    } else {
      *out = new ti_matrix{std::move(d)};
    }
  });
}

ti_status ti_matrix_sample_normal(int precision, size_t rows, size_t cols, uint64_t seed,
                                  double mean, double variance, ti_matrix** out) {
  return make_sampled(precision, rows, cols,
                      {seed, tinit::Distribution::normal(mean, variance)}, out);
}

ti_status ti_matrix_sample_uniform(int precision, size_t rows, size_t cols, uint64_t seed,
                                   double lo, double hi, ti_matrix** out) {
  return make_sampled(precision, rows, cols, {seed, tinit::Distribution::uniform(lo, hi)},
                      out);
}

void ti_matrix_free(ti_matrix* m) { delete m; }

size_t ti_matrix_rows(const ti_matrix* m) {
  return m ? std::visit([](const auto& x) { return x.rows(); }, m->m) : 0;
}

size_t ti_matrix_cols(const ti_matrix* m) {
  return m ? std::visit([](const auto& x) { return x.cols(); }, m->m) : 0;
}

int ti_matrix_precision(const ti_matrix* m) {
  if (!m) return 0;
  return std::holds_alternative<tinit::MatrixF>(m->m) ? 32 : 64;
}

ti_status ti_matrix_copy_out(const ti_matrix* m, double* dst, size_t len) {
  return guard([&] {
    need(m, "matrix");
    need(dst, "dst");
    const tinit::MatrixD d = as_double(m->m);
    if (len < d.size()) {
      throw Error(ErrorCode::dimension_mismatch,
                  "destination holds " + std::to_string(len) + " values, need " +
                      std::to_string(d.size()));
    }
    std::copy(d.values().begin(), d.values().end(), dst);
  });
}

ti_status ti_matrix_matmul(const ti_matrix* a, const ti_matrix* b, ti_matrix** out) {
  return guard([&] {
    need(a, "a");
    need(b, "b");
    need(out, "out");
    if (a->m.index() != b->m.index()) {
      throw Error(ErrorCode::invalid_argument, "matmul operands differ in precision");
    }
    *out = std::visit(
        [&](const auto& x) {
          using M = std::decay_t<decltype(x)>;
          return new ti_matrix{tinit::matmul(x, std::get<M>(b->m))};
        },
        a->m);
  });
}

ti_status ti_matrix_right_inverse(const ti_matrix* a, double cond_limit, ti_matrix** out) {
  return guard([&] {
    need(a, "a");
    need(out, "out");
    const double lim = cond_limit > 0.0 ? cond_limit : tinit::kDefaultCondLimit;
    *out = std::visit([&](const auto& x) { return new ti_matrix{tinit::right_inverse(x, lim)}; },
                      a->m);
  });
}

ti_status ti_matrix_column_stats(const ti_matrix* m, ti_column_stats* out) {
  return guard([&] {
    need(m, "matrix");
    need(out, "out");
    const auto s = std::visit([](const auto& x) { return tinit::column_stats(x); }, m->m);
    *out = {s.sq_length_mean, s.sq_length_var, s.inner_mean, s.inner_var};
  });
}

ti_status ti_matrix_save(const ti_matrix* m, const char* path) {
  return guard([&] {
    need(m, "matrix");
    need(path, "path");
    std::visit([&](const auto& x) { tinit::save_matrix(path, x); }, m->m);
  });
}

ti_status ti_matrix_load(const char* path, ti_matrix** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new ti_matrix{tinit::load_matrix(path)};
  });
}

// ---------------------------------------------------------------- stacks

ti_status ti_stack_build(int precision, const size_t* dims, size_t n_dims, uint64_t seed,
                         const char* activation, double leaky_delta, const char* wrapper,
                         ti_stack** out) {
  return guard([&] {
    need(dims, "dims");
    need(out, "out");
    check_precision(precision);
    const std::string w = wrapper ? wrapper : "sign_split";
    if (w != "sign_split" && w != "general") {
      throw Error(ErrorCode::invalid_argument, "wrapper must be sign_split or general");
    }
    const tinit::Activation act = make_activation(activation, leaky_delta);
    tinit::ChainSpec spec;
    spec.dims.assign(dims, dims + n_dims);
    spec.seed = seed;
    auto build = [&]<typename T>(T) {
      const auto chain = tinit::build_identity_chain<T>(spec);
      return w == "general" ? tinit::build_general_stack<T>(chain, act)
                            : tinit::build_transparent_stack<T>(chain, act);
    };
    if (precision == 32) {
      *out = new ti_stack{build(float{})};
    } else {
      *out = new ti_stack{build(double{})};
    }
  });
}

ti_status ti_stack_baseline(int precision, const char* kind, const size_t* dims, size_t n_dims,
                            uint64_t seed, const char* activation, double leaky_delta,
                            ti_stack** out) {
  return guard([&] {
    need(kind, "kind");
    need(dims, "dims");
    need(out, "out");
    check_precision(precision);
    const auto k = tinit::parse_baseline_kind(kind);
    const tinit::Activation act = make_activation(activation, leaky_delta);
    const std::span<const std::size_t> d(dims, n_dims);
    if (precision == 32) {
      *out = new ti_stack{tinit::baseline_init<float>(k, d, seed, act)};
    } else {
      *out = new ti_stack{tinit::baseline_init<double>(k, d, seed, act)};
    }
  });
}

void ti_stack_free(ti_stack* s) { delete s; }

size_t ti_stack_in_dim(const ti_stack* s) {
  return s ? std::visit([](const auto& x) { return x.in_dim(); }, s->s) : 0;
}

size_t ti_stack_out_dim(const ti_stack* s) {
  return s ? std::visit([](const auto& x) { return x.out_dim(); }, s->s) : 0;
}

size_t ti_stack_parameter_count(const ti_stack* s) {
  return s ? std::visit([](const auto& x) { return x.parameter_count(); }, s->s) : 0;
}

ti_status ti_stack_forward(const ti_stack* s, const ti_matrix* batch, ti_matrix** out) {
  return guard([&] {
    need(out, "out");
    with_batch(s, batch,
               [&](const auto& st, const auto& x) { *out = new ti_matrix{tinit::forward(st, x)}; });
  });
}

ti_status ti_stack_init_rate(const ti_stack* s, double eps, double* out) {
  return guard([&] {
    need(s, "stack");
    need(out, "out");
    *out = std::visit([&](const auto& st) { return tinit::init_rate(st, eps); }, s->s);
  });
}

ti_status ti_stack_recovery_rate(const ti_stack* s, const ti_matrix* inputs, double eps,
                                 double* out) {
  return guard([&] {
    need(out, "out");
    with_batch(s, inputs, [&](const auto& st, const auto& x) {
      *out = tinit::recovery_rate(st, x, eps);
    });
  });
}

ti_status ti_stack_save(const ti_stack* s, const char* layers_path, const char* sidecar_path) {
  return guard([&] {
    need(s, "stack");
    need(layers_path, "layers_path");
    need(sidecar_path, "sidecar_path");
    std::visit([&](const auto& st) { tinit::save_stack(layers_path, sidecar_path, st); }, s->s);
  });
}

// ---------------------------------------------------------------- label maps and logits

ti_status ti_label_map_create(uint32_t height, uint32_t width, const uint32_t* ids,
                              ti_label_map** out) {
  return guard([&] {
    need(out, "out");
    tinit::LabelMap m(height, width);
    if (ids != nullptr) std::copy(ids, ids + m.ids.size(), m.ids.begin());
    *out = new ti_label_map{std::move(m)};
  });
}

ti_status ti_label_map_load(const char* path, ti_label_map** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new ti_label_map{tinit::load_label_map(path)};
  });
}

ti_status ti_label_map_save(const ti_label_map* m, const char* path) {
  return guard([&] {
    need(m, "label map");
    need(path, "path");
    tinit::save_label_map(path, m->m);
  });
}

void ti_label_map_free(ti_label_map* m) { delete m; }

uint32_t ti_label_map_height(const ti_label_map* m) { return m ? m->m.height : 0; }

uint32_t ti_label_map_width(const ti_label_map* m) { return m ? m->m.width : 0; }

ti_status ti_label_map_copy_out(const ti_label_map* m, uint32_t* dst, size_t len) {
  return guard([&] {
    need(m, "label map");
    need(dst, "dst");
    if (len < m->m.ids.size()) {
      throw Error(ErrorCode::dimension_mismatch, "destination too small for label map");
    }
    std::copy(m->m.ids.begin(), m->m.ids.end(), dst);
  });
}

ti_status ti_logits_create(uint32_t height, uint32_t width, size_t n_labels,
                           const float* values, ti_logits** out) {
  return guard([&] {
    need(values, "values");
    need(out, "out");
    const std::size_t np = static_cast<std::size_t>(height) * width;
    tinit::MatrixF v(n_labels, np, std::vector<float>(values, values + n_labels * np));
    *out = new ti_logits{tinit::LogitTensor<float>(height, width, std::move(v))};
  });
}

ti_status ti_logits_load(const char* path, ti_logits** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new ti_logits{tinit::load_logits(path)};
  });
}

ti_status ti_logits_save(const ti_logits* l, const char* path) {
  return guard([&] {
    need(l, "logits");
    need(path, "path");
    tinit::save_logits(path, l->t);
  });
}

void ti_logits_free(ti_logits* l) { delete l; }

size_t ti_logits_n_labels(const ti_logits* l) { return l ? l->t.n_labels() : 0; }

ti_status ti_logits_copy_out(const ti_logits* l, float* dst, size_t len) {
  return guard([&] {
    need(l, "logits");
    need(dst, "dst");
    const auto& v = l->t.values;
    if (len < v.size()) {
      throw Error(ErrorCode::dimension_mismatch, "destination too small for logits");
    }
    std::copy(v.values().begin(), v.values().end(), dst);
  });
}

ti_status ti_enforce_consistency(const ti_logits* logits, const ti_label_map* spmap,
                                 ti_logits** out) {
  return guard([&] {
    need(logits, "logits");
    need(spmap, "spmap");
    need(out, "out");
    const auto& t = logits->t;
    if (t.height != spmap->m.height || t.width != spmap->m.width) {
      throw Error(ErrorCode::dimension_mismatch, "logits and superpixel map differ in size");
    }
    const auto membership = tinit::SparseMembership::from_label_map(spmap->m);
    *out = new ti_logits{tinit::LogitTensor<float>(
        t.height, t.width, tinit::enforce_consistency(membership, t.values))};
  });
}

ti_status ti_argmax_labels(const ti_logits* logits, ti_label_map** out) {
  return guard([&] {
    need(logits, "logits");
    need(out, "out");
    *out = new ti_label_map{tinit::argmax_labels(logits->t)};
  });
}

// ---------------------------------------------------------------- losses and metrics

ti_status ti_superpixel_loss(const ti_matrix* features, const ti_matrix* scores, size_t height,
                             size_t width, size_t interval, double m_weight,
                             const char* distance, double grad_step, ti_loss_terms* out,
                             double* grad_rel_error) {
  return guard([&] {
    need(features, "features");
    need(scores, "scores");
    need(distance, "distance");
    need(out, "out");
    if (grad_step > 0.0) need(grad_rel_error, "grad_rel_error");
    const tinit::SuperpixelGrid grid(height, width, interval);
    const auto pf = tinit::make_pixel_field(as_double(features->m), height, width);
    const auto a = grid.softmax_assignment(as_double(scores->m));
    tinit::LossConfig cfg;
    cfg.m_weight = m_weight;
    cfg.sampling_interval = static_cast<double>(interval);
    cfg.distance = tinit::parse_distance_kind(distance);
    const auto t = tinit::loss(pf, a, cfg);
    *out = {t.property_term, t.coordinate_term, t.total()};
    if (grad_step > 0.0) *grad_rel_error = tinit::fd_gradient_check(pf, a, cfg, grad_step);
  });
}

ti_status ti_score_edges(const ti_label_map* pred, const ti_label_map* gt, int radius,
                         ti_edge_scores* out) {
  return guard([&] {
    need(pred, "pred");
    need(gt, "gt");
    need(out, "out");
    const auto s =
        tinit::score_edges(tinit::extract_edges(pred->m), tinit::extract_edges(gt->m), radius);
    *out = {s.precision, s.recall, s.f_measure, s.performance_ratio};
  });
}

// ---------------------------------------------------------------- experiments

ti_status ti_experiment_validate(const char* config_json, char** diagnostics) {
  return guard([&] {
    need(config_json, "config_json");
    need(diagnostics, "diagnostics");
    const auto cfg = tinit::config_from_json(config_json);
    *diagnostics = dup_string(nlohmann::json(tinit::validate(cfg)).dump());
  });
}

ti_status ti_experiment_run(const char* config_json, char** summary, char** report) {
  bool passed = true;
  std::string line;
  const ti_status s = guard([&] {
    need(config_json, "config_json");
    const auto result = tinit::run(tinit::config_from_json(config_json));
    passed = result.passed;
    line = result.summary;
    if (summary) *summary = dup_string(result.summary);
    if (report) *report = dup_string(result.report);
  });
  if (s == TI_OK && !passed) return fail(TI_ERR_CHECK_FAILED, line);
  return s;
}

}  // extern "C"
