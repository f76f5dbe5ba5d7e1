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

#include "tinit/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <type_traits>

#include "json.hpp"
#include "tinit/activation.hpp"
#include "tinit/affine.hpp"
#include "tinit/edge_metrics.hpp"
#include "tinit/error.hpp"
#include "tinit/io.hpp"
#include "tinit/rng.hpp"
#include "tinit/sparse_consistency.hpp"
#include "tinit/superpixel_loss.hpp"
#include "tinit/transparent_stack.hpp"

namespace tinit {

using Json = nlohmann::ordered_json;

namespace {

constexpr std::pair<Command, std::string_view> kCommands[] = {
    {Command::ti_recovery, "ti-recovery"},     {Command::ti_stability, "ti-stability"},
    {Command::gauss_stats, "gauss-stats"},     {Command::sp_consistency, "sp-consistency"},
    {Command::sp_loss, "sp-loss"},             {Command::edge_eval, "edge-eval"},
};

constexpr double kConsistencyTolerance = 1e-6;

// Stream tags for derive_seed; one per independent random input.
constexpr std::uint64_t kTagInputs = 0x1B;
constexpr std::uint64_t kTagBaseline = 0xBA5E;
constexpr std::uint64_t kTagStability = 0x57AB;
constexpr std::uint64_t kTagLogits = 0x106;
constexpr std::uint64_t kTagRegions = 0x5E6;
constexpr std::uint64_t kTagFeatures = 0xFEA7;
constexpr std::uint64_t kTagScores = 0x5C0E;

// Every serialized field, in report order. `command` is handled separately.
template <typename Cfg, typename F>
void visit_fields(Cfg& c, F&& f) {
  f("seed", c.seed);
  f("precision", c.precision);
  f("output", c.output);
  f("dims", c.dims);
  f("activation", c.activation);
  f("leaky_delta", c.leaky_delta);
  f("wrapper", c.wrapper);
  f("epsilon", c.epsilon);
  f("bias_variance", c.bias_variance);
  f("samples", c.samples);
  f("input_dist", c.input_dist);
  f("input_range", c.input_range);
  f("schemes", c.schemes);
  f("net2net_dims", c.net2net_dims);
  f("ranges", c.ranges);
  f("stack_out", c.stack_out);
  f("rows", c.rows);
  f("cols", c.cols);
  f("logits_path", c.logits_path);
  f("spmap_path", c.spmap_path);
  f("oracle", c.oracle);
  f("logits_out", c.logits_out);
  f("height", c.height);
  f("width", c.width);
  f("n_labels", c.n_labels);
  f("n_superpixels", c.n_superpixels);
  f("features_path", c.features_path);
  f("scores_path", c.scores_path);
  f("interval", c.interval);
  f("n_features", c.n_features);
  f("m_weight", c.m_weight);
  f("distance", c.distance);
  f("grad_step", c.grad_step);
  f("pred_path", c.pred_path);
  f("gt_path", c.gt_path);
  f("tolerances", c.tolerances);
  f("fixture_size", c.fixture_size);
  f("fixture_shift", c.fixture_shift);
}

template <typename V>
void check_json_type(const Json& v, const std::string& key) {
  auto bad = [&](const char* want) {
    throw Error(ErrorCode::config, "config field '" + key + "' must be " + want);
  };
  if constexpr (std::is_same_v<V, std::string>) {
    if (!v.is_string()) bad("a string");
  } else if constexpr (std::is_floating_point_v<V>) {
    if (!v.is_number()) bad("a number");
  } else if constexpr (std::is_unsigned_v<V>) {
    if (!v.is_number_unsigned()) bad("a non-negative integer");
  } else if constexpr (std::is_integral_v<V>) {
    if (!v.is_number_integer()) bad("an integer");
  } else {
    if (!v.is_array()) bad("an array");
    for (const auto& e : v) check_json_type<typename V::value_type>(e, key + "[]");
  }
}

struct Diagnostic {
  ErrorCode code;
  std::string message;
};

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

std::string join_dims(const std::vector<std::size_t>& dims) {
  std::string s;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(dims[i]);
  }
  return s;
}

std::vector<std::size_t> net2net_dims(const ExperimentConfig& c) {
  if (!c.net2net_dims.empty()) return c.net2net_dims;
  if (c.dims.empty()) return {};
  return std::vector<std::size_t>(c.dims.size(), c.dims.front());
}

bool recoverable(ActivationKind k) {
  return k == ActivationKind::none || k == ActivationKind::relu ||
         k == ActivationKind::leaky_relu || k == ActivationKind::soft_relu ||
         k == ActivationKind::log_sigmoid;
}

void check_stack_fields(const ExperimentConfig& c, std::vector<Diagnostic>& d) {
  auto bad = [&](std::string m) { d.push_back({ErrorCode::config, std::move(m)}); };
  ChainSpec spec;
  spec.dims = c.dims;
  spec.bias_variance = c.bias_variance;
  for (auto& m : validate_chain_spec(spec)) bad("dims: " + m);
  std::optional<ActivationKind> kind;
  try {
    kind = parse_activation_kind(c.activation);
  } catch (const Error& e) {
    bad(e.what());
  }
  if (kind == ActivationKind::leaky_relu && !finite_positive(c.leaky_delta)) {
    bad("leaky_delta must be > 0");
  }
  if (c.wrapper != "sign_split" && c.wrapper != "general") {
    bad("wrapper must be sign_split or general");
  } else if (kind && c.wrapper == "sign_split" && !recoverable(*kind)) {
    bad("activation '" + c.activation +
        "' has no recovery constant; use wrapper general");
  }
  if (!finite_positive(c.epsilon)) bad("epsilon must be > 0");
  if (c.samples == 0) bad("samples must be > 0");
  if (c.input_dist != "uniform" && c.input_dist != "normal") {
    bad("input_dist must be uniform or normal");
  }
  if (!finite_positive(c.input_range)) bad("input_range must be > 0");
}

void check_input(const std::string& path, const char* what, std::vector<Diagnostic>& d) {
  if (path.empty()) return;
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    d.push_back({ErrorCode::io, std::string("missing input file for ") + what + ": " + path});
  }
}

void check_pair(const std::string& a, const std::string& b, const char* names,
                std::vector<Diagnostic>& d) {
  if (a.empty() != b.empty()) {
    d.push_back({ErrorCode::config, std::string(names) + " must be given together"});
  }
}

std::vector<Diagnostic> diagnose(const ExperimentConfig& c) {
  std::vector<Diagnostic> d;
  auto bad = [&](std::string m) { d.push_back({ErrorCode::config, std::move(m)}); };
  if (c.precision != 32 && c.precision != 64) bad("precision must be 32 or 64");
  if (!c.output.empty()) {
    const auto parent = std::filesystem::path(c.output).parent_path();
    std::error_code ec;
    if (!parent.empty() && !std::filesystem::is_directory(parent, ec)) {
      d.push_back({ErrorCode::io, "output directory does not exist: " + parent.string()});
    }
  }
  switch (c.command) {
    case Command::ti_recovery: {
      check_stack_fields(c, d);
      if (c.schemes.empty()) bad("schemes must not be empty");
      for (const auto& s : c.schemes) {
        if (s == "ours") continue;
        try {
          if (parse_baseline_kind(s) != BaselineKind::net2net) continue;
        } catch (const Error& e) {
          bad(e.what());
          continue;
        }
        const auto nd = net2net_dims(c);
        if (nd.size() < 2) bad("net2net: at least two widths required");
        if (!std::all_of(nd.begin(), nd.end(), [&](std::size_t v) { return v == nd.front(); }) ||
            (!nd.empty() && !c.dims.empty() && nd.front() != c.dims.front())) {
          bad("net2net: square layers required (got " + join_dims(nd) + ")");
        }
      }
      break;
    }
    case Command::ti_stability:
      check_stack_fields(c, d);
      if (c.ranges.empty()) bad("ranges must not be empty");
      for (double r : c.ranges) {
        if (!finite_positive(r)) bad("ranges must be finite and > 0");
      }
      break;
    case Command::gauss_stats:
      if (c.rows < 2) bad("rows must be >= 2");
      if (c.cols < 2) bad("cols must be >= 2");
      break;
    case Command::sp_consistency:
      check_pair(c.logits_path, c.spmap_path, "logits_path and spmap_path", d);
      check_input(c.logits_path, "logits", d);
      check_input(c.spmap_path, "spmap", d);
      if (c.oracle != "dense" && c.oracle != "none") bad("oracle must be dense or none");
      if (c.logits_path.empty()) {
        if (c.height == 0 || c.width == 0) bad("height and width must be > 0");
        if (c.n_labels == 0) bad("n_labels must be > 0");
        if (c.n_superpixels == 0 ||
            c.n_superpixels > static_cast<std::size_t>(c.height) * c.width) {
          bad("n_superpixels must be in [1, height*width]");
        }
      }
      break;
    case Command::sp_loss:
      check_input(c.features_path, "features", d);
      check_input(c.scores_path, "scores", d);
      if (c.height == 0 || c.width == 0) bad("height and width must be > 0");
      if (c.interval == 0) bad("interval must be > 0");
      if (c.features_path.empty() && c.n_features == 0) bad("n_features must be > 0");
      if (!std::isfinite(c.m_weight) || c.m_weight < 0.0) bad("m_weight must be >= 0");
      if (!std::isfinite(c.grad_step) || c.grad_step < 0.0) bad("grad_step must be >= 0");
      try {
        parse_distance_kind(c.distance);
      } catch (const Error& e) {
        bad(e.what());
      }
      break;
    case Command::edge_eval:
      check_pair(c.pred_path, c.gt_path, "pred_path and gt_path", d);
      check_input(c.pred_path, "prediction", d);
      check_input(c.gt_path, "ground truth", d);
      if (c.tolerances.empty()) bad("tolerances must not be empty");
      for (int r : c.tolerances) {
        if (r < 0) bad("tolerances must be >= 0");
      }
      if (c.pred_path.empty()) {
        if (c.fixture_size < 4) bad("fixture_size must be >= 4");
        if (static_cast<std::size_t>(std::abs(c.fixture_shift)) >= c.fixture_size / 2) {
          bad("fixture_shift must be smaller than half the fixture size");
        }
      }
      break;
  }
  return d;
}

// ---------------------------------------------------------------- reports

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string csv_header(const ExperimentConfig& c) {
  std::string s;
  s += "# schema_version: " + std::to_string(kReportSchemaVersion) + "\n";
  s += "# toolkit_version: " + std::string(kToolkitVersion) + "\n";
  s += "# command: " + std::string(to_string(c.command)) + "\n";
  s += "# config: " + config_to_json(c) + "\n";
  return s;
}

std::string csv_warnings(const Warnings& w) {
  std::string s;
  for (const auto& m : w) s += "# warning: " + m + "\n";
  return s;
}

std::string json_report(const ExperimentConfig& c, Json result, const Warnings& w) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["toolkit_version"] = std::string(kToolkitVersion);
  j["command"] = std::string(to_string(c.command));
  j["config"] = Json::parse(config_to_json(c));
  j["result"] = std::move(result);
  j["warnings"] = w;
  return j.dump(2) + "\n";
}

Activation make_activation(const ExperimentConfig& c) {
  const ActivationKind k = parse_activation_kind(c.activation);
  return k == ActivationKind::leaky_relu ? Activation::leaky_relu(c.leaky_delta)
                                         : Activation::of(k);
}

template <Real T>
TransparentStack<T> make_stack(const ExperimentConfig& c,
                               const std::vector<AffineTransform<T>>& chain,
                               const Activation& act) {
  if (c.wrapper == "general") return build_general_stack<T>(chain, act);
  return build_transparent_stack<T>(chain, act);
}

template <Real T>
Matrix<T> input_batch(const ExperimentConfig& c) {
  const std::uint64_t s = derive_seed(c.seed, kTagInputs);
  const double r = c.input_range;
  if (c.input_dist == "uniform") {
    return sample_matrix<T>(c.samples, c.dims.front(), {s, Distribution::uniform(-r, r)});
  }
  // Normal with sigma = range / 3, clipped to the range.
  MatrixD x = sample_matrix<double>(c.samples, c.dims.front(),
                                    {s, Distribution::normal(0.0, r * r / 9.0)});
  for (double& v : x.values()) v = std::clamp(v, -r, r);
  return x.template cast<T>();
}

template <Real T>
RunResult run_recovery(const ExperimentConfig& c) {
  const Activation act = make_activation(c);
  const Matrix<T> x = input_batch<T>(c);
  std::string body = "scheme,activation,init_rate,recovery_rate_no_act,recovery_rate_act\n";
  std::string summary;
  for (const auto& scheme : c.schemes) {
    double init = 0.0;
    double rec_plain = 0.0;
    double rec_act = 0.0;
    if (scheme == "ours") {
      ChainSpec spec;
      spec.dims = c.dims;
      spec.seed = c.seed;
      spec.bias_variance = c.bias_variance;
      const auto chain = build_identity_chain<T>(spec);
      const auto plain = build_transparent_stack<T>(chain, Activation::none());
      const auto stack = make_stack<T>(c, chain, act);
      init = init_rate(stack, c.epsilon);
      rec_plain = recovery_rate(plain, x, c.epsilon);
      rec_act = recovery_rate(stack, x, c.epsilon);
      if (!c.stack_out.empty()) {
        Json meta;
        meta["seed"] = c.seed;
        meta["toolkit_version"] = std::string(kToolkitVersion);
        save_stack<T>(c.stack_out, c.stack_out + ".json", stack, meta.dump());
      }
    } else {
      const BaselineKind kind = parse_baseline_kind(scheme);
      const auto dims = kind == BaselineKind::net2net ? net2net_dims(c) : c.dims;
      const std::uint64_t s = derive_seed(c.seed, kTagBaseline, static_cast<std::uint64_t>(kind));
      const auto plain = baseline_init<T>(kind, dims, s, Activation::none());
      const auto stack = baseline_init<T>(kind, dims, s, act);
      init = init_rate(stack, c.epsilon);
      rec_plain = recovery_rate(plain, x, c.epsilon);
      rec_act = recovery_rate(stack, x, c.epsilon);
    }
    body += scheme + "," + act.name() + "," + fmt("%.4f", init) + "," + fmt("%.4f", rec_plain) +
            "," + fmt("%.4f", rec_act) + "\n";
    if (!summary.empty()) summary += "; ";
    summary += scheme + " init=" + fmt("%.2f", init) + "% rec=" + fmt("%.2f", rec_plain) + "/" +
               fmt("%.2f", rec_act) + "%";
  }
  return {csv_header(c) + body, summary, true};
}

template <Real T>
RunResult run_stability(const ExperimentConfig& c) {
  ChainSpec spec;
  spec.dims = c.dims;
  spec.seed = c.seed;
  spec.bias_variance = c.bias_variance;
  const auto chain = build_identity_chain<T>(spec);
  const auto stack = make_stack<T>(c, chain, make_activation(c));
  std::vector<InputRange> ranges;
  for (double r : c.ranges) ranges.push_back({-r, r});
  const auto errs = stability_sweep(stack, std::span<const InputRange>(ranges), c.samples,
                                    derive_seed(c.seed, kTagStability));
  std::string body = "range_lo,range_hi,max_error\n";
  std::string summary = "max_error";
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    body += fmt("%g", ranges[i].lo) + "," + fmt("%g", ranges[i].hi) + "," +
            fmt("%.6e", errs[i]) + "\n";
    summary += " [" + fmt("%g", ranges[i].hi) + "]=" + fmt("%.3e", errs[i]);
  }
  return {csv_header(c) + body, summary, true};
}

template <Real T>
RunResult run_gauss(const ExperimentConfig& c) {
  const double m = static_cast<double>(c.rows);
  const auto a = sample_matrix<T>(c.rows, c.cols, {c.seed, Distribution::normal(0.0, 1.0 / m)});
  const ColumnStats s = column_stats(a);
  Json r;
  r["rows"] = c.rows;
  r["cols"] = c.cols;
  r["sq_length_mean"] = s.sq_length_mean;
  r["sq_length_var"] = s.sq_length_var;
  r["inner_mean"] = s.inner_mean;
  r["inner_var"] = s.inner_var;
  Json e;
  e["sq_length_mean"] = 1.0;
  e["sq_length_var"] = 2.0 / m;
  e["inner_mean"] = 0.0;
  e["inner_var"] = 1.0 / m;
  r["expected"] = std::move(e);
  const std::string summary = "sq_length mean=" + fmt("%.6f", s.sq_length_mean) +
                              " var=" + fmt("%.3e", s.sq_length_var) +
                              " inner var=" + fmt("%.3e", s.inner_var);
  return {json_report(c, std::move(r), {}), summary, true};
}

// Voronoi regions around random sites; ties go to the lowest site index.
LabelMap random_regions(std::uint32_t h, std::uint32_t w, std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<std::pair<double, double>> sites(n);
  // Sites sit on distinct pixels, so every region is non-empty.
  std::vector<std::size_t> pixels(static_cast<std::size_t>(h) * w);
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = i;
  for (std::size_t i = 0; i < n; ++i) {
    std::swap(pixels[i], pixels[i + rng.next_below(pixels.size() - i)]);
    sites[i] = {static_cast<double>(pixels[i] / w), static_cast<double>(pixels[i] % w)};
  }
  LabelMap map(h, w);
  for (std::uint32_t r = 0; r < h; ++r) {
    for (std::uint32_t col = 0; col < w; ++col) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        const double dy = sites[i].first - r;
        const double dx = sites[i].second - col;
        const double dd = dy * dy + dx * dx;
        if (dd < best_d) {
          best_d = dd;
          best = i;
        }
      }
      map.at(r, col) = static_cast<std::uint32_t>(best);
    }
  }
  return map;
}

template <Real T>
double max_region_spread(const SparseMembership& m, const Matrix<T>& logits) {
  double spread = 0.0;
  for (std::size_t s = 0; s < m.n_superpixels(); ++s) {
    const auto px = m.row(s);
    if (px.empty()) continue;
    for (std::size_t l = 0; l < logits.rows(); ++l) {
      const T first = logits(l, px.front());
      for (std::uint32_t p : px) {
        spread = std::max(spread, std::abs(static_cast<double>(logits(l, p) - first)));
      }
    }
  }
  return spread;
}

template <Real T>
RunResult run_consistency(const ExperimentConfig& c) {
  LogitTensor<float> in;
  LabelMap spmap;
  if (!c.logits_path.empty()) {
    in = load_logits(c.logits_path);
    spmap = load_label_map(c.spmap_path);
    if (in.height != spmap.height || in.width != spmap.width) {
      throw Error(ErrorCode::dimension_mismatch,
                  "logits are " + std::to_string(in.height) + "x" + std::to_string(in.width) +
                      " but the superpixel map is " + std::to_string(spmap.height) + "x" +
                      std::to_string(spmap.width));
    }
  } else {
    const std::size_t np = static_cast<std::size_t>(c.height) * c.width;
    in = LogitTensor<float>(c.height, c.width,
                            sample_matrix<float>(c.n_labels, np,
                                                 {derive_seed(c.seed, kTagLogits),
                                                  Distribution::normal(0.0, 1.0)}));
    spmap = random_regions(c.height, c.width, c.n_superpixels, derive_seed(c.seed, kTagRegions));
  }
  const Matrix<T> logits = in.values.template cast<T>();
  const auto membership = SparseMembership::from_label_map(spmap);
  Warnings warnings;
  const Matrix<T> out = enforce_consistency(membership, logits, &warnings);
  const double spread = max_region_spread(membership, out);
  const bool nnz_ok = membership.nnz() == membership.n_pixels();

  Json r;
  r["height"] = in.height;
  r["width"] = in.width;
  r["n_labels"] = in.n_labels();
  r["n_pixels"] = membership.n_pixels();
  r["n_superpixels"] = membership.n_superpixels();
  r["nnz"] = membership.nnz();
  r["max_region_spread"] = spread;
  bool passed = nnz_ok && spread == 0.0;
  std::string summary;
  if (c.oracle == "dense") {
    const Matrix<T> dense = enforce_consistency_dense(spmap, logits, membership.n_superpixels());
    const double diff = max_abs_diff(out, dense);
    const bool ok = diff <= kConsistencyTolerance;
    passed = passed && ok;
    r["oracle"] = "dense";
    r["max_abs_diff"] = diff;
    r["tolerance"] = kConsistencyTolerance;
    summary = "max_abs_diff = " + fmt("%.3e", diff) + (ok ? " <= " : " > ") +
              fmt("%g", kConsistencyTolerance);
  } else {
    r["oracle"] = "none";
    summary = "max_region_spread = " + fmt("%g", spread);
  }
  r["status"] = passed ? "PASS" : "FAIL";
  summary += passed ? ", PASS" : ", FAIL";
  if (!c.logits_out.empty()) {
    save_logits(c.logits_out, LogitTensor<float>(in.height, in.width, out.template cast<float>()));
  }
  return {json_report(c, std::move(r), warnings), summary, passed};
}

RunResult run_loss(const ExperimentConfig& c) {
  const SuperpixelGrid grid(c.height, c.width, c.interval);
  const std::size_t np = grid.n_pixels();
  const DistanceKind dist = parse_distance_kind(c.distance);
  MatrixD f;
  if (!c.features_path.empty()) {
    f = load_matrix_as<double>(c.features_path);
    if (f.rows() != np) {
      throw Error(ErrorCode::dimension_mismatch,
                  "features have " + std::to_string(f.rows()) + " rows, expected " +
                      std::to_string(np));
    }
  } else if (dist == DistanceKind::l2) {
    f = sample_matrix<double>(np, c.n_features,
                              {derive_seed(c.seed, kTagFeatures), Distribution::uniform(0, 1)});
  } else {
    // Per-pixel distributions: softmax of normal draws.
    f = sample_matrix<double>(np, c.n_features,
                              {derive_seed(c.seed, kTagFeatures), Distribution::normal(0, 1)});
    for (std::size_t p = 0; p < np; ++p) {
      auto row = f.row(p);
      const double mx = *std::max_element(row.begin(), row.end());
      double z = 0.0;
      for (double& v : row) z += (v = std::exp(v - mx));
      for (double& v : row) v /= z;
    }
  }
  MatrixD scores = c.scores_path.empty()
                       ? sample_matrix<double>(np, 9,
                                               {derive_seed(c.seed, kTagScores),
                                                Distribution::normal(0, 1)})
                       : load_matrix_as<double>(c.scores_path);
  const PixelField pf = make_pixel_field(std::move(f), c.height, c.width);
  const AssignmentMap a = grid.softmax_assignment(scores);
  LossConfig cfg;
  cfg.m_weight = c.m_weight;
  cfg.sampling_interval = static_cast<double>(c.interval);
  cfg.distance = dist;
  const LossTerms t = loss(pf, a, cfg);

  Json r;
  r["n_pixels"] = np;
  r["n_superpixels"] = grid.n_superpixels();
  r["n_features"] = pf.n_features();
  r["property_term"] = t.property_term;
  r["coordinate_term"] = t.coordinate_term;
  r["total"] = t.total();
  std::string summary = "loss total=" + fmt("%.10g", t.total()) + " (property " +
                        fmt("%.10g", t.property_term) + ", coordinate " +
                        fmt("%.10g", t.coordinate_term) + ")";
  if (c.grad_step > 0.0) {
    const double err = fd_gradient_check(pf, a, cfg, c.grad_step);
    r["gradient_check"] = {{"step", c.grad_step}, {"max_rel_error", err}};
    summary += ", gradient check " + fmt("%.3e", err);
  } else {
    r["gradient_check"] = nullptr;
  }
  return {json_report(c, std::move(r), {}), summary, true};
}

// Square of side size/2 with its corner at size/4; pred moved by `shift` columns.
std::pair<LabelMap, LabelMap> shifted_square(std::size_t size, int shift) {
  const auto n = static_cast<std::uint32_t>(size);
  LabelMap gt(n, n), pred(n, n);
  const std::size_t lo = size / 4;
  const std::size_t hi = lo + size / 2;
  for (std::size_t r = lo; r < hi; ++r) {
    for (std::size_t col = lo; col < hi; ++col) {
      gt.at(r, col) = 1;
      pred.at(r, static_cast<std::size_t>(static_cast<long>(col) + shift)) = 1;
    }
  }
  return {pred, gt};
}

RunResult run_edges(const ExperimentConfig& c) {
  LabelMap pred_map, gt_map;
  if (!c.pred_path.empty()) {
    pred_map = load_label_map(c.pred_path);
    gt_map = load_label_map(c.gt_path);
  } else {
    std::tie(pred_map, gt_map) = shifted_square(c.fixture_size, c.fixture_shift);
  }
  const EdgeMask pred = extract_edges(pred_map);
  const EdgeMask gt = extract_edges(gt_map);
  Warnings warnings;
  std::string body = "tolerance,precision,recall,f_measure,performance_ratio\n";
  std::string summary = "f_measure";
  for (int r : c.tolerances) {
    const EdgeScores s = score_edges(pred, gt, r, &warnings);
    body += std::to_string(r) + "," + fmt("%.6f", s.precision) + "," + fmt("%.6f", s.recall) +
            "," + fmt("%.6f", s.f_measure) + "," + fmt("%.6g", s.performance_ratio) + "\n";
    summary += " [r=" + std::to_string(r) + "]=" + fmt("%.4f", s.f_measure);
  }
  std::sort(warnings.begin(), warnings.end());
  warnings.erase(std::unique(warnings.begin(), warnings.end()), warnings.end());
  const std::string meta = "# performance_ratio_cap: " + fmt("%g", kPerformanceRatioCap) + "\n";
  return {csv_header(c) + meta + csv_warnings(warnings) + body, summary, true};
}

template <Real T>
RunResult dispatch(const ExperimentConfig& c) {
  switch (c.command) {
    case Command::ti_recovery: return run_recovery<T>(c);
    case Command::ti_stability: return run_stability<T>(c);
    case Command::gauss_stats: return run_gauss<T>(c);
    case Command::sp_consistency: return run_consistency<T>(c);
    case Command::sp_loss: return run_loss(c);
    case Command::edge_eval: return run_edges(c);
  }
  throw Error(ErrorCode::config, "unhandled command");
}

}  // namespace

std::string_view to_string(Command c) {
  for (const auto& [k, n] : kCommands) {
    if (k == c) return n;
  }
  return "unknown";
}

Command parse_command(std::string_view s) {
  for (const auto& [k, n] : kCommands) {
    if (n == s) return k;
  }
  throw Error(ErrorCode::config, "unknown command '" + std::string(s) + "'");
}

std::string config_to_json(const ExperimentConfig& cfg) {
  Json j;
  j["command"] = std::string(to_string(cfg.command));
  visit_fields(cfg, [&](const char* key, const auto& v) { j[key] = v; });
  return j.dump();
}

ExperimentConfig config_from_json(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::config, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::config, "config must be a JSON object");
  ExperimentConfig cfg;
  if (auto it = j.find("command"); it != j.end()) {
    if (!it->is_string()) throw Error(ErrorCode::config, "config field 'command' must be a string");
    cfg.command = parse_command(it->get<std::string>());
  }
  std::vector<std::string> known{"command"};
  visit_fields(cfg, [&](const char* key, auto& v) {
    known.emplace_back(key);
    auto it = j.find(key);
    if (it == j.end()) return;
    using V = std::remove_cvref_t<decltype(v)>;
    check_json_type<V>(*it, key);
    try {
      v = it->template get<V>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::config, "config field '" + std::string(key) + "': " + e.what());
    }
  });
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(ErrorCode::config, "unknown config field '" + key + "'");
    }
  }
  return cfg;
}

std::vector<std::string> validate(const ExperimentConfig& cfg) {
  std::vector<std::string> out;
  for (auto& d : diagnose(cfg)) out.push_back(std::move(d.message));
  return out;
}

RunResult run(const ExperimentConfig& cfg) {
  const auto diags = diagnose(cfg);
  if (!diags.empty()) {
    // Missing files outrank plain config errors so callers can tell them apart.
    const bool io = std::any_of(diags.begin(), diags.end(),
                                [](const Diagnostic& d) { return d.code == ErrorCode::io; });
    std::string msg;
    for (const auto& d : diags) msg += (msg.empty() ? "" : "; ") + d.message;
    throw Error(io ? ErrorCode::io : ErrorCode::config, msg);
  }
  RunResult result = cfg.precision == 32 ? dispatch<float>(cfg) : dispatch<double>(cfg);
  if (!cfg.output.empty()) {
    std::ofstream out(cfg.output, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write " + cfg.output);
    out << result.report;
    if (!out) throw Error(ErrorCode::io, "write failed for " + cfg.output);
  }
  return result;
}

}  // namespace tinit
