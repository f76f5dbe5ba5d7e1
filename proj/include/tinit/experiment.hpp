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

// Seeded experiment runner behind the command-line tool. One command per
// measurement family; every report embeds the resolved config, the toolkit
// version and a schema version, and is byte-identical for identical configs.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tinit {

inline constexpr std::string_view kToolkitVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

enum class Command {
  ti_recovery,     // init and recovery rates per scheme (CSV)
  ti_stability,    // max identity error per input range (CSV)
  gauss_stats,     // column statistics of N(0, 1/m) matrices (JSON)
  sp_consistency,  // sparse logit consistency, optional dense cross-check (JSON)
  sp_loss,         // superpixel loss terms and gradient check (JSON)
  edge_eval,       // precision/recall/F-measure/performance ratio per tolerance (CSV)
};

std::string_view to_string(Command c);
/// Accepts the dashed CLI names ("ti-recovery", ...).
Command parse_command(std::string_view s);

struct ExperimentConfig {
  Command command = Command::ti_recovery;
  std::uint64_t seed = 1;
  int precision = 64;
  std::string output;  // empty: report goes to the run summary only

  // transparent stacks
  std::vector<std::size_t> dims{42, 64, 64, 42};
  std::string activation = "relu";
  double leaky_delta = 0.01;
  std::string wrapper = "sign_split";  // or "general"
  double epsilon = 1e-4;
  double bias_variance = 1.0;
  std::size_t samples = 4 * 64 * 64;   // rows per input batch
  std::string input_dist = "uniform";  // or "normal" (clipped to the range)
  double input_range = 10.0;
  std::vector<std::string> schemes{"random", "xavier", "net2net", "ours"};
  std::vector<std::size_t> net2net_dims;  // empty: m0 repeated len(dims) times
  std::vector<double> ranges{1, 10, 100, 1000};
  std::string stack_out;  // optional: saved layers (MTRX) + "<path>.json" sidecar

  // gauss-stats
  std::size_t rows = 4096;
  std::size_t cols = 64;

  // sp-consistency
  std::string logits_path;
  std::string spmap_path;
  std::string oracle = "dense";  // or "none"
  std::string logits_out;
  std::uint32_t height = 64;
  std::uint32_t width = 64;
  std::size_t n_labels = 150;
  std::size_t n_superpixels = 100;

  // sp-loss
  std::string features_path;
  std::string scores_path;
  std::size_t interval = 2;
  std::size_t n_features = 3;
  double m_weight = 1.0;
  std::string distance = "l2";
  double grad_step = 1e-5;  // 0 disables the gradient check

  // edge-eval
  std::string pred_path;
  std::string gt_path;
  std::vector<int> tolerances{1, 2, 3, 4, 5};
  std::size_t fixture_size = 32;  // shifted-square fixture when no paths given
  int fixture_shift = 2;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

std::string config_to_json(const ExperimentConfig& cfg);
/// Missing keys keep their defaults; unknown keys or wrong types throw config.
ExperimentConfig config_from_json(std::string_view json);

/// Empty iff run's preconditions hold. Never computes anything and never
/// touches the filesystem beyond checking that input files exist.
std::vector<std::string> validate(const ExperimentConfig& cfg);

struct RunResult {
  std::string report;   // full report text (also written to cfg.output)
  std::string summary;  // one line for the terminal
  bool passed = true;   // false when a built-in cross-check failed
};

/// Validates, runs, writes the report. Throws tinit::Error on failure.
RunResult run(const ExperimentConfig& cfg);

}  // namespace tinit
