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

// Command-line front end. Flags become a JSON config that is handed to the C
// API; the process exit status is the returned ti_status.

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tinit/tinit.h"

namespace {

using Json = nlohmann::ordered_json;

// Registers flags whose values are copied into the config only when given,
// so unset flags fall back to the library defaults.
class ConfigFlags {
 public:
  template <typename T>
  void add(CLI::App* app, const std::string& flag, const std::string& key,
           const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(flag, *value, help);
    if constexpr (requires { typename T::value_type; } && !std::is_same_v<T, std::string>) {
      opt->delimiter(',');
    }
    emitters_.push_back([opt, value, key](Json& j) {
      if (opt->count() > 0) j[key] = *value;
    });
  }

  void emit(Json& j) const {
    for (const auto& e : emitters_) e(j);
  }

 private:
  std::vector<std::function<void(Json&)>> emitters_;
};

struct Subcommand {
  CLI::App* app;
  std::string name;
  ConfigFlags flags;
};

void add_common(Subcommand& s) {
  s.flags.add<std::uint64_t>(s.app, "--seed", "seed", "base seed");
  s.flags.add<int>(s.app, "--precision", "precision", "32 or 64");
  s.flags.add<std::string>(s.app, "-o,--output", "output", "report path");
}

void add_stack(Subcommand& s) {
  s.flags.add<std::vector<std::size_t>>(s.app, "--dims", "dims", "widths m0,...,mk");
  s.flags.add<std::string>(s.app, "--activation", "activation",
                           "none|relu|leaky_relu|soft_relu|log_sigmoid|tanh|sigmoid|cube|zero");
  s.flags.add<double>(s.app, "--leaky-delta", "leaky_delta", "leaky_relu negative slope");
  s.flags.add<std::string>(s.app, "--wrapper", "wrapper", "sign_split|general");
  s.flags.add<double>(s.app, "--epsilon", "epsilon", "rate threshold");
  s.flags.add<double>(s.app, "--bias-variance", "bias_variance", "variance of sampled biases");
  s.flags.add<std::size_t>(s.app, "--samples", "samples", "input rows per batch");
  s.flags.add<std::string>(s.app, "--input-dist", "input_dist", "uniform|normal");
  s.flags.add<double>(s.app, "--input-range", "input_range", "inputs lie in [-r, r]");
}

std::string take(char* s) {
  std::string out = s ? s : "";
  ti_string_free(s);
  return out;
}

int report_failure(ti_status st) {
  std::cerr << "error (" << ti_status_string(st) << "): " << ti_last_error_message() << "\n";
  return static_cast<int>(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transparent initialization and superpixel toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  bool validate_only = false;
  bool dump_config = false;
  app.add_option("--config", config_path, "JSON config; flags override its fields");
  app.add_flag("--validate", validate_only, "print diagnostics and exit");
  app.add_flag("--dump-config", dump_config, "print the config JSON and exit");
  app.set_version_flag("--version", std::string(ti_version()));

  std::vector<std::unique_ptr<Subcommand>> subs;
  auto sub = [&](const std::string& name, const std::string& help) -> Subcommand& {
    subs.push_back(std::make_unique<Subcommand>(Subcommand{app.add_subcommand(name, help), name, {}}));
    add_common(*subs.back());
    return *subs.back();
  };

  Subcommand& rec = sub("ti-recovery", "init and recovery rates per scheme (CSV)");
  add_stack(rec);
  rec.flags.add<std::vector<std::string>>(rec.app, "--schemes", "schemes",
                                          "random,xavier,net2net,ours");
  rec.flags.add<std::vector<std::size_t>>(rec.app, "--net2net-dims", "net2net_dims",
                                          "square widths for net2net");
  rec.flags.add<std::string>(rec.app, "--stack-out", "stack_out",
                             "save the stack (plus <path>.json sidecar)");

  Subcommand& stab = sub("ti-stability", "max identity error per input range (CSV)");
  add_stack(stab);
  stab.flags.add<std::vector<double>>(stab.app, "--ranges", "ranges", "half-widths r of [-r, r]");

  Subcommand& gauss = sub("gauss-stats", "column statistics of N(0, 1/m) matrices (JSON)");
  gauss.flags.add<std::size_t>(gauss.app, "-m,--rows", "rows", "rows m");
  gauss.flags.add<std::size_t>(gauss.app, "-n,--cols", "cols", "columns n");

  Subcommand& cons = sub("sp-consistency", "superpixel logit consistency (JSON)");
  cons.flags.add<std::string>(cons.app, "--logits", "logits_path", "LGTS or CSV logits");
  cons.flags.add<std::string>(cons.app, "--spmap", "spmap_path", "SPXL or CSV superpixel map");
  cons.flags.add<std::string>(cons.app, "--oracle", "oracle", "dense|none");
  cons.flags.add<std::string>(cons.app, "--logits-out", "logits_out", "write enforced logits");
  cons.flags.add<std::uint32_t>(cons.app, "--height", "height", "random instance height");
  cons.flags.add<std::uint32_t>(cons.app, "--width", "width", "random instance width");
  cons.flags.add<std::size_t>(cons.app, "--labels", "n_labels", "random instance labels");
  cons.flags.add<std::size_t>(cons.app, "--superpixels", "n_superpixels",
                              "random instance superpixels");

  Subcommand& loss = sub("sp-loss", "superpixel loss terms and gradient check (JSON)");
  loss.flags.add<std::string>(loss.app, "--features", "features_path", "N_p x K features");
  loss.flags.add<std::string>(loss.app, "--scores", "scores_path", "N_p x 9 assignment scores");
  loss.flags.add<std::uint32_t>(loss.app, "--height", "height", "image height");
  loss.flags.add<std::uint32_t>(loss.app, "--width", "width", "image width");
  loss.flags.add<std::size_t>(loss.app, "--interval", "interval", "grid spacing");
  loss.flags.add<std::size_t>(loss.app, "--n-features", "n_features", "random feature count");
  loss.flags.add<double>(loss.app, "--m-weight", "m_weight", "coordinate weight m");
  loss.flags.add<std::string>(loss.app, "--distance", "distance", "l2|cross_entropy");
  loss.flags.add<double>(loss.app, "--grad-step", "grad_step", "finite-difference step, 0 = off");

  Subcommand& edge = sub("edge-eval", "edge precision, recall, F-measure, PR (CSV)");
  edge.flags.add<std::string>(edge.app, "--pred", "pred_path", "predicted label map");
  edge.flags.add<std::string>(edge.app, "--gt", "gt_path", "ground-truth label map");
  edge.flags.add<std::vector<int>>(edge.app, "--tolerances", "tolerances", "radii r");
  edge.flags.add<std::size_t>(edge.app, "--fixture-size", "fixture_size",
                              "shifted-square fixture side");
  edge.flags.add<int>(edge.app, "--fixture-shift", "fixture_shift", "fixture column shift");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(TI_ERR_CONFIG);
  }

  Json cfg = Json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot read config " << config_path << "\n";
      return static_cast<int>(TI_ERR_IO);
    }
    try {
      cfg = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      std::cerr << "error: config " << config_path << ": " << e.what() << "\n";
      return static_cast<int>(TI_ERR_CONFIG);
    }
  }
  for (const auto& s : subs) {
    if (s->app->parsed()) {
      cfg["command"] = s->name;
      s->flags.emit(cfg);
    }
  }
  const std::string text = cfg.dump();

  if (dump_config) {
    std::cout << cfg.dump(2) << "\n";
    return 0;
  }

  if (validate_only) {
    char* diag = nullptr;
    const ti_status st = ti_experiment_validate(text.c_str(), &diag);
    if (st != TI_OK) return report_failure(st);
    const auto list = Json::parse(take(diag));
    for (const auto& d : list) std::cout << d.get<std::string>() << "\n";
    return list.empty() ? 0 : static_cast<int>(TI_ERR_CONFIG);
  }

  char* summary = nullptr;
  char* report = nullptr;
  const ti_status st = ti_experiment_run(text.c_str(), &summary, &report);
  const std::string line = take(summary);
  const std::string body = take(report);
  if (st != TI_OK && st != TI_ERR_CHECK_FAILED) return report_failure(st);
  const bool to_stdout = !cfg.contains("output") || cfg["output"].get<std::string>().empty();
  if (to_stdout) {
    std::cout << body;
    std::cerr << line << "\n";
  } else {
    std::cout << line << "\n";
  }
  return static_cast<int>(st);
}
