#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "hycon/core.hpp"
#include "hycon/losses.hpp"
#include "hycon/model.hpp"
#include "hycon/synthetic.hpp"
#include "hycon/train.hpp"

// Experiment configuration: JSON on disk, validated on load with every
// violation reported at once, and echoed back (defaults resolved) into the
// run's output directory so a run can be reproduced from its own artifacts.

namespace hycon {

struct DataConfig {
  bool use_file = false;
  std::string file;  // feature-table path, read when use_file is set
  SyntheticSpec synthetic;
  double train_frac = 0.7;
  double val_frac = 0.1;  // test split takes the remainder
  // Explicit sizes override the fractions when all three are >= 0.
  int train_count = -1, val_count = -1, test_count = -1;
  std::uint64_t split_seed = 99;
};

struct SweepConfig {
  std::string kind;  // "", "alpha", "lambda", or "loss"
  std::vector<double> alphas = {0.5, 0.7, 0.8, 0.9};
  std::vector<std::array<double, 3>> lambdas;
};

struct ExperimentConfig {
  HyperParams hyper;  // alpha/lambdas/d/batch/lr: single source of truth
  ModelConfig model;  // input_dims resolved against the dataset at run time
  LossOptions loss;   // toggles only; alpha/lambdas mirrored from hyper
  DataConfig data;
  int epochs = 50;
  int patience = 10;
  std::vector<std::uint64_t> seeds = {1};
  std::string output_dir;
  SweepConfig sweep;

  std::vector<std::string> violations() const;
  void validate() const;  // ConfigError enumerating every violation

  // Label for the metrics "regime" column: "hycon" when the full hybrid
  // objective is on, "prediction-only" when no contrastive term is active,
  // the baseline's display name in the baseline regime, and an explicit
  // term list (e.g. "iamcl+scl") for partial ablations.
  std::string regime_name() const;

  // Training view with hyper mirrored into the loss/model/batch fields.
  TrainOptions train_options() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);

ExperimentConfig load_config(const std::string& path);
void write_config(const std::string& path, const ExperimentConfig& c);

}  // namespace hycon
