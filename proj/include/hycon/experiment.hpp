#pragma once

#include <string>
#include <vector>

#include "hycon/config.hpp"
#include "hycon/io.hpp"
#include "hycon/train.hpp"

// Orchestration shared by the command-line tool and the Python bindings:
// load or generate data, split, train per seed, evaluate, aggregate, and
// (optionally) write the run's files into config.output_dir.

namespace hycon {

struct SeedOutcome {
  std::uint64_t seed = 0;
  Metrics test;
  double fused_silhouette = 0.0;
  TrainResult result;
};

struct ExperimentOutcome {
  std::string regime;
  std::vector<SeedOutcome> per_seed;
  MetricsRow mean_row;  // seed == "mean"
  MetricsRow std_row;   // seed == "std"
};

Dataset obtain_dataset(const ExperimentConfig& config);
Split make_split(const ExperimentConfig& config, int n);

// Silhouette of the fused embeddings over the given rows; 0 with a stderr
// warning when only one class is present.
double fused_silhouette(const ModelParams& params, const Dataset& data,
                        const std::vector<int>& rows);

// Trains config.seeds replicas. When write_files is set, writes into
// config.output_dir: config_effective.json, metrics.csv, and per seed
// model_seed<k>.json + trajectory_seed<k>.csv.
ExperimentOutcome run_experiment(const ExperimentConfig& config,
                                 bool write_files);

// Sweep over config.sweep.kind: one metrics row (mean over seeds) per grid
// point, written to sweep.csv in config.output_dir when write_files is
// set. Grids: alpha -> sweep.alphas; lambda -> sweep.lambdas; loss -> the
// four baselines plus the full hybrid objective.
std::vector<MetricsRow> run_sweep(const ExperimentConfig& config,
                                  bool write_files);

// Embedding export for a trained model: one CSV row per (sample, group)
// with the per-modality and fused vectors, plus a companion file with 2-D
// principal-component coordinates per group.
void export_embeddings(const ExperimentConfig& config,
                       const ModelParams& params,
                       const std::string& embeddings_path,
                       const std::string& pca_path);

}  // namespace hycon
