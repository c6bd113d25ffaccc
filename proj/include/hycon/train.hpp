#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hycon/core.hpp"
#include "hycon/losses.hpp"
#include "hycon/metrics.hpp"
#include "hycon/model.hpp"
#include "hycon/synthetic.hpp"

// Mini-batch training of the full objective with Adam, dataset splitting,
// and evaluation of trained parameters.

namespace hycon {

struct Split {
  std::vector<int> train, val, test;
};

// Shuffle 0..n-1 with split_seed, then cut by fractions (counts rounded
// down for val/test, remainder to train).
Split split_dataset(int n, double train_frac, double val_frac,
                    std::uint64_t split_seed);

// Explicit-count variant; throws ConfigError if the counts exceed n.
Split split_dataset_counts(int n, int n_train, int n_val, int n_test,
                           std::uint64_t split_seed);

struct AdamState {
  std::vector<Matrix> m, v;
  long step = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  void init_like(const std::vector<Matrix*>& params);
};

// One update in place; grads aligned positionally with params.
void adam_step(const std::vector<Matrix*>& params,
               const std::vector<const Matrix*>& grads, AdamState& state,
               double lr);

struct TrainOptions {
  LossOptions loss;
  ModelConfig model;  // input_dims resolved against the dataset before use
  int batch_size = 32;
  double learning_rate = 1e-5;
  int epochs = 50;
  int patience = 10;  // early stop on validation MAE; <= 0 disables
  std::uint64_t seed = 0;  // drives init and epoch shuffling

  std::vector<std::string> violations() const;
  void validate() const;
};

struct EpochLog {
  int epoch = 0;
  LossReport train_mean;  // per-term means over the epoch's batches
  double val_mae = 0.0;
};

struct TrainResult {
  ModelParams params;  // snapshot from the best validation epoch
  std::vector<EpochLog> trajectory;
  int best_epoch = 0;
};

// Shuffled mini-batches (partial tail batches dropped), Adam on the
// overall loss, early stop on validation MAE with best-snapshot restore.
// Deterministic under (options.seed, split). Throws NumericalError naming
// the offending term if any loss value turns non-finite.
TrainResult train(const Dataset& data, const Split& split,
                  const TrainOptions& options);

// Pure function of (params, dataset rows): predictions then metrics.
Metrics evaluate(const ModelParams& params, const Dataset& data,
                 const std::vector<int>& rows);

std::vector<double> predict(const ModelParams& params, const Dataset& data,
                            const std::vector<int>& rows);

}  // namespace hycon
