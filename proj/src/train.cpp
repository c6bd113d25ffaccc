#include "hycon/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hycon {

Split split_dataset(int n, double train_frac, double val_frac,
                    std::uint64_t split_seed) {
  if (n < 1) throw ConfigError("split_dataset: empty dataset");
  if (train_frac < 0.0 || val_frac < 0.0 || train_frac + val_frac > 1.0)
    throw ConfigError("split_dataset: fractions must be nonnegative and sum to <= 1");
  const int n_train = static_cast<int>(std::floor(train_frac * n + 0.5));
  const int n_val = static_cast<int>(std::floor(val_frac * n + 0.5));
  if (n_train + n_val > n)
    throw ConfigError("split_dataset: rounded train+val counts exceed the dataset");
  return split_dataset_counts(n, n_train, n_val, n - n_train - n_val, split_seed);
}

Split split_dataset_counts(int n, int n_train, int n_val, int n_test,
                           std::uint64_t split_seed) {
  if (n_train < 0 || n_val < 0 || n_test < 0)
    throw ConfigError("split_dataset_counts: negative split size");
  if (n_train + n_val + n_test > n)
    throw ConfigError("split_dataset_counts: split sizes total " +
                      std::to_string(n_train + n_val + n_test) + " but only " +
                      std::to_string(n) + " samples exist");
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(split_seed);
  rng.shuffle(perm);
  Split s;
  auto it = perm.begin();
  s.train.assign(it, it + n_train);
  it += n_train;
  s.val.assign(it, it + n_val);
  it += n_val;
  s.test.assign(it, it + n_test);
  return s;
}

void AdamState::init_like(const std::vector<Matrix*>& params) {
  m.clear();
  v.clear();
  for (const Matrix* p : params) {
    m.push_back(Matrix::zeros(p->rows(), p->cols()));
    v.push_back(Matrix::zeros(p->rows(), p->cols()));
  }
  step = 0;
}

void adam_step(const std::vector<Matrix*>& params,
               const std::vector<const Matrix*>& grads, AdamState& state,
               double lr) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw ConfigError("adam_step: parameter/gradient/state size mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& p = *params[i];
    const Matrix& g = *grads[i];
    Matrix& mi = state.m[i];
    Matrix& vi = state.v[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double gj = g.data()[j];
      mi.data()[j] = state.beta1 * mi.data()[j] + (1.0 - state.beta1) * gj;
      vi.data()[j] = state.beta2 * vi.data()[j] + (1.0 - state.beta2) * gj * gj;
      const double mhat = mi.data()[j] / bc1;
      const double vhat = vi.data()[j] / bc2;
      p.data()[j] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

std::vector<std::string> TrainOptions::violations() const {
  std::vector<std::string> v = loss.violations();
  if (batch_size < 2)
    v.push_back("train.batch_size must be >= 2 (pair generation needs a partner)");
  if (!(learning_rate > 0.0)) v.push_back("train.learning_rate must be > 0");
  if (epochs < 1) v.push_back("train.epochs must be >= 1");
  for (const std::string& s : model.violations()) v.push_back(s);
  return v;
}

void TrainOptions::validate() const {
  auto v = violations();
  if (!v.empty()) {
    std::string msg = "invalid training options:";
    for (const auto& s : v) msg += "\n  - " + s;
    throw ConfigError(msg);
  }
}

namespace {

void throw_on_nonfinite(const LossReport& r) {
  const std::pair<const char*, double> terms[] = {
      {"l_scl", r.l_scl},
      {"l_iamcl", r.l_iamcl},
      {"l_iamcl_refine", r.l_iamcl_refine},
      {"l_iemcl", r.l_iemcl},
      {"l_iemcl_refine", r.l_iemcl_refine},
      {"l_pred", r.l_pred},
      {"l_hybrid", r.l_hybrid},
      {"l_overall", r.l_overall},
  };
  for (const auto& [name, value] : terms)
    if (!std::isfinite(value))
      throw NumericalError(std::string("non-finite loss term ") + name +
                           " during training");
}

void accumulate(LossReport& acc, const LossReport& r) {
  acc.l_scl += r.l_scl;
  acc.l_iamcl += r.l_iamcl;
  acc.l_iamcl_refine += r.l_iamcl_refine;
  acc.l_iemcl += r.l_iemcl;
  acc.l_iemcl_refine += r.l_iemcl_refine;
  acc.l_hybrid += r.l_hybrid;
  acc.l_pred += r.l_pred;
  acc.l_overall += r.l_overall;
}

void divide(LossReport& acc, double n) {
  acc.l_scl /= n;
  acc.l_iamcl /= n;
  acc.l_iamcl_refine /= n;
  acc.l_iemcl /= n;
  acc.l_iemcl_refine /= n;
  acc.l_hybrid /= n;
  acc.l_pred /= n;
  acc.l_overall /= n;
}

double mae_on(const ModelParams& params, const Dataset& data,
              const std::vector<int>& rows) {
  std::vector<double> pred = predict(params, data, rows);
  double s = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    s += std::abs(pred[i] - data.labels[static_cast<std::size_t>(rows[i])]);
  return s / static_cast<double>(rows.size());
}

}  // namespace

TrainResult train(const Dataset& data, const Split& split,
                  const TrainOptions& options) {
  options.validate();
  if (data.size() < 1) throw ConfigError("train: empty dataset");
  if (static_cast<int>(split.train.size()) < options.batch_size)
    throw ConfigError("train: training split smaller than one batch (" +
                      std::to_string(split.train.size()) + " < " +
                      std::to_string(options.batch_size) + ")");

  ModelParams params = init_model(options.model, options.seed);
  std::vector<Matrix*> views = parameter_views(params);
  AdamState adam;
  adam.init_like(views);

  // Shuffle stream decoupled from the init stream so changing the
  // architecture never perturbs the batch order.
  Rng shuffle_rng(options.seed ^ 0x9e3779b97f4a7c15ULL);

  TrainResult result;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;
  long batch_counter = 0;

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    std::vector<int> order = split.train;
    shuffle_rng.shuffle(order);
    const int n_batches = static_cast<int>(order.size()) / options.batch_size;

    LossReport epoch_mean;
    for (int b = 0; b < n_batches; ++b) {
      std::vector<int> rows(order.begin() + b * options.batch_size,
                            order.begin() + (b + 1) * options.batch_size);
      MiniBatch batch = take_batch(data, rows);

      diff::Tape tape;
      ForwardNodes fwd = forward(
          tape, params,
          {&batch.features[0], &batch.features[1], &batch.features[2]});

      LossOptions lo = options.loss;
      // fresh picks for the sampled-pair baselines on every batch
      lo.baseline_seed =
          options.loss.baseline_seed + 1000003ULL * static_cast<std::uint64_t>(batch_counter);
      LossNodes nodes = build_losses(tape, fwd.normalized, fwd.y_pred,
                                     scores(batch), batch, lo);
      const LossReport report = nodes.report();
      throw_on_nonfinite(report);
      accumulate(epoch_mean, report);

      tape.backward(nodes.l_overall);
      std::vector<const Matrix*> grads;
      grads.reserve(fwd.param_leaves.size());
      for (diff::Node* leaf : fwd.param_leaves) grads.push_back(&leaf->grad);
      adam_step(views, grads, adam, options.learning_rate);
      ++batch_counter;
    }
    if (n_batches > 0) divide(epoch_mean, n_batches);

    EpochLog log;
    log.epoch = epoch;
    log.train_mean = epoch_mean;
    // the training prediction loss stands in when there is no val split
    log.val_mae = split.val.empty() ? epoch_mean.l_pred
                                    : mae_on(params, data, split.val);
    result.trajectory.push_back(log);

    if (log.val_mae < best_val) {
      best_val = log.val_mae;
      result.params = params;  // snapshot
      result.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
      if (options.patience > 0 && since_best >= options.patience) break;
    }
  }

  if (result.best_epoch == 0) {  // no epoch ran or none improved on +inf
    result.params = params;
    result.best_epoch = static_cast<int>(result.trajectory.size());
  }
  return result;
}

std::vector<double> predict(const ModelParams& params, const Dataset& data,
                            const std::vector<int>& rows) {
  if (rows.empty()) throw ConfigError("predict: empty row set");
  // Chunked so wide fusion expansions never hold more than a few MB.
  const int width = fused_width(params.config);
  const int chunk = std::max(1, 4000000 / std::max(1, width));
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t start = 0; start < rows.size();
       start += static_cast<std::size_t>(chunk)) {
    const std::size_t stop = std::min(rows.size(), start + static_cast<std::size_t>(chunk));
    std::vector<int> part(rows.begin() + static_cast<std::ptrdiff_t>(start),
                          rows.begin() + static_cast<std::ptrdiff_t>(stop));
    MiniBatch mb = take_batch(data, part);
    ForwardValues fv = forward_values(
        params, {&mb.features[0], &mb.features[1], &mb.features[2]});
    out.insert(out.end(), fv.y_pred.begin(), fv.y_pred.end());
  }
  return out;
}

Metrics evaluate(const ModelParams& params, const Dataset& data,
                 const std::vector<int>& rows) {
  if (rows.empty()) throw ConfigError("evaluate: empty row set");
  std::vector<double> y_pred = predict(params, data, rows);
  std::vector<double> y_true;
  y_true.reserve(rows.size());
  for (int r : rows) y_true.push_back(data.labels[static_cast<std::size_t>(r)]);
  return compute_metrics(y_pred, y_true);
}

}  // namespace hycon
