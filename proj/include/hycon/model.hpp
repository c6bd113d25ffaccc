#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hycon/core.hpp"
#include "hycon/diff.hpp"
#include "hycon/rng.hpp"

// Trainable forward path: one 2-layer feed-forward encoder per modality
// (input width -> hidden -> shared embedding width, ReLU between layers),
// ReLU + L2 normalization for the contrastive terms, fusion, and a linear
// head producing one score per sample.

namespace hycon {

enum class FusionKind { addition, concatenation, tensor };

std::string to_string(FusionKind k);
FusionKind fusion_from_string(const std::string& s);

struct LinearLayer {
  Matrix w;  // in x out
  Matrix b;  // 1 x out
};

struct EncoderParams {
  LinearLayer l1;  // input width -> hidden
  LinearLayer l2;  // hidden -> embed
};

struct ModelConfig {
  std::array<int, 3> input_dims = {20, 12, 16};  // per-modality feature widths
  int hidden = 64;
  int embed = 50;
  FusionKind fusion = FusionKind::addition;
  bool fuse_normalized = true;  // head consumes normalized embeddings

  std::vector<std::string> violations() const;
  void validate() const;
};

// Width of the head's input: embed for addition, 3*embed for concatenation,
// (embed+1)^3 for tensor fusion (each vector extended with a constant 1
// before the outer product). Tensor fusion is rejected above 10^6.
int fused_width(const ModelConfig& config);

struct ModelParams {
  ModelConfig config;
  std::array<EncoderParams, 3> encoders;  // modality order
  LinearLayer head;                       // fused_width -> 1
};

// Weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases zero.
// Draw order is fixed (encoders in modality order, each w1 then w2
// row-major, then the head) so a seed pins every parameter.
ModelParams init_model(const ModelConfig& config, std::uint64_t seed);

int parameter_count(const ModelParams& params);

// Mutable views over every parameter matrix in a fixed order; the tape
// forward registers its leaves in the same order so the optimizer can
// match values to gradients positionally.
std::vector<Matrix*> parameter_views(ModelParams& params);
std::vector<const Matrix*> parameter_views(const ModelParams& params);

struct ForwardNodes {
  std::array<diff::Node*, 3> raw;         // pre-normalization embeddings, K x embed
  std::array<diff::Node*, 3> normalized;  // after ReLU + row L2
  diff::Node* y_pred = nullptr;           // K x 1
  std::vector<diff::Node*> param_leaves;  // aligned with parameter_views
};

ForwardNodes forward(diff::Tape& tape, const ModelParams& params,
                     const std::array<const Matrix*, 3>& features);

struct ForwardValues {
  std::array<Matrix, 3> raw;
  std::array<Matrix, 3> normalized;
  Matrix fused;  // K x fused_width, the head's input
  std::vector<double> y_pred;
};

// Tape-free forward pass for evaluation and embedding export.
ForwardValues forward_values(const ModelParams& params,
                             const std::array<const Matrix*, 3>& features);

}  // namespace hycon
