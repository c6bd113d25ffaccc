#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hycon/core.hpp"
#include "hycon/rng.hpp"

// Synthetic tri-modal regression data. Each sample has a latent sentiment
// score s ~ Uniform[-3,3]; each modality observes a fixed random linear
// projection of [s, s^2, sign(s)], shifted by a per-modality offset (the
// synthetic modality gap) and corrupted with Gaussian noise.

namespace hycon {

struct SyntheticSpec {
  int n_samples = 2000;
  std::array<int, 3> dims = {20, 12, 16};  // language, audio, visual widths
  double shared_strength = 1.0;
  double noise_sigma = 0.5;
  std::array<double, 3> modality_offset = {0.0, 0.5, 1.0};
  std::uint64_t seed = 7;

  std::vector<std::string> violations() const;
  void validate() const;
};

struct Dataset {
  std::array<Matrix, 3> features;  // n x dims[m]
  std::vector<double> labels;      // scores in [-3, 3]

  int size() const { return static_cast<int>(labels.size()); }
};

// Deterministic under spec.seed: the three projection matrices are drawn
// first (modality order, row-major, entries gaussian/sqrt(3)), then per
// sample the score followed by the per-modality noise coordinates.
Dataset generate_synthetic(const SyntheticSpec& spec);

// Assemble a mini-batch from dataset rows (validates labels, derives classes).
MiniBatch take_batch(const Dataset& data, const std::vector<int>& rows);

}  // namespace hycon
