#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hycon/core.hpp"
#include "hycon/losses.hpp"
#include "hycon/rng.hpp"

// Shared fixtures for the test suites.

namespace testutil {

// Batch whose features are already embedding-shaped (k x d per modality),
// with labels drawn from the full score range so both classes usually occur.
inline hycon::MiniBatch random_batch(std::uint64_t seed, int k, int d) {
  hycon::Rng rng(seed);
  std::array<hycon::Matrix, 3> f;
  for (auto& m : f) {
    m = hycon::Matrix(k, d);
    for (double& v : m.data()) v = rng.gaussian();
  }
  std::vector<hycon::SentimentLabel> labels;
  labels.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    labels.emplace_back(rng.uniform(-3.0, 3.0));
  return hycon::MiniBatch::make(std::move(f), std::move(labels));
}

// ReLU + L2 normalized eager embeddings of the batch's features.
inline std::array<hycon::Matrix, 3> normalized_embeddings(
    const hycon::MiniBatch& batch) {
  std::array<hycon::Matrix, 3> out;
  for (int m = 0; m < 3; ++m) {
    hycon::EmbeddingMatrix e;
    e.values = batch.features[static_cast<std::size_t>(m)];
    e.modality = hycon::kModalities[static_cast<std::size_t>(m)];
    out[static_cast<std::size_t>(m)] =
        hycon::normalize_for_contrast(e).values;
  }
  return out;
}

inline std::vector<bool> positive_mask(const hycon::MiniBatch& batch) {
  std::vector<bool> out;
  out.reserve(batch.classes.size());
  for (hycon::BinaryClass c : batch.classes)
    out.push_back(c == hycon::BinaryClass::positive);
  return out;
}

}  // namespace testutil
