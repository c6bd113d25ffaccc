#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hycon/matrix.hpp"

namespace hycon {

// Exceptions carrying the CLI exit-code split: configuration/validation
// problems vs numerical failures detected at run time.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Modalities
// ---------------------------------------------------------------------------

// Fixed total order (language < audio < visual) so every per-modality
// iteration in the project is deterministic.
enum class Modality : int { language = 0, audio = 1, visual = 2 };

inline constexpr std::array<Modality, 3> kModalities = {
    Modality::language, Modality::audio, Modality::visual};

inline int index_of(Modality m) { return static_cast<int>(m); }

inline const char* to_string(Modality m) {
  switch (m) {
    case Modality::language: return "language";
    case Modality::audio: return "audio";
    case Modality::visual: return "visual";
  }
  return "?";
}

inline Modality modality_from_string(const std::string& s) {
  for (Modality m : kModalities)
    if (s == to_string(m)) return m;
  throw ConfigError("unknown modality: '" + s + "'");
}

// ---------------------------------------------------------------------------
// Labels and classes
// ---------------------------------------------------------------------------

// Continuous sentiment score in [-3, 3]. Scores are the source of truth;
// binary classes are always a derived view (D3 in the docs: regression
// metrics stay exact).
struct SentimentLabel {
  double score = 0.0;

  SentimentLabel() = default;
  explicit SentimentLabel(double s) : score(s) {
    if (!std::isfinite(s) || s < -3.0 || s > 3.0)
      throw ConfigError("sentiment score must be finite and in [-3, 3], got " +
                        std::to_string(s));
  }
};

enum class BinaryClass : int { negative = 0, positive = 1 };

inline const char* to_string(BinaryClass c) {
  return c == BinaryClass::positive ? "positive" : "negative";
}

// Positive iff score > 0; an exactly-zero score counts as negative.
inline BinaryClass binarize(SentimentLabel label) {
  return label.score > 0.0 ? BinaryClass::positive : BinaryClass::negative;
}

// ---------------------------------------------------------------------------
// Hyperparameters
// ---------------------------------------------------------------------------

struct HyperParams {
  double alpha = 0.8;       // modality margin
  double lambda1 = 1.0;     // weight of the intra-modal term
  double lambda2 = 1.0;     // weight of the inter-modal term
  double lambda3 = 1.0;     // weight of the semi-contrastive term
  int d = 50;               // shared embedding width
  int batch_size = 32;      // K
  double learning_rate = 1e-5;
  std::uint64_t seed = 1;

  std::vector<std::string> violations() const {
    std::vector<std::string> v;
    if (!(alpha >= 0.0 && alpha <= 1.0))
      v.push_back("hyperparams.alpha must be in [0, 1]");
    if (lambda1 < 0 || lambda2 < 0 || lambda3 < 0)
      v.push_back("hyperparams.lambda1/2/3 must be nonnegative");
    if (d < 1) v.push_back("hyperparams.d must be >= 1");
    if (batch_size < 2)
      v.push_back("hyperparams.batch_size must be >= 2 (pair generation needs a partner)");
    if (!(learning_rate > 0)) v.push_back("hyperparams.learning_rate must be > 0");
    return v;
  }

  void validate() const {
    auto v = violations();
    if (!v.empty()) {
      std::string msg = "invalid hyperparameters:";
      for (const auto& s : v) msg += "\n  - " + s;
      throw ConfigError(msg);
    }
  }
};

inline HyperParams default_hyperparams() {
  return HyperParams{};  // alpha=0.8, lambdas=1, d=50, K=32, lr=1e-5
}

// ---------------------------------------------------------------------------
// Embeddings and batches
// ---------------------------------------------------------------------------

// K x d block of unimodal representations for one modality. `normalized`
// promises every nonzero row has unit Euclidean norm (zero rows stay zero).
struct EmbeddingMatrix {
  Matrix values;
  Modality modality = Modality::language;
  bool normalized = false;
};

inline bool holds_normalization_invariant(const EmbeddingMatrix& e,
                                          double tol = 1e-6) {
  for (int i = 0; i < e.values.rows(); ++i) {
    const double n = row_norm(e.values, i);
    if (n != 0.0 && std::abs(n - 1.0) > tol) return false;
  }
  return true;
}

// One mini-batch: three raw feature matrices (widths may differ per
// modality), continuous labels, and the derived binary classes.
struct MiniBatch {
  std::array<Matrix, 3> features;  // indexed by Modality
  std::vector<SentimentLabel> labels;
  std::vector<BinaryClass> classes;  // classes[i] == binarize(labels[i])

  int size() const { return static_cast<int>(labels.size()); }

  static MiniBatch make(std::array<Matrix, 3> features,
                        std::vector<SentimentLabel> labels) {
    const int k = static_cast<int>(labels.size());
    if (k < 1) throw ConfigError("mini-batch must contain at least one sample");
    for (Modality m : kModalities) {
      const Matrix& f = features[index_of(m)];
      if (f.rows() != k)
        throw ConfigError(std::string("feature matrix for ") + to_string(m) +
                          " has " + std::to_string(f.rows()) + " rows, expected " +
                          std::to_string(k));
      if (!f.all_finite())
        throw NumericalError(std::string("non-finite feature for modality ") +
                             to_string(m));
    }
    MiniBatch b;
    b.features = std::move(features);
    b.classes.reserve(labels.size());
    for (const auto& l : labels) b.classes.push_back(binarize(l));
    b.labels = std::move(labels);
    return b;
  }
};

inline std::vector<double> scores(const MiniBatch& b) {
  std::vector<double> out;
  out.reserve(b.labels.size());
  for (const auto& l : b.labels) out.push_back(l.score);
  return out;
}

}  // namespace hycon
