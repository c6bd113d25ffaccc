#pragma once

#include <vector>

#include "hycon/core.hpp"

// Evaluation metrics and cluster-geometry diagnostics.

namespace hycon {

struct Metrics {
  double acc7 = 0.0;  // 7-bin accuracy: round + clamp both sides to [-3,3]
  double acc2 = 0.0;  // binary accuracy on the sign classes
  double f1 = 0.0;    // F1 of the positive class; 0 when degenerate
  double mae = 0.0;
  double corr = 0.0;  // Pearson; 0 with a stderr warning if variance vanishes
};

int acc7_bin(double score);

Metrics compute_metrics(const std::vector<double>& y_pred,
                        const std::vector<double>& y_true);

// Mean silhouette coefficient with Euclidean distance over the rows of
// `points`. Members of one-element clusters score 0. Throws ConfigError
// unless both classes are present and there are at least two points.
double silhouette(const Matrix& points, const std::vector<BinaryClass>& classes);

// Projection onto the top-2 principal components (power iteration with
// deflation, tol 1e-9). Sign convention: first nonzero loading of each
// component is positive. Zero-variance input maps to all-zero coordinates.
Matrix pca2d(const Matrix& points);

}  // namespace hycon
