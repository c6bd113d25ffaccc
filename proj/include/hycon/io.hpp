#pragma once

#include <string>
#include <vector>

#include "hycon/metrics.hpp"
#include "hycon/model.hpp"
#include "hycon/synthetic.hpp"

// File formats. Everything is plain text with doubles printed through
// format_double (%.17g), so identical runs produce byte-identical files
// and values survive a read/write round trip exactly. No file carries a
// timestamp.

namespace hycon {

std::string format_double(double x);

// Shortest decimal string that parses back to exactly x. For labels and
// names where %.17g noise (0.69999999999999996) would hurt readability.
std::string format_double_short(double x);

// Feature table: header line `#hycon-features v1`, one block per modality
// `[modality <name> dim <d>]` with a comma-separated row per sample, then
// `[labels]` with one score per line.
void write_feature_table(const std::string& path, const Dataset& data);
Dataset read_feature_table(const std::string& path);

struct MetricsRow {
  std::string regime;
  std::string seed;  // seed number, or "mean" / "std" for aggregates
  Metrics metrics;
  double silhouette = 0.0;  // fused test-split embedding silhouette
};

// CSV with the fixed header regime,seed,acc7,acc2,f1,mae,corr,silhouette.
void write_metrics_csv(const std::string& path,
                       const std::vector<MetricsRow>& rows);

// Model parameters as JSON (config + every matrix, round-trip exact).
void save_model(const std::string& path, const ModelParams& params);
ModelParams load_model(const std::string& path);

}  // namespace hycon
