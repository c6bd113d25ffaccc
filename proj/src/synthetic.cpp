#include "hycon/synthetic.hpp"

namespace hycon {

std::vector<std::string> SyntheticSpec::violations() const {
  std::vector<std::string> v;
  if (n_samples < 1) v.push_back("synthetic.n_samples must be >= 1");
  for (Modality m : kModalities)
    if (dims[static_cast<std::size_t>(index_of(m))] < 1)
      v.push_back(std::string("synthetic.dims[") + to_string(m) +
                  "] must be >= 1");
  if (noise_sigma < 0.0) v.push_back("synthetic.noise_sigma must be >= 0");
  return v;
}

void SyntheticSpec::validate() const {
  auto v = violations();
  if (!v.empty()) {
    std::string msg = "invalid synthetic spec:";
    for (const auto& s : v) msg += "\n  - " + s;
    throw ConfigError(msg);
  }
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  // Fixed per-modality projections of the latent descriptor [s, s^2, sign(s)].
  // Drawn first so the sample loop's consumption pattern stays independent
  // of the widths. 1/sqrt(3) keeps feature variance near unit scale.
  std::array<Matrix, 3> proj;
  for (Modality m : kModalities) {
    const auto i = static_cast<std::size_t>(index_of(m));
    proj[i] = Matrix(spec.dims[i], 3);
    for (double& x : proj[i].data()) x = rng.gaussian() / std::sqrt(3.0);
  }

  Dataset data;
  for (Modality m : kModalities) {
    const auto i = static_cast<std::size_t>(index_of(m));
    data.features[i] = Matrix(spec.n_samples, spec.dims[i]);
  }
  data.labels.reserve(static_cast<std::size_t>(spec.n_samples));

  for (int n = 0; n < spec.n_samples; ++n) {
    const double s = rng.uniform(-3.0, 3.0);
    data.labels.push_back(s);
    const double sgn = s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0);
    const double latent[3] = {s, s * s, sgn};
    for (Modality m : kModalities) {
      const auto i = static_cast<std::size_t>(index_of(m));
      double* row = data.features[i].row_ptr(n);
      const double offset = spec.modality_offset[i];
      for (int c = 0; c < spec.dims[i]; ++c) {
        double base = 0.0;
        for (int t = 0; t < 3; ++t) base += proj[i](c, t) * latent[t];
        row[c] = spec.shared_strength * base + offset +
                 spec.noise_sigma * rng.gaussian();
      }
    }
  }
  return data;
}

MiniBatch take_batch(const Dataset& data, const std::vector<int>& rows) {
  std::array<Matrix, 3> features;
  for (Modality m : kModalities) {
    const auto i = static_cast<std::size_t>(index_of(m));
    features[i] = Matrix(static_cast<int>(rows.size()), data.features[i].cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const int src = rows[r];
      if (src < 0 || src >= data.size())
        throw ConfigError("take_batch: row index out of range");
      for (int c = 0; c < features[i].cols(); ++c)
        features[i](static_cast<int>(r), c) = data.features[i](src, c);
    }
  }
  std::vector<SentimentLabel> labels;
  labels.reserve(rows.size());
  for (int src : rows) labels.emplace_back(data.labels[static_cast<std::size_t>(src)]);
  return MiniBatch::make(std::move(features), std::move(labels));
}

}  // namespace hycon
