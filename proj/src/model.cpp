#include "hycon/model.hpp"

#include <cmath>

#include "hycon/losses.hpp"

namespace hycon {

std::string to_string(FusionKind k) {
  switch (k) {
    case FusionKind::addition: return "addition";
    case FusionKind::concatenation: return "concatenation";
    case FusionKind::tensor: return "tensor";
  }
  return "?";
}

FusionKind fusion_from_string(const std::string& s) {
  for (FusionKind k :
       {FusionKind::addition, FusionKind::concatenation, FusionKind::tensor})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown fusion kind: '" + s +
                    "' (expected addition, concatenation or tensor)");
}

std::vector<std::string> ModelConfig::violations() const {
  std::vector<std::string> v;
  for (Modality m : kModalities)
    if (input_dims[static_cast<std::size_t>(index_of(m))] < 1)
      v.push_back(std::string("model.input_dims[") + to_string(m) +
                  "] must be >= 1");
  if (hidden < 1) v.push_back("model.hidden must be >= 1");
  if (embed < 1) v.push_back("model.embed must be >= 1");
  if (fusion == FusionKind::tensor) {
    const long long e = embed + 1;
    if (e * e * e > 1000000)
      v.push_back("model.embed too large for tensor fusion: (embed+1)^3 = " +
                  std::to_string(e * e * e) + " exceeds 1000000");
  }
  return v;
}

void ModelConfig::validate() const {
  auto v = violations();
  if (!v.empty()) {
    std::string msg = "invalid model config:";
    for (const auto& s : v) msg += "\n  - " + s;
    throw ConfigError(msg);
  }
}

int fused_width(const ModelConfig& config) {
  config.validate();
  switch (config.fusion) {
    case FusionKind::addition: return config.embed;
    case FusionKind::concatenation: return 3 * config.embed;
    case FusionKind::tensor: {
      const int e = config.embed + 1;
      return e * e * e;
    }
  }
  throw ConfigError("unknown fusion kind");
}

namespace {

// Weight entries uniform in +-1/sqrt(fan_in), drawn row-major; bias zero.
LinearLayer init_layer(int in, int out, Rng& rng) {
  LinearLayer layer;
  layer.w = Matrix(in, out);
  layer.b = Matrix(1, out);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (double& x : layer.w.data()) x = rng.uniform(-bound, bound);
  return layer;
}

}  // namespace

ModelParams init_model(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  ModelParams p;
  p.config = config;
  for (Modality m : kModalities) {
    const auto i = static_cast<std::size_t>(index_of(m));
    p.encoders[i].l1 = init_layer(config.input_dims[i], config.hidden, rng);
    p.encoders[i].l2 = init_layer(config.hidden, config.embed, rng);
  }
  p.head = init_layer(fused_width(config), 1, rng);
  return p;
}

int parameter_count(const ModelParams& params) {
  int n = 0;
  for (const Matrix* m : parameter_views(params)) n += static_cast<int>(m->size());
  return n;
}

std::vector<Matrix*> parameter_views(ModelParams& params) {
  std::vector<Matrix*> out;
  for (EncoderParams& e : params.encoders) {
    out.push_back(&e.l1.w);
    out.push_back(&e.l1.b);
    out.push_back(&e.l2.w);
    out.push_back(&e.l2.b);
  }
  out.push_back(&params.head.w);
  out.push_back(&params.head.b);
  return out;
}

std::vector<const Matrix*> parameter_views(const ModelParams& params) {
  std::vector<const Matrix*> out;
  for (const EncoderParams& e : params.encoders) {
    out.push_back(&e.l1.w);
    out.push_back(&e.l1.b);
    out.push_back(&e.l2.w);
    out.push_back(&e.l2.b);
  }
  out.push_back(&params.head.w);
  out.push_back(&params.head.b);
  return out;
}

namespace {

void check_feature_widths(const ModelConfig& config,
                          const std::array<const Matrix*, 3>& features) {
  for (Modality m : kModalities) {
    const auto i = static_cast<std::size_t>(index_of(m));
    if (features[i]->cols() != config.input_dims[i])
      throw ConfigError(std::string("feature width for ") + to_string(m) +
                        " is " + std::to_string(features[i]->cols()) +
                        ", model expects " + std::to_string(config.input_dims[i]));
  }
}

}  // namespace

ForwardNodes forward(diff::Tape& tape, const ModelParams& params,
                     const std::array<const Matrix*, 3>& features) {
  params.config.validate();
  check_feature_widths(params.config, features);

  ForwardNodes out;
  for (Modality m : kModalities) {
    const auto i = static_cast<std::size_t>(index_of(m));
    const EncoderParams& enc = params.encoders[i];
    diff::Node* x = tape.input(*features[i]);
    diff::Node* w1 = tape.input(enc.l1.w);
    diff::Node* b1 = tape.input(enc.l1.b);
    diff::Node* w2 = tape.input(enc.l2.w);
    diff::Node* b2 = tape.input(enc.l2.b);
    out.param_leaves.push_back(w1);
    out.param_leaves.push_back(b1);
    out.param_leaves.push_back(w2);
    out.param_leaves.push_back(b2);
    diff::Node* h = tape.relu(tape.linear(x, w1, b1));
    out.raw[i] = tape.linear(h, w2, b2);
    out.normalized[i] = normalize_for_contrast(tape, out.raw[i]);
  }

  const auto& zs = params.config.fuse_normalized ? out.normalized : out.raw;
  diff::Node* fused = nullptr;
  switch (params.config.fusion) {
    case FusionKind::addition:
      fused = tape.add(tape.add(zs[0], zs[1]), zs[2]);
      break;
    case FusionKind::concatenation:
      fused = tape.concat_cols({zs[0], zs[1], zs[2]});
      break;
    case FusionKind::tensor:
      fused = tape.trilinear_expand(zs[0], zs[1], zs[2]);
      break;
  }
  diff::Node* hw = tape.input(params.head.w);
  diff::Node* hb = tape.input(params.head.b);
  out.param_leaves.push_back(hw);
  out.param_leaves.push_back(hb);
  out.y_pred = tape.linear(fused, hw, hb);
  return out;
}

ForwardValues forward_values(const ModelParams& params,
                             const std::array<const Matrix*, 3>& features) {
  // Tape-free twin of forward(); kept in lockstep with it so evaluation
  // and training see the same function.
  params.config.validate();
  check_feature_widths(params.config, features);

  const int k = features[0]->rows();
  ForwardValues out;
  for (Modality m : kModalities) {
    const auto i = static_cast<std::size_t>(index_of(m));
    const EncoderParams& enc = params.encoders[i];
    Matrix h = matmul(*features[i], enc.l1.w);
    for (int r = 0; r < h.rows(); ++r)
      for (int c = 0; c < h.cols(); ++c) {
        h(r, c) += enc.l1.b(0, c);
        if (h(r, c) < 0.0) h(r, c) = 0.0;
      }
    Matrix raw = matmul(h, enc.l2.w);
    for (int r = 0; r < raw.rows(); ++r)
      for (int c = 0; c < raw.cols(); ++c) raw(r, c) += enc.l2.b(0, c);
    EmbeddingMatrix em;
    em.values = raw;
    em.modality = m;
    out.normalized[i] = normalize_for_contrast(em).values;
    out.raw[i] = std::move(raw);
  }

  const auto& zs = params.config.fuse_normalized ? out.normalized : out.raw;
  const int d = params.config.embed;
  switch (params.config.fusion) {
    case FusionKind::addition: {
      out.fused = Matrix(k, d);
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < d; ++c)
          out.fused(r, c) = zs[0](r, c) + zs[1](r, c) + zs[2](r, c);
      break;
    }
    case FusionKind::concatenation: {
      out.fused = Matrix(k, 3 * d);
      for (int r = 0; r < k; ++r)
        for (int i = 0; i < 3; ++i)
          for (int c = 0; c < d; ++c)
            out.fused(r, i * d + c) = zs[static_cast<std::size_t>(i)](r, c);
      break;
    }
    case FusionKind::tensor: {
      const int e = d + 1;
      out.fused = Matrix(k, e * e * e);
      auto ext = [d](const Matrix& m, int row, int idx) {
        return idx < d ? m(row, idx) : 1.0;
      };
      for (int r = 0; r < k; ++r) {
        double* orow = out.fused.row_ptr(r);
        for (int p = 0; p < e; ++p)
          for (int q = 0; q < e; ++q)
            for (int s = 0; s < e; ++s)
              orow[(p * e + q) * e + s] =
                  ext(zs[0], r, p) * ext(zs[1], r, q) * ext(zs[2], r, s);
      }
      break;
    }
  }

  out.y_pred.resize(static_cast<std::size_t>(k));
  for (int r = 0; r < k; ++r) {
    double s = params.head.b(0, 0);
    for (int c = 0; c < out.fused.cols(); ++c)
      s += out.fused(r, c) * params.head.w(c, 0);
    out.y_pred[static_cast<std::size_t>(r)] = s;
  }
  return out;
}

}  // namespace hycon
