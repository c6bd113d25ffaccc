#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <array>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hycon/config.hpp"
#include "hycon/experiment.hpp"
#include "hycon/gradcheck.hpp"

namespace py = pybind11;
using namespace hycon;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const DoubleArray& a, const char* name) {
  if (a.ndim() != 2)
    throw ConfigError(std::string(name) + " must be a 2-D array");
  Matrix m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  const double* src = a.data();
  std::copy(src, src + m.size(), m.data().begin());
  return m;
}

py::array_t<double> to_numpy(const Matrix& m) {
  py::array_t<double> out(
      std::vector<py::ssize_t>{m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

std::vector<SentimentLabel> to_labels(const std::vector<double>& scores) {
  std::vector<SentimentLabel> out;
  out.reserve(scores.size());
  for (double s : scores) out.emplace_back(s);
  return out;
}

LossOptions options_from_args(double alpha, double lambda1, double lambda2,
                              double lambda3, bool enable_scl, bool enable_iamcl,
                              bool enable_iemcl, bool enable_refinement,
                              const std::string& ratio_form,
                              const std::string& baseline, bool triplet_hinge,
                              std::uint64_t baseline_seed) {
  LossOptions o;
  o.alpha = alpha;
  o.lambda1 = lambda1;
  o.lambda2 = lambda2;
  o.lambda3 = lambda3;
  o.enable_scl = enable_scl;
  o.enable_iamcl = enable_iamcl;
  o.enable_iemcl = enable_iemcl;
  o.enable_refinement = enable_refinement;
  o.ratio_form = ratio_form_from_string(ratio_form);
  o.baseline = baseline_from_string(baseline);
  o.triplet_hinge = triplet_hinge;
  o.baseline_seed = baseline_seed;
  o.validate();
  return o;
}

py::dict report_to_dict(const LossReport& r) {
  py::dict d;
  d["l_scl"] = r.l_scl;
  d["l_iamcl"] = r.l_iamcl;
  d["l_iamcl_refine"] = r.l_iamcl_refine;
  d["l_iemcl"] = r.l_iemcl;
  d["l_iemcl_refine"] = r.l_iemcl_refine;
  d["l_hybrid"] = r.l_hybrid;
  d["l_pred"] = r.l_pred;
  d["l_overall"] = r.l_overall;
  return d;
}

py::dict metrics_to_dict(const Metrics& m) {
  py::dict d;
  d["acc7"] = m.acc7;
  d["acc2"] = m.acc2;
  d["f1"] = m.f1;
  d["mae"] = m.mae;
  d["corr"] = m.corr;
  return d;
}

struct BuiltLosses {
  diff::Tape tape;
  std::array<diff::Node*, 3> leaves{};
  LossNodes nodes;
};

// Shared assembly for loss_report / loss_gradients: raw embeddings in,
// normalization and the full objective on the tape.
void build_on_tape(BuiltLosses& built, const DoubleArray& language,
                   const DoubleArray& audio, const DoubleArray& visual,
                   const std::vector<double>& labels,
                   const std::vector<double>& y_pred, const LossOptions& opts) {
  std::array<Matrix, 3> feats = {to_matrix(language, "language"),
                                 to_matrix(audio, "audio"),
                                 to_matrix(visual, "visual")};
  MiniBatch batch = MiniBatch::make(feats, to_labels(labels));

  std::array<diff::Node*, 3> z{};
  for (int m = 0; m < 3; ++m) {
    built.leaves[static_cast<std::size_t>(m)] =
        built.tape.input(feats[static_cast<std::size_t>(m)]);
    z[static_cast<std::size_t>(m)] = normalize_for_contrast(
        built.tape, built.leaves[static_cast<std::size_t>(m)]);
  }

  diff::Node* yp = nullptr;
  if (!y_pred.empty()) {
    if (y_pred.size() != labels.size())
      throw ConfigError("y_pred length does not match the label count");
    Matrix col(static_cast<int>(y_pred.size()), 1);
    for (std::size_t i = 0; i < y_pred.size(); ++i)
      col(static_cast<int>(i), 0) = y_pred[i];
    yp = built.tape.input(col);
  }

  built.nodes = build_losses(built.tape, z, yp, labels, batch, opts);
}

}  // namespace

PYBIND11_MODULE(_hycon, m) {
  m.doc() = "tri-modal contrastive representation toolkit";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const NumericalError& e) {
      PyErr_SetString(PyExc_ArithmeticError, e.what());
    }
  });

  m.def("default_hyperparams", [] {
    const HyperParams h = default_hyperparams();
    py::dict d;
    d["alpha"] = h.alpha;
    d["lambda1"] = h.lambda1;
    d["lambda2"] = h.lambda2;
    d["lambda3"] = h.lambda3;
    d["d"] = h.d;
    d["batch_size"] = h.batch_size;
    d["learning_rate"] = h.learning_rate;
    d["seed"] = h.seed;
    return d;
  });

  m.def(
      "binarize",
      [](double score) {
        return std::string(to_string(binarize(SentimentLabel(score))));
      },
      py::arg("score"),
      "binary class of a sentiment score: positive iff score > 0");

  m.def(
      "normalize_for_contrast",
      [](const DoubleArray& x) {
        EmbeddingMatrix e;
        e.values = to_matrix(x, "embeddings");
        return to_numpy(normalize_for_contrast(e).values);
      },
      py::arg("embeddings"),
      "ReLU then row-wise L2 normalization; vanished rows stay zero");

  m.def(
      "pair_counts",
      [](const std::vector<double>& labels, const std::string& kind) {
        const int k = static_cast<int>(labels.size());
        std::array<Matrix, 3> feats;
        for (auto& f : feats) f = Matrix(k, 1);
        MiniBatch batch = MiniBatch::make(feats, to_labels(labels));
        std::vector<PairIndex> pairs;
        if (kind == "scl")
          pairs = pairs_scl(batch);
        else if (kind == "iamcl")
          pairs = pairs_iamcl(batch);
        else if (kind == "iemcl")
          pairs = pairs_iemcl(batch);
        else
          throw ConfigError("pair kind must be scl, iamcl or iemcl");
        std::vector<std::pair<int, int>> counts;
        counts.reserve(pairs.size());
        for (const PairIndex& p : pairs)
          counts.emplace_back(count_positive(p), count_negative(p));
        return counts;
      },
      py::arg("labels"), py::arg("kind"),
      "per-anchor (positive, negative) partner counts in anchor order");

  m.def(
      "loss_report",
      [](const DoubleArray& language, const DoubleArray& audio,
         const DoubleArray& visual, const std::vector<double>& labels,
         const std::vector<double>& y_pred, double alpha, double lambda1,
         double lambda2, double lambda3, bool enable_scl, bool enable_iamcl,
         bool enable_iemcl, bool enable_refinement,
         const std::string& ratio_form, const std::string& baseline,
         bool triplet_hinge, std::uint64_t baseline_seed) {
        BuiltLosses built;
        build_on_tape(built, language, audio, visual, labels, y_pred,
                      options_from_args(alpha, lambda1, lambda2, lambda3,
                                        enable_scl, enable_iamcl, enable_iemcl,
                                        enable_refinement, ratio_form, baseline,
                                        triplet_hinge, baseline_seed));
        return report_to_dict(built.nodes.report());
      },
      py::arg("language"), py::arg("audio"), py::arg("visual"),
      py::arg("labels"), py::arg("y_pred") = std::vector<double>{},
      py::arg("alpha") = 0.8, py::arg("lambda1") = 1.0,
      py::arg("lambda2") = 1.0, py::arg("lambda3") = 1.0,
      py::arg("enable_scl") = true, py::arg("enable_iamcl") = true,
      py::arg("enable_iemcl") = true, py::arg("enable_refinement") = true,
      py::arg("ratio_form") = "linear", py::arg("baseline") = "none",
      py::arg("triplet_hinge") = false, py::arg("baseline_seed") = 0,
      "per-term objective values for one batch of raw embeddings");

  m.def(
      "loss_gradients",
      [](const DoubleArray& language, const DoubleArray& audio,
         const DoubleArray& visual, const std::vector<double>& labels,
         const std::vector<double>& y_pred, double alpha, double lambda1,
         double lambda2, double lambda3, bool enable_scl, bool enable_iamcl,
         bool enable_iemcl, bool enable_refinement,
         const std::string& ratio_form, const std::string& baseline,
         bool triplet_hinge, std::uint64_t baseline_seed) {
        BuiltLosses built;
        build_on_tape(built, language, audio, visual, labels, y_pred,
                      options_from_args(alpha, lambda1, lambda2, lambda3,
                                        enable_scl, enable_iamcl, enable_iemcl,
                                        enable_refinement, ratio_form, baseline,
                                        triplet_hinge, baseline_seed));
        built.tape.backward(built.nodes.l_overall);
        py::tuple out(3);
        for (int m2 = 0; m2 < 3; ++m2)
          out[m2] = to_numpy(built.leaves[static_cast<std::size_t>(m2)]->grad);
        return out;
      },
      py::arg("language"), py::arg("audio"), py::arg("visual"),
      py::arg("labels"), py::arg("y_pred") = std::vector<double>{},
      py::arg("alpha") = 0.8, py::arg("lambda1") = 1.0,
      py::arg("lambda2") = 1.0, py::arg("lambda3") = 1.0,
      py::arg("enable_scl") = true, py::arg("enable_iamcl") = true,
      py::arg("enable_iemcl") = true, py::arg("enable_refinement") = true,
      py::arg("ratio_form") = "linear", py::arg("baseline") = "none",
      py::arg("triplet_hinge") = false, py::arg("baseline_seed") = 0,
      "d(l_overall)/d(raw embeddings) for one batch, one array per modality");

  m.def(
      "generate_synthetic",
      [](int n_samples, const std::array<int, 3>& dims, double shared_strength,
         double noise_sigma, const std::array<double, 3>& modality_offset,
         std::uint64_t seed) {
        SyntheticSpec spec;
        spec.n_samples = n_samples;
        spec.dims = dims;
        spec.shared_strength = shared_strength;
        spec.noise_sigma = noise_sigma;
        spec.modality_offset = modality_offset;
        spec.seed = seed;
        const Dataset data = generate_synthetic(spec);
        py::dict d;
        d["language"] = to_numpy(data.features[0]);
        d["audio"] = to_numpy(data.features[1]);
        d["visual"] = to_numpy(data.features[2]);
        d["labels"] = data.labels;
        return d;
      },
      py::arg("n_samples") = 2000,
      py::arg("dims") = std::array<int, 3>{20, 12, 16},
      py::arg("shared_strength") = 1.0, py::arg("noise_sigma") = 0.5,
      py::arg("modality_offset") = std::array<double, 3>{0.0, 0.5, 1.0},
      py::arg("seed") = 7,
      "deterministic tri-modal regression data keyed by the seed");

  m.def(
      "compute_metrics",
      [](const std::vector<double>& y_pred, const std::vector<double>& y_true) {
        return metrics_to_dict(compute_metrics(y_pred, y_true));
      },
      py::arg("y_pred"), py::arg("y_true"));

  m.def(
      "silhouette",
      [](const DoubleArray& points, const std::vector<double>& labels) {
        std::vector<BinaryClass> classes;
        classes.reserve(labels.size());
        for (double s : labels) classes.push_back(binarize(SentimentLabel(s)));
        return silhouette(to_matrix(points, "points"), classes);
      },
      py::arg("points"), py::arg("labels"),
      "mean silhouette of the sign classes under Euclidean distance");

  m.def(
      "pca2d",
      [](const DoubleArray& points) {
        return to_numpy(pca2d(to_matrix(points, "points")));
      },
      py::arg("points"), "projection onto the top two principal components");

  m.def(
      "run_experiment",
      [](const std::string& config_json, bool write_files) {
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(config_json);
        } catch (const nlohmann::json::exception& e) {
          throw ConfigError(std::string("bad config JSON: ") + e.what());
        }
        const ExperimentConfig cfg = config_from_json(j);
        ExperimentOutcome out;
        {
          py::gil_scoped_release release;
          out = run_experiment(cfg, write_files);
        }
        py::dict d;
        d["regime"] = out.regime;
        py::dict mean = metrics_to_dict(out.mean_row.metrics);
        mean["silhouette"] = out.mean_row.silhouette;
        d["mean"] = mean;
        py::dict std_d = metrics_to_dict(out.std_row.metrics);
        std_d["silhouette"] = out.std_row.silhouette;
        d["std"] = std_d;
        py::list per_seed;
        for (const SeedOutcome& so : out.per_seed) {
          py::dict sd = metrics_to_dict(so.test);
          sd["seed"] = so.seed;
          sd["silhouette"] = so.fused_silhouette;
          sd["best_epoch"] = so.result.best_epoch;
          per_seed.append(sd);
        }
        d["per_seed"] = per_seed;
        return d;
      },
      py::arg("config_json"), py::arg("write_files") = false,
      "train and evaluate per the JSON config; returns the metric rows");

  m.def(
      "gradient_check",
      [](const std::vector<std::string>& losses, int n_batches, int batch_size,
         int dim, std::uint64_t seed, double alpha, double tol) {
        GradSuiteOptions opts;
        opts.losses = losses;
        opts.n_batches = n_batches;
        opts.batch_size = batch_size;
        opts.dim = dim;
        opts.base_seed = seed;
        opts.alpha = alpha;
        opts.tol = tol;
        GradSuiteResult res;
        {
          py::gil_scoped_release release;
          res = run_gradient_suite(opts);
        }
        py::dict d;
        d["max_rel_err"] = res.max_rel_err;
        d["pass"] = res.pass(tol);
        d["checks_run"] = res.checks_run;
        py::dict per_loss;
        for (const GradCheckCase& c : res.per_loss)
          per_loss[py::str(c.loss)] = c.report.max_rel_err;
        d["per_loss"] = per_loss;
        return d;
      },
      py::arg("losses") = std::vector<std::string>{},
      py::arg("n_batches") = 20, py::arg("batch_size") = 8, py::arg("dim") = 6,
      py::arg("seed") = 1, py::arg("alpha") = 0.8, py::arg("tol") = 1e-4,
      "finite-difference check of the loss surfaces; empty list checks all");

  m.def("gradcheck_loss_names", &gradcheck_loss_names);
}
