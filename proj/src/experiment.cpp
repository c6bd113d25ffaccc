#include "hycon/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace hycon {

namespace fs = std::filesystem;

Dataset obtain_dataset(const ExperimentConfig& config) {
  if (config.data.use_file) return read_feature_table(config.data.file);
  return generate_synthetic(config.data.synthetic);
}

Split make_split(const ExperimentConfig& config, int n) {
  const DataConfig& d = config.data;
  if (d.train_count >= 0 && d.val_count >= 0 && d.test_count >= 0)
    return split_dataset_counts(n, d.train_count, d.val_count, d.test_count,
                                d.split_seed);
  return split_dataset(n, d.train_frac, d.val_frac, d.split_seed);
}

namespace {

std::array<int, 3> dataset_dims(const Dataset& data) {
  return {data.features[0].cols(), data.features[1].cols(),
          data.features[2].cols()};
}

}  // namespace

double fused_silhouette(const ModelParams& params, const Dataset& data,
                        const std::vector<int>& rows) {
  if (rows.empty()) return 0.0;
  MiniBatch mb = take_batch(data, rows);
  ForwardValues fv = forward_values(
      params, {&mb.features[0], &mb.features[1], &mb.features[2]});
  try {
    return silhouette(fv.fused, mb.classes);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "warning: silhouette unavailable (%s); reporting 0\n",
                 e.what());
    return 0.0;
  }
}

namespace {

void write_trajectory_csv(const std::string& path,
                          const std::vector<EpochLog>& trajectory) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << "epoch,l_scl,l_iamcl,l_iamcl_refine,l_iemcl,l_iemcl_refine,"
         "l_hybrid,l_pred,l_overall,val_mae\n";
  for (const EpochLog& e : trajectory) {
    const LossReport& r = e.train_mean;
    out << e.epoch << ',' << format_double(r.l_scl) << ','
        << format_double(r.l_iamcl) << ',' << format_double(r.l_iamcl_refine)
        << ',' << format_double(r.l_iemcl) << ','
        << format_double(r.l_iemcl_refine) << ',' << format_double(r.l_hybrid)
        << ',' << format_double(r.l_pred) << ',' << format_double(r.l_overall)
        << ',' << format_double(e.val_mae) << '\n';
  }
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

MetricsRow aggregate_row(const std::string& regime,
                         const std::vector<SeedOutcome>& outcomes,
                         bool stddev) {
  const double n = static_cast<double>(outcomes.size());
  auto moments = [&](auto pick) {
    double mean = 0.0;
    for (const SeedOutcome& o : outcomes) mean += pick(o);
    mean /= n;
    if (!stddev) return mean;
    double var = 0.0;
    for (const SeedOutcome& o : outcomes) {
      const double d = pick(o) - mean;
      var += d * d;
    }
    return std::sqrt(var / n);
  };
  MetricsRow row;
  row.regime = regime;
  row.seed = stddev ? "std" : "mean";
  row.metrics.acc7 = moments([](const SeedOutcome& o) { return o.test.acc7; });
  row.metrics.acc2 = moments([](const SeedOutcome& o) { return o.test.acc2; });
  row.metrics.f1 = moments([](const SeedOutcome& o) { return o.test.f1; });
  row.metrics.mae = moments([](const SeedOutcome& o) { return o.test.mae; });
  row.metrics.corr = moments([](const SeedOutcome& o) { return o.test.corr; });
  row.silhouette =
      moments([](const SeedOutcome& o) { return o.fused_silhouette; });
  return row;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " +
                            ec.message());
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& config,
                                 bool write_files) {
  config.validate();
  if (write_files && config.output_dir.empty())
    throw ConfigError("output_dir must be set to write experiment files");

  Dataset data = obtain_dataset(config);
  Split split = make_split(config, data.size());

  ExperimentOutcome out;
  out.regime = config.regime_name();

  if (write_files) {
    ensure_dir(config.output_dir);
    write_config((fs::path(config.output_dir) / "config_effective.json").string(),
                 config);
  }

  for (std::uint64_t seed : config.seeds) {
    TrainOptions opts = config.train_options();
    opts.model.input_dims = dataset_dims(data);
    opts.seed = seed;
    opts.loss.baseline_seed = seed;

    SeedOutcome so;
    so.seed = seed;
    so.result = train(data, split, opts);
    const std::vector<int>& eval_rows =
        split.test.empty() ? split.train : split.test;
    so.test = evaluate(so.result.params, data, eval_rows);
    so.fused_silhouette = fused_silhouette(so.result.params, data, eval_rows);
    out.per_seed.push_back(std::move(so));
  }

  out.mean_row = aggregate_row(out.regime, out.per_seed, false);
  out.std_row = aggregate_row(out.regime, out.per_seed, true);

  if (write_files) {
    std::vector<MetricsRow> rows;
    for (const SeedOutcome& so : out.per_seed) {
      MetricsRow r;
      r.regime = out.regime;
      r.seed = std::to_string(so.seed);
      r.metrics = so.test;
      r.silhouette = so.fused_silhouette;
      rows.push_back(r);
      save_model((fs::path(config.output_dir) /
                  ("model_seed" + std::to_string(so.seed) + ".json"))
                     .string(),
                 so.result.params);
      write_trajectory_csv((fs::path(config.output_dir) /
                            ("trajectory_seed" + std::to_string(so.seed) + ".csv"))
                               .string(),
                           so.result.trajectory);
    }
    rows.push_back(out.mean_row);
    rows.push_back(out.std_row);
    write_metrics_csv((fs::path(config.output_dir) / "metrics.csv").string(),
                      rows);
  }
  return out;
}

std::vector<MetricsRow> run_sweep(const ExperimentConfig& config,
                                  bool write_files) {
  config.validate();
  if (config.sweep.kind.empty())
    throw ConfigError("sweep.kind must be set (alpha, lambda or loss)");
  if (write_files && config.output_dir.empty())
    throw ConfigError("output_dir must be set to write sweep files");

  struct Point {
    std::string label;
    ExperimentConfig cfg;
  };
  std::vector<Point> grid;

  if (config.sweep.kind == "alpha") {
    for (double a : config.sweep.alphas) {
      ExperimentConfig c = config;
      c.hyper.alpha = a;
      c.loss.alpha = a;
      grid.push_back({"alpha=" + format_double_short(a), std::move(c)});
    }
  } else if (config.sweep.kind == "lambda") {
    for (const auto& l : config.sweep.lambdas) {
      ExperimentConfig c = config;
      c.hyper.lambda1 = l[0];
      c.hyper.lambda2 = l[1];
      c.hyper.lambda3 = l[2];
      c.loss.lambda1 = l[0];
      c.loss.lambda2 = l[1];
      c.loss.lambda3 = l[2];
      grid.push_back({"lambda=" + format_double_short(l[0]) + ";" +
                          format_double_short(l[1]) + ";" +
                          format_double_short(l[2]),
                      std::move(c)});
    }
  } else {  // loss: the four baselines plus the full hybrid objective
    for (BaselineLoss b : {BaselineLoss::triplet, BaselineLoss::hard_triplet,
                           BaselineLoss::npair, BaselineLoss::classical}) {
      ExperimentConfig c = config;
      c.loss.baseline = b;
      grid.push_back({display_name(b), std::move(c)});
    }
    ExperimentConfig c = config;
    c.loss.baseline = BaselineLoss::none;
    c.loss.enable_scl = c.loss.enable_iamcl = c.loss.enable_iemcl = true;
    c.loss.enable_refinement = true;
    grid.push_back({"hycon", std::move(c)});
  }

  std::vector<MetricsRow> rows;
  for (Point& p : grid) {
    p.cfg.output_dir.clear();  // sub-runs write nothing themselves
    ExperimentOutcome o = run_experiment(p.cfg, false);
    MetricsRow row = o.mean_row;
    row.regime = p.label;
    rows.push_back(row);
  }

  if (write_files) {
    ensure_dir(config.output_dir);
    write_config((fs::path(config.output_dir) / "config_effective.json").string(),
                 config);
    write_metrics_csv((fs::path(config.output_dir) / "sweep.csv").string(), rows);
  }
  return rows;
}

void export_embeddings(const ExperimentConfig& config,
                       const ModelParams& params,
                       const std::string& embeddings_path,
                       const std::string& pca_path) {
  config.validate();
  if (params.config.embed != config.hyper.d)
    throw ConfigError("model embedding width " +
                      std::to_string(params.config.embed) +
                      " does not match config d=" + std::to_string(config.hyper.d));

  Dataset data = obtain_dataset(config);
  Split split = make_split(config, data.size());

  std::vector<std::string> split_tag(static_cast<std::size_t>(data.size()),
                                     "unused");
  for (int i : split.train) split_tag[static_cast<std::size_t>(i)] = "train";
  for (int i : split.val) split_tag[static_cast<std::size_t>(i)] = "val";
  for (int i : split.test) split_tag[static_cast<std::size_t>(i)] = "test";

  // One forward pass over the whole dataset, chunked like predict().
  const int n = data.size();
  const int d = params.config.embed;
  const int fw = fused_width(params.config);
  std::array<Matrix, 3> z;
  for (auto& m : z) m = Matrix(n, d);
  Matrix fused(n, fw);
  {
    const int chunk = std::max(1, 4000000 / std::max(1, fw));
    for (int start = 0; start < n; start += chunk) {
      const int stop = std::min(n, start + chunk);
      std::vector<int> rows;
      rows.reserve(static_cast<std::size_t>(stop - start));
      for (int i = start; i < stop; ++i) rows.push_back(i);
      MiniBatch mb = take_batch(data, rows);
      ForwardValues fv = forward_values(
          params, {&mb.features[0], &mb.features[1], &mb.features[2]});
      for (int r = 0; r < stop - start; ++r) {
        for (int g = 0; g < 3; ++g)
          for (int c = 0; c < d; ++c)
            z[static_cast<std::size_t>(g)](start + r, c) =
                fv.normalized[static_cast<std::size_t>(g)](r, c);
        for (int c = 0; c < fw; ++c) fused(start + r, c) = fv.fused(r, c);
      }
    }
  }

  // Embedding rows: per sample, the three modality vectors then the fused
  // vector. Coordinate columns run to the widest group; fused rows are the
  // only ones that can exceed the embedding width.
  {
    std::ofstream out(embeddings_path);
    if (!out)
      throw ConfigError("cannot open '" + embeddings_path + "' for writing");
    out << "sample_id,split,label,class,modality_or_fused";
    for (int c = 0; c < std::max(d, fw); ++c) out << ",x" << c;
    out << '\n';
    for (int i = 0; i < n; ++i) {
      const double label = data.labels[static_cast<std::size_t>(i)];
      const char* cls = to_string(binarize(SentimentLabel(label)));
      auto prefix = [&](const char* group) {
        out << i << ',' << split_tag[static_cast<std::size_t>(i)] << ','
            << format_double(label) << ',' << cls << ',' << group;
      };
      for (Modality m : kModalities) {
        prefix(to_string(m));
        const Matrix& zm = z[static_cast<std::size_t>(index_of(m))];
        for (int c = 0; c < d; ++c) out << ',' << format_double(zm(i, c));
        out << '\n';
      }
      prefix("fused");
      for (int c = 0; c < fw; ++c) out << ',' << format_double(fused(i, c));
      out << '\n';
    }
    if (!out) throw ConfigError("failed writing '" + embeddings_path + "'");
  }

  // Companion projection file, row-aligned with the embeddings file: each
  // group gets its own 2-D principal-component basis.
  {
    std::array<Matrix, 4> coords;
    for (int g = 0; g < 3; ++g)
      coords[static_cast<std::size_t>(g)] = pca2d(z[static_cast<std::size_t>(g)]);
    coords[3] = pca2d(fused);
    std::ofstream out(pca_path);
    if (!out) throw ConfigError("cannot open '" + pca_path + "' for writing");
    out << "sample_id,pc1,pc2\n";
    for (int i = 0; i < n; ++i)
      for (int g = 0; g < 4; ++g)
        out << i << ',' << format_double(coords[static_cast<std::size_t>(g)](i, 0))
            << ',' << format_double(coords[static_cast<std::size_t>(g)](i, 1))
            << '\n';
    if (!out) throw ConfigError("failed writing '" + pca_path + "'");
  }
}

}  // namespace hycon
