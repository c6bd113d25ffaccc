#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"

#include "hycon/experiment.hpp"
#include "hycon/gradcheck.hpp"

namespace fs = std::filesystem;
using namespace hycon;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string model_path;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
  CLI::Option* c =
      cmd->add_option("--config", args.config_path, "path to the config JSON");
  if (config_required) c->required();
  args.seed_opt = cmd->add_option(
      "--seed", args.seed, "replace the config's seed list with this one seed");
  cmd->add_option("--out", args.out_dir, "override the config's output_dir");
}

ExperimentConfig resolve_config(const CommonArgs& args) {
  ExperimentConfig cfg;
  if (!args.config_path.empty()) cfg = load_config(args.config_path);
  if (args.seed_opt != nullptr && args.seed_opt->count() > 0)
    cfg.seeds = {args.seed};
  if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
  return cfg;
}

void ensure_parent_dir(const std::string& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw ConfigError("cannot create directory '" + dir + "': " + ec.message());
}

void print_metrics_line(const MetricsRow& row) {
  std::printf("regime=%s seed=%s acc7=%.4f acc2=%.4f f1=%.4f mae=%.4f "
              "corr=%.4f silhouette=%.4f\n",
              row.regime.c_str(), row.seed.c_str(), row.metrics.acc7,
              row.metrics.acc2, row.metrics.f1, row.metrics.mae,
              row.metrics.corr, row.silhouette);
}

int cmd_generate(const CommonArgs& args) {
  ExperimentConfig cfg = resolve_config(args);
  std::string dest = cfg.data.file;
  if (dest.empty()) {
    if (cfg.output_dir.empty())
      throw ConfigError(
          "generate needs a destination: set data.file or output_dir/--out");
    ensure_parent_dir(cfg.output_dir);
    dest = (fs::path(cfg.output_dir) / "dataset.txt").string();
  } else {
    const fs::path parent = fs::path(dest).parent_path();
    if (!parent.empty()) ensure_parent_dir(parent.string());
  }
  Dataset data = generate_synthetic(cfg.data.synthetic);
  write_feature_table(dest, data);
  std::printf("wrote %s (%d samples)\n", dest.c_str(), data.size());
  return 0;
}

int cmd_train(const CommonArgs& args) {
  ExperimentConfig cfg = resolve_config(args);
  if (cfg.output_dir.empty())
    throw ConfigError("train needs output_dir (config or --out)");
  ExperimentOutcome out = run_experiment(cfg, true);
  for (const SeedOutcome& so : out.per_seed) {
    MetricsRow row;
    row.regime = out.regime;
    row.seed = std::to_string(so.seed);
    row.metrics = so.test;
    row.silhouette = so.fused_silhouette;
    print_metrics_line(row);
  }
  print_metrics_line(out.mean_row);
  print_metrics_line(out.std_row);
  std::printf("wrote %s\n",
              (fs::path(cfg.output_dir) / "metrics.csv").string().c_str());
  return 0;
}

int cmd_eval(const CommonArgs& args) {
  ExperimentConfig cfg = resolve_config(args);
  ModelParams params = load_model(args.model_path);
  Dataset data = obtain_dataset(cfg);
  Split split = make_split(cfg, data.size());
  const std::vector<int>& rows = split.test.empty() ? split.train : split.test;
  MetricsRow row;
  row.regime = "eval";
  row.seed = "-";
  row.metrics = evaluate(params, data, rows);
  row.silhouette = fused_silhouette(params, data, rows);
  print_metrics_line(row);
  if (!cfg.output_dir.empty()) {
    ensure_parent_dir(cfg.output_dir);
    const std::string path =
        (fs::path(cfg.output_dir) / "eval_metrics.csv").string();
    write_metrics_csv(path, {row});
    std::printf("wrote %s\n", path.c_str());
  }
  return 0;
}

int cmd_gradcheck(const CommonArgs& args, double tol,
                  const std::string& corrupt) {
  ExperimentConfig cfg = resolve_config(args);
  GradSuiteOptions opts;
  opts.tol = tol;
  opts.corrupt = corrupt;
  opts.alpha = cfg.hyper.alpha;
  opts.ratio_form = cfg.loss.ratio_form;
  opts.triplet_hinge = cfg.loss.triplet_hinge;
  if (args.seed_opt != nullptr && args.seed_opt->count() > 0)
    opts.base_seed = args.seed;

  if (cfg.loss.baseline != BaselineLoss::none) {
    opts.losses = {"pred", to_string(cfg.loss.baseline)};
  } else {
    opts.losses = {"pred"};
    if (cfg.loss.enable_scl) opts.losses.push_back("scl");
    if (cfg.loss.enable_iamcl) opts.losses.push_back("iamcl");
    if (cfg.loss.enable_iemcl) opts.losses.push_back("iemcl");
    for (const char* b : {"classical", "triplet", "hard_triplet", "npair"})
      opts.losses.push_back(b);
  }

  GradSuiteResult res = run_gradient_suite(opts);
  for (const GradCheckCase& c : res.per_loss)
    std::printf("%-13s max rel err %.3e  (seed %llu, coord %d)\n",
                c.loss.c_str(), c.report.max_rel_err,
                static_cast<unsigned long long>(c.seed), c.report.worst_index);
  const bool pass = res.pass(tol);
  std::printf("%zu losses checked, max rel err %.3e, %s\n",
              res.per_loss.size(), res.max_rel_err, pass ? "PASS" : "FAIL");
  if (!pass) {
    const GradCheckCase* worst = &res.per_loss.front();
    for (const GradCheckCase& c : res.per_loss)
      if (c.report.max_rel_err > worst->report.max_rel_err) worst = &c;
    std::fprintf(stderr,
                 "gradcheck failed: loss %s, seed %llu, coordinate %d "
                 "(analytic %.6e vs numeric %.6e)\n",
                 worst->loss.c_str(),
                 static_cast<unsigned long long>(worst->seed),
                 worst->report.worst_index, worst->report.analytic_at_worst,
                 worst->report.numeric_at_worst);
    return 2;
  }
  return 0;
}

int cmd_export(const CommonArgs& args) {
  ExperimentConfig cfg = resolve_config(args);
  if (cfg.output_dir.empty())
    throw ConfigError("export-embeddings needs output_dir (config or --out)");
  ModelParams params = load_model(args.model_path);
  ensure_parent_dir(cfg.output_dir);
  const std::string emb = (fs::path(cfg.output_dir) / "embeddings.csv").string();
  const std::string pca =
      (fs::path(cfg.output_dir) / "embeddings_pca.csv").string();
  export_embeddings(cfg, params, emb, pca);
  std::printf("wrote %s and %s\n", emb.c_str(), pca.c_str());
  return 0;
}

int cmd_sweep(const CommonArgs& args) {
  ExperimentConfig cfg = resolve_config(args);
  if (cfg.output_dir.empty())
    throw ConfigError("sweep needs output_dir (config or --out)");
  std::vector<MetricsRow> rows = run_sweep(cfg, true);
  for (const MetricsRow& r : rows) print_metrics_line(r);
  std::printf("wrote %s\n",
              (fs::path(cfg.output_dir) / "sweep.csv").string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tri-modal contrastive representation toolkit"};
  app.require_subcommand(1);

  CommonArgs gen_args, train_args, eval_args, grad_args, export_args, sweep_args;
  double tol = 1e-4;
  std::string corrupt;

  CLI::App* generate =
      app.add_subcommand("generate", "write a synthetic dataset file");
  add_common(generate, gen_args, true);

  CLI::App* train = app.add_subcommand(
      "train", "train per seed, write models, metrics and trajectories");
  add_common(train, train_args, true);

  CLI::App* eval =
      app.add_subcommand("eval", "evaluate a saved model on the test split");
  add_common(eval, eval_args, true);
  eval->add_option("--model", eval_args.model_path, "model JSON file")
      ->required();

  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck", "finite-difference check of every enabled loss");
  add_common(gradcheck, grad_args, false);
  gradcheck->add_option("--tol", tol, "max allowed relative error");
  gradcheck->add_option("--corrupt-loss", corrupt)->group("");  // test hook

  CLI::App* export_cmd = app.add_subcommand(
      "export-embeddings", "dump embeddings plus 2-D projections");
  add_common(export_cmd, export_args, true);
  export_cmd->add_option("--model", export_args.model_path, "model JSON file")
      ->required();

  CLI::App* sweep = app.add_subcommand(
      "sweep", "grid over alpha, lambda or loss kind; one metrics row each");
  add_common(sweep, sweep_args, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // bad usage is a validation error
  }

  try {
    if (generate->parsed()) return cmd_generate(gen_args);
    if (train->parsed()) return cmd_train(train_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (gradcheck->parsed()) return cmd_gradcheck(grad_args, tol, corrupt);
    if (export_cmd->parsed()) return cmd_export(export_args);
    if (sweep->parsed()) return cmd_sweep(sweep_args);
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
