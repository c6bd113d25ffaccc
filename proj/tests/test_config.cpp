#include "doctest.h"

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "hycon/config.hpp"

using namespace hycon;
using nlohmann::json;

namespace {

std::string test_dir() {
  static const std::string dir = [] {
    std::string d = "/tmp/hycon_config_test_" + std::to_string(::getpid());
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

std::string message_of(const json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("an empty object yields the documented defaults") {
  const ExperimentConfig c = config_from_json(json::object());
  CHECK(c.hyper.alpha == 0.8);
  CHECK(c.hyper.lambda1 == 1.0);
  CHECK(c.hyper.lambda2 == 1.0);
  CHECK(c.hyper.lambda3 == 1.0);
  CHECK(c.hyper.d == 50);
  CHECK(c.hyper.batch_size == 32);
  CHECK(c.hyper.learning_rate == 1e-5);
  CHECK(c.epochs == 50);
  CHECK(c.patience == 10);
  REQUIRE(c.seeds.size() == 1);
  CHECK(c.seeds[0] == 1);
  CHECK(c.data.synthetic.n_samples == 2000);
  CHECK(c.data.train_frac == 0.7);
  CHECK(c.data.val_frac == 0.1);
  CHECK_FALSE(c.data.use_file);
  CHECK(c.loss.enable_scl);
  CHECK(c.loss.enable_iamcl);
  CHECK(c.loss.enable_iemcl);
  CHECK(c.loss.enable_refinement);
  CHECK(c.loss.baseline == BaselineLoss::none);
  CHECK(c.model.fuse_normalized);
  CHECK(c.sweep.kind.empty());
}

TEST_CASE("shared hyperparameters are mirrored into the loss and model views") {
  json j;
  j["hyperparams"] = {{"alpha", 0.6}, {"lambda1", 0.5}, {"lambda2", 1.5},
                      {"lambda3", 2.0}, {"d", 12}};
  const ExperimentConfig c = config_from_json(j);
  CHECK(c.loss.alpha == 0.6);
  CHECK(c.loss.lambda1 == 0.5);
  CHECK(c.loss.lambda2 == 1.5);
  CHECK(c.loss.lambda3 == 2.0);
  CHECK(c.model.embed == 12);

  const TrainOptions t = c.train_options();
  CHECK(t.loss.alpha == 0.6);
  CHECK(t.model.embed == 12);
  CHECK(t.batch_size == 32);
  CHECK(t.seed == 1);
}

TEST_CASE("unknown keys are reported by their full path") {
  json j;
  j["hyperparams"] = {{"alhpa", 0.6}};
  CHECK(message_of(j).find("unknown key hyperparams.alhpa") !=
        std::string::npos);
  json top;
  top["hypreparams"] = json::object();
  CHECK(message_of(top).find("unknown key config.hypreparams") !=
        std::string::npos);
  json sweep;
  sweep["sweep"] = {{"alpha", {0.5}}};
  CHECK(message_of(sweep).find("unknown key sweep.alpha") != std::string::npos);
}

TEST_CASE("type mismatches are reported per field") {
  json j;
  j["hyperparams"] = {{"alpha", "high"}};
  CHECK(message_of(j).find("hyperparams.alpha has the wrong type") !=
        std::string::npos);
  json e;
  e["losses"] = {{"ratio_form", 3}};
  CHECK(message_of(e).find("losses.ratio_form must be a string") !=
        std::string::npos);
  json u;
  u["losses"] = {{"ratio_form", "cubic"}};
  CHECK(message_of(u).find("losses.ratio_form") != std::string::npos);
  CHECK(message_of(u).find("cubic") != std::string::npos);
}

TEST_CASE("every violation is reported in one throw") {
  json j;
  j["hyperparams"] = {{"alpha", 1.5}, {"d", 0}, {"batch_size", 1}};
  j["train"] = {{"epochs", 0}};
  const std::string msg = message_of(j);
  CHECK(msg.find("hyperparams.alpha must be in [0, 1]") != std::string::npos);
  CHECK(msg.find("hyperparams.d must be >= 1") != std::string::npos);
  CHECK(msg.find("batch_size must be >= 2") != std::string::npos);
  CHECK(msg.find("train.epochs must be >= 1") != std::string::npos);
}

TEST_CASE("split counts must be set together") {
  json j;
  j["data"] = {{"split", {{"train_count", 100}}}};
  CHECK(message_of(j).find("must be set together") != std::string::npos);
  json ok;
  ok["data"] = {{"split",
                 {{"train_count", 100}, {"val_count", 10}, {"test_count", 20}}}};
  CHECK_NOTHROW(config_from_json(ok));
}

TEST_CASE("sweep settings are validated") {
  json j;
  j["sweep"] = {{"kind", "gamma"}};
  CHECK(message_of(j).find("sweep.kind must be one of alpha, lambda, loss") !=
        std::string::npos);
  json a;
  a["sweep"] = {{"kind", "alpha"}, {"alphas", {0.5, 1.5}}};
  CHECK(message_of(a).find("sweep.alphas values must be in [0, 1]") !=
        std::string::npos);
  json l;
  l["sweep"] = {{"kind", "lambda"}, {"lambdas", json::array()}};
  CHECK(message_of(l).find("sweep.lambdas must be nonempty") !=
        std::string::npos);
}

TEST_CASE("the regime label reflects the active terms") {
  ExperimentConfig c;
  CHECK(c.regime_name() == "hycon");

  c.loss.enable_iemcl = false;
  CHECK(c.regime_name() == "iamcl+scl");
  c.loss.enable_iemcl = true;

  c.hyper.lambda2 = 0.0;  // a zero weight removes the term from the label
  CHECK(c.regime_name() == "iamcl+scl");
  c.hyper.lambda2 = 1.0;

  c.loss.enable_scl = false;
  c.loss.enable_iamcl = false;
  CHECK(c.regime_name() == "iemcl");
  c.loss.enable_iemcl = false;
  CHECK(c.regime_name() == "prediction-only");

  c.loss.enable_scl = c.loss.enable_iamcl = c.loss.enable_iemcl = true;
  c.loss.enable_refinement = false;
  CHECK(c.regime_name() == "hycon-norefine");
  c.loss.ratio_form = RatioForm::log_form;
  CHECK(c.regime_name() == "hycon-norefine-log");
  c.loss.enable_refinement = true;
  CHECK(c.regime_name() == "hycon-log");
  c.loss.ratio_form = RatioForm::linear;

  c.loss.baseline = BaselineLoss::hard_triplet;
  CHECK(c.regime_name() == "hard-triplet");
  c.loss.baseline = BaselineLoss::npair;
  CHECK(c.regime_name() == "n-pair");
  c.loss.baseline = BaselineLoss::classical;
  CHECK(c.regime_name() == "classical");
  c.loss.baseline = BaselineLoss::triplet;
  CHECK(c.regime_name() == "triplet");
}

TEST_CASE("a config survives the JSON round trip") {
  ExperimentConfig c;
  c.hyper.alpha = 0.65;
  c.hyper.lambda1 = 0.25;
  c.hyper.d = 16;
  c.hyper.batch_size = 8;
  c.hyper.learning_rate = 3e-4;
  c.model.hidden = 24;
  c.model.fusion = FusionKind::tensor;
  c.model.fuse_normalized = false;
  c.loss.enable_scl = false;
  c.loss.ratio_form = RatioForm::log_form;
  c.loss.triplet_hinge = true;
  c.data.synthetic.n_samples = 500;
  c.data.synthetic.dims = {10, 6, 8};
  c.data.synthetic.noise_sigma = 1.25;
  c.data.train_frac = 0.6;
  c.data.val_frac = 0.2;
  c.data.split_seed = 42;
  c.epochs = 7;
  c.patience = 2;
  c.seeds = {4, 5, 6};
  c.output_dir = "/tmp/somewhere";
  c.sweep.kind = "lambda";
  c.sweep.lambdas = {{1.0, 0.5, 0.25}, {0.0, 1.0, 2.0}};

  // mirroring happens on the way back in
  const ExperimentConfig r = config_from_json(to_json(c));
  CHECK(r.hyper.alpha == c.hyper.alpha);
  CHECK(r.hyper.lambda1 == c.hyper.lambda1);
  CHECK(r.hyper.d == c.hyper.d);
  CHECK(r.hyper.batch_size == c.hyper.batch_size);
  CHECK(r.hyper.learning_rate == c.hyper.learning_rate);
  CHECK(r.model.hidden == c.model.hidden);
  CHECK(r.model.fusion == c.model.fusion);
  CHECK(r.model.fuse_normalized == c.model.fuse_normalized);
  CHECK(r.model.embed == c.hyper.d);
  CHECK(r.loss.enable_scl == c.loss.enable_scl);
  CHECK(r.loss.ratio_form == c.loss.ratio_form);
  CHECK(r.loss.triplet_hinge == c.loss.triplet_hinge);
  CHECK(r.loss.alpha == c.hyper.alpha);
  CHECK(r.data.synthetic.n_samples == c.data.synthetic.n_samples);
  CHECK(r.data.synthetic.dims == c.data.synthetic.dims);
  CHECK(r.data.synthetic.noise_sigma == c.data.synthetic.noise_sigma);
  CHECK(r.data.train_frac == c.data.train_frac);
  CHECK(r.data.val_frac == c.data.val_frac);
  CHECK(r.data.split_seed == c.data.split_seed);
  CHECK(r.epochs == c.epochs);
  CHECK(r.patience == c.patience);
  CHECK(r.seeds == c.seeds);
  CHECK(r.output_dir == c.output_dir);
  CHECK(r.sweep.kind == c.sweep.kind);
  CHECK(r.sweep.lambdas == c.sweep.lambdas);
}

TEST_CASE("configs load from and write to files") {
  const std::string p = test_dir() + "/config.json";
  ExperimentConfig c;
  c.hyper.alpha = 0.55;
  c.seeds = {9};
  write_config(p, c);
  const ExperimentConfig r = load_config(p);
  CHECK(r.hyper.alpha == 0.55);
  CHECK(r.seeds == std::vector<std::uint64_t>{9});

  CHECK_THROWS_WITH_AS(load_config(test_dir() + "/missing.json"),
                       doctest::Contains("cannot open config"), ConfigError);

  const std::string bad = test_dir() + "/bad.json";
  std::ofstream(bad) << "{ nope";
  CHECK_THROWS_WITH_AS(load_config(bad), doctest::Contains("bad JSON"),
                       ConfigError);
}

TEST_CASE("a file-backed data section flips the source flag") {
  json j;
  j["data"] = {{"file", "/tmp/features.txt"}};
  const ExperimentConfig c = config_from_json(j);
  CHECK(c.data.use_file);
  CHECK(c.data.file == "/tmp/features.txt");
}

}  // TEST_SUITE
