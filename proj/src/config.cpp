#include "hycon/config.hpp"

#include <fstream>
#include <set>

namespace hycon {

namespace {

using nlohmann::json;

void note_unknown_keys(const json& j, const char* section,
                       const std::set<std::string>& allowed,
                       std::vector<std::string>& errs) {
  if (!j.is_object()) {
    errs.push_back(std::string(section) + " must be a JSON object");
    return;
  }
  for (const auto& [key, _] : j.items())
    if (allowed.find(key) == allowed.end())
      errs.push_back(std::string("unknown key ") + section + "." + key);
}

template <typename T>
void read_field(const json& j, const char* section, const char* key, T& into,
                std::vector<std::string>& errs) {
  if (!j.is_object() || !j.contains(key)) return;
  try {
    into = j.at(key).get<T>();
  } catch (const json::exception&) {
    errs.push_back(std::string(section) + "." + key + " has the wrong type");
  }
}

template <typename Enum>
void read_enum(const json& j, const char* section, const char* key,
               Enum (*parse)(const std::string&), Enum& into,
               std::vector<std::string>& errs) {
  if (!j.is_object() || !j.contains(key)) return;
  std::string raw;
  try {
    raw = j.at(key).get<std::string>();
  } catch (const json::exception&) {
    errs.push_back(std::string(section) + "." + key + " must be a string");
    return;
  }
  try {
    into = parse(raw);
  } catch (const ConfigError& e) {
    errs.push_back(std::string(section) + "." + key + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  std::vector<std::string> errs;
  ExperimentConfig c;

  note_unknown_keys(j, "config",
                    {"hyperparams", "model", "losses", "data", "train", "seeds",
                     "output_dir", "sweep"},
                    errs);

  if (j.contains("hyperparams")) {
    const json& h = j.at("hyperparams");
    note_unknown_keys(h, "hyperparams",
                      {"alpha", "lambda1", "lambda2", "lambda3", "d",
                       "batch_size", "learning_rate"},
                      errs);
    read_field(h, "hyperparams", "alpha", c.hyper.alpha, errs);
    read_field(h, "hyperparams", "lambda1", c.hyper.lambda1, errs);
    read_field(h, "hyperparams", "lambda2", c.hyper.lambda2, errs);
    read_field(h, "hyperparams", "lambda3", c.hyper.lambda3, errs);
    read_field(h, "hyperparams", "d", c.hyper.d, errs);
    read_field(h, "hyperparams", "batch_size", c.hyper.batch_size, errs);
    read_field(h, "hyperparams", "learning_rate", c.hyper.learning_rate, errs);
  }

  if (j.contains("model")) {
    const json& m = j.at("model");
    note_unknown_keys(m, "model", {"hidden", "fusion"}, errs);
    read_field(m, "model", "hidden", c.model.hidden, errs);
    read_enum(m, "model", "fusion", fusion_from_string, c.model.fusion, errs);
  }

  if (j.contains("losses")) {
    const json& l = j.at("losses");
    note_unknown_keys(l, "losses",
                      {"enable_scl", "enable_iamcl", "enable_iemcl",
                       "enable_refinement", "ratio_form", "baseline_loss",
                       "triplet_hinge", "fuse_normalized"},
                      errs);
    read_field(l, "losses", "enable_scl", c.loss.enable_scl, errs);
    read_field(l, "losses", "enable_iamcl", c.loss.enable_iamcl, errs);
    read_field(l, "losses", "enable_iemcl", c.loss.enable_iemcl, errs);
    read_field(l, "losses", "enable_refinement", c.loss.enable_refinement, errs);
    read_enum(l, "losses", "ratio_form", ratio_form_from_string,
              c.loss.ratio_form, errs);
    read_enum(l, "losses", "baseline_loss", baseline_from_string,
              c.loss.baseline, errs);
    read_field(l, "losses", "triplet_hinge", c.loss.triplet_hinge, errs);
    read_field(l, "losses", "fuse_normalized", c.model.fuse_normalized, errs);
  }

  if (j.contains("data")) {
    const json& d = j.at("data");
    note_unknown_keys(d, "data", {"synthetic", "file", "split"}, errs);
    if (d.is_object() && d.contains("synthetic")) {
      const json& s = d.at("synthetic");
      note_unknown_keys(s, "data.synthetic",
                        {"n_samples", "dims", "shared_strength", "noise_sigma",
                         "modality_offset", "seed"},
                        errs);
      read_field(s, "data.synthetic", "n_samples", c.data.synthetic.n_samples, errs);
      read_field(s, "data.synthetic", "dims", c.data.synthetic.dims, errs);
      read_field(s, "data.synthetic", "shared_strength",
                 c.data.synthetic.shared_strength, errs);
      read_field(s, "data.synthetic", "noise_sigma", c.data.synthetic.noise_sigma,
                 errs);
      read_field(s, "data.synthetic", "modality_offset",
                 c.data.synthetic.modality_offset, errs);
      read_field(s, "data.synthetic", "seed", c.data.synthetic.seed, errs);
    }
    read_field(d, "data", "file", c.data.file, errs);
    c.data.use_file = !c.data.file.empty();
    if (d.is_object() && d.contains("split")) {
      const json& s = d.at("split");
      note_unknown_keys(s, "data.split",
                        {"train_frac", "val_frac", "train_count", "val_count",
                         "test_count", "split_seed"},
                        errs);
      read_field(s, "data.split", "train_frac", c.data.train_frac, errs);
      read_field(s, "data.split", "val_frac", c.data.val_frac, errs);
      read_field(s, "data.split", "train_count", c.data.train_count, errs);
      read_field(s, "data.split", "val_count", c.data.val_count, errs);
      read_field(s, "data.split", "test_count", c.data.test_count, errs);
      read_field(s, "data.split", "split_seed", c.data.split_seed, errs);
    }
  }

  if (j.contains("train")) {
    const json& t = j.at("train");
    note_unknown_keys(t, "train", {"epochs", "patience"}, errs);
    read_field(t, "train", "epochs", c.epochs, errs);
    read_field(t, "train", "patience", c.patience, errs);
  }

  read_field(j, "config", "seeds", c.seeds, errs);
  read_field(j, "config", "output_dir", c.output_dir, errs);

  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    note_unknown_keys(s, "sweep", {"kind", "alphas", "lambdas"}, errs);
    read_field(s, "sweep", "kind", c.sweep.kind, errs);
    read_field(s, "sweep", "alphas", c.sweep.alphas, errs);
    read_field(s, "sweep", "lambdas", c.sweep.lambdas, errs);
  }

  // Mirror the shared hyperparameters into the loss/model views so every
  // consumer sees one set of values.
  c.loss.alpha = c.hyper.alpha;
  c.loss.lambda1 = c.hyper.lambda1;
  c.loss.lambda2 = c.hyper.lambda2;
  c.loss.lambda3 = c.hyper.lambda3;
  c.model.embed = c.hyper.d;

  if (!errs.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errs) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  c.validate();
  return c;
}

std::vector<std::string> ExperimentConfig::violations() const {
  std::vector<std::string> v = hyper.violations();
  for (const auto& s : model.violations()) v.push_back(s);
  for (const auto& s : loss.violations()) v.push_back(s);

  if (data.use_file) {
    if (data.file.empty()) v.push_back("data.file must be a nonempty path");
  } else {
    for (const auto& s : data.synthetic.violations()) v.push_back(s);
  }
  const bool any_count =
      data.train_count >= 0 || data.val_count >= 0 || data.test_count >= 0;
  const bool all_counts =
      data.train_count >= 0 && data.val_count >= 0 && data.test_count >= 0;
  if (any_count && !all_counts)
    v.push_back("data.split: train_count, val_count and test_count must be set together");
  if (!any_count) {
    if (data.train_frac < 0.0 || data.val_frac < 0.0 ||
        data.train_frac + data.val_frac > 1.0)
      v.push_back("data.split: fractions must be nonnegative and sum to <= 1");
  }
  if (epochs < 1) v.push_back("train.epochs must be >= 1");
  if (seeds.empty()) v.push_back("seeds must contain at least one seed");
  if (!(sweep.kind.empty() || sweep.kind == "alpha" || sweep.kind == "lambda" ||
        sweep.kind == "loss"))
    v.push_back("sweep.kind must be one of alpha, lambda, loss");
  if (sweep.kind == "alpha") {
    if (sweep.alphas.empty()) v.push_back("sweep.alphas must be nonempty");
    for (double a : sweep.alphas)
      if (!(a >= 0.0 && a <= 1.0)) {
        v.push_back("sweep.alphas values must be in [0, 1]");
        break;
      }
  }
  if (sweep.kind == "lambda") {
    if (sweep.lambdas.empty()) v.push_back("sweep.lambdas must be nonempty");
    for (const auto& l : sweep.lambdas)
      if (l[0] < 0.0 || l[1] < 0.0 || l[2] < 0.0) {
        v.push_back("sweep.lambdas values must be nonnegative");
        break;
      }
  }
  return v;
}

void ExperimentConfig::validate() const {
  auto v = violations();
  if (!v.empty()) {
    std::string msg = "invalid config:";
    for (const auto& s : v) msg += "\n  - " + s;
    throw ConfigError(msg);
  }
}

std::string ExperimentConfig::regime_name() const {
  if (loss.baseline != BaselineLoss::none) return display_name(loss.baseline);
  std::vector<std::string> parts;
  if (loss.enable_iamcl && hyper.lambda1 != 0.0) parts.push_back("iamcl");
  if (loss.enable_iemcl && hyper.lambda2 != 0.0) parts.push_back("iemcl");
  if (loss.enable_scl && hyper.lambda3 != 0.0) parts.push_back("scl");
  if (parts.empty()) return "prediction-only";
  std::string name;
  if (parts.size() == 3) {
    name = "hycon";
  } else {
    for (const auto& p : parts) {
      if (!name.empty()) name += '+';
      name += p;
    }
  }
  if (!loss.enable_refinement) name += "-norefine";
  if (loss.ratio_form == RatioForm::log_form) name += "-log";
  return name;
}

TrainOptions ExperimentConfig::train_options() const {
  TrainOptions t;
  t.loss = loss;
  t.loss.alpha = hyper.alpha;
  t.loss.lambda1 = hyper.lambda1;
  t.loss.lambda2 = hyper.lambda2;
  t.loss.lambda3 = hyper.lambda3;
  t.model = model;
  t.model.embed = hyper.d;
  t.batch_size = hyper.batch_size;
  t.learning_rate = hyper.learning_rate;
  t.epochs = epochs;
  t.patience = patience;
  t.seed = seeds.empty() ? 0 : seeds.front();
  return t;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["hyperparams"] = {
      {"alpha", c.hyper.alpha},       {"lambda1", c.hyper.lambda1},
      {"lambda2", c.hyper.lambda2},   {"lambda3", c.hyper.lambda3},
      {"d", c.hyper.d},               {"batch_size", c.hyper.batch_size},
      {"learning_rate", c.hyper.learning_rate},
  };
  j["model"] = {
      {"hidden", c.model.hidden},
      {"fusion", to_string(c.model.fusion)},
  };
  j["losses"] = {
      {"enable_scl", c.loss.enable_scl},
      {"enable_iamcl", c.loss.enable_iamcl},
      {"enable_iemcl", c.loss.enable_iemcl},
      {"enable_refinement", c.loss.enable_refinement},
      {"ratio_form", to_string(c.loss.ratio_form)},
      {"baseline_loss", to_string(c.loss.baseline)},
      {"triplet_hinge", c.loss.triplet_hinge},
      {"fuse_normalized", c.model.fuse_normalized},
  };
  j["data"] = {
      {"synthetic",
       {{"n_samples", c.data.synthetic.n_samples},
        {"dims", c.data.synthetic.dims},
        {"shared_strength", c.data.synthetic.shared_strength},
        {"noise_sigma", c.data.synthetic.noise_sigma},
        {"modality_offset", c.data.synthetic.modality_offset},
        {"seed", c.data.synthetic.seed}}},
      {"file", c.data.file},
      {"split",
       {{"train_frac", c.data.train_frac},
        {"val_frac", c.data.val_frac},
        {"train_count", c.data.train_count},
        {"val_count", c.data.val_count},
        {"test_count", c.data.test_count},
        {"split_seed", c.data.split_seed}}},
  };
  j["train"] = {{"epochs", c.epochs}, {"patience", c.patience}};
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir;
  j["sweep"] = {
      {"kind", c.sweep.kind},
      {"alphas", c.sweep.alphas},
      {"lambdas", c.sweep.lambdas},
  };
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": bad JSON: " + e.what());
  }
  return config_from_json(j);
}

void write_config(const std::string& path, const ExperimentConfig& c) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << to_json(c).dump(2) << '\n';
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

}  // namespace hycon
