#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hycon/io.hpp"

using namespace hycon;
namespace fs = std::filesystem;

namespace {

std::string test_dir() {
  static const std::string dir = [] {
    std::string d = "/tmp/hycon_cli_test_" + std::to_string(::getpid());
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path_of(const std::string& name) { return test_dir() + "/" + name; }

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args) {
  const std::string out_file = path_of("stdout.txt");
  const std::string err_file = path_of("stderr.txt");
  const std::string cmd = std::string("\"") + HYCON_CLI_PATH + "\" " + args +
                          " >" + out_file + " 2>" + err_file;
  const int rc = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = read_text(out_file);
  r.err = read_text(err_file);
  return r;
}

// small, fast experiment: 60 samples, 2 epochs
std::string tiny_config_json(const std::string& extra_sections = "") {
  return std::string("{\n"
                     "  \"hyperparams\": {\"alpha\": 0.8, \"d\": 6, "
                     "\"batch_size\": 8, \"learning_rate\": 0.002},\n"
                     "  \"model\": {\"hidden\": 8},\n"
                     "  \"data\": {\n"
                     "    \"synthetic\": {\"n_samples\": 60, \"dims\": [6, 4, 5], "
                     "\"noise_sigma\": 0.5, \"seed\": 3},\n"
                     "    \"split\": {\"train_frac\": 0.7, \"val_frac\": 0.15, "
                     "\"split_seed\": 5}\n"
                     "  },\n"
                     "  \"train\": {\"epochs\": 2, \"patience\": 0},\n"
                     "  \"seeds\": [1]\n") +
         extra_sections + "}\n";
}

std::string tiny_config_path() {
  static const std::string p = [] {
    const std::string path = path_of("tiny.json");
    write_text(path, tiny_config_json());
    return path;
  }();
  return p;
}

int line_count(const std::string& s) {
  int n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help exits zero and names every subcommand") {
  const RunResult r = run_cli("--help");
  CHECK(r.exit_code == 0);
  for (const char* sub : {"generate", "train", "eval", "gradcheck",
                          "export-embeddings", "sweep"})
    CHECK(r.out.find(sub) != std::string::npos);
}

TEST_CASE("usage mistakes exit with the validation code") {
  CHECK(run_cli("--bogus-flag").exit_code == 1);
  CHECK(run_cli("").exit_code == 1);                 // subcommand required
  CHECK(run_cli("train").exit_code == 1);            // --config required
  CHECK(run_cli("eval --config x.json").exit_code == 1);  // --model required
  CHECK(run_cli("train --config /no/such/file.json").exit_code == 1);
}

TEST_CASE("config validation failures exit with code one and explain") {
  const std::string bad = path_of("bad_alpha.json");
  write_text(bad, "{\"hyperparams\": {\"alpha\": 2.0}}");
  RunResult r = run_cli("train --config " + bad + " --out " + path_of("x"));
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("alpha") != std::string::npos);

  const std::string unknown = path_of("bad_key.json");
  write_text(unknown, "{\"hyperparmeters\": {}}");
  r = run_cli("train --config " + unknown + " --out " + path_of("x"));
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("unknown key config.hyperparmeters") != std::string::npos);
}

TEST_CASE("generate writes a dataset the reader accepts") {
  const std::string dir = path_of("gen_out");
  const RunResult r =
      run_cli("generate --config " + tiny_config_path() + " --out " + dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("wrote ") != std::string::npos);
  CHECK(r.out.find("(60 samples)") != std::string::npos);
  const Dataset data = read_feature_table(dir + "/dataset.txt");
  CHECK(data.size() == 60);
  CHECK(data.features[0].cols() == 6);
}

TEST_CASE("train writes its artifacts and runs are byte-reproducible") {
  const std::string dir = path_of("train_out");
  const std::string cmd =
      "train --config " + tiny_config_path() + " --out " + dir;
  const RunResult r = run_cli(cmd);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("regime=hycon seed=1") != std::string::npos);
  CHECK(r.out.find("regime=hycon seed=mean") != std::string::npos);
  CHECK(r.out.find("regime=hycon seed=std") != std::string::npos);

  const char* artifacts[] = {"config_effective.json", "metrics.csv",
                             "model_seed1.json", "trajectory_seed1.csv"};
  for (const char* name : artifacts) REQUIRE(fs::exists(dir + "/" + name));

  CHECK(read_text(dir + "/metrics.csv")
            .rfind("regime,seed,acc7,acc2,f1,mae,corr,silhouette\n", 0) == 0);
  CHECK(read_text(dir + "/trajectory_seed1.csv")
            .rfind("epoch,l_scl,l_iamcl,l_iamcl_refine,l_iemcl,l_iemcl_refine,"
                   "l_hybrid,l_pred,l_overall,val_mae\n",
                   0) == 0);
  // 2 epochs -> header + 2 rows
  CHECK(line_count(read_text(dir + "/trajectory_seed1.csv")) == 3);

  std::array<std::string, 4> before;
  for (std::size_t i = 0; i < 4; ++i)
    before[i] = read_text(dir + "/" + artifacts[i]);
  const RunResult again = run_cli(cmd);
  CHECK(again.exit_code == 0);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(before[i] == read_text(dir + "/" + artifacts[i]));
}

TEST_CASE("a seed flag replaces the config's seed list") {
  const std::string dir = path_of("seed_out");
  const RunResult r = run_cli("train --config " + tiny_config_path() +
                              " --out " + dir + " --seed 2");
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(dir + "/model_seed2.json"));
  CHECK_FALSE(fs::exists(dir + "/model_seed1.json"));
  CHECK(r.out.find("regime=hycon seed=2") != std::string::npos);
}

TEST_CASE("eval reproduces the metrics the training run reported") {
  const std::string train_dir = path_of("eval_train_out");
  REQUIRE(run_cli("train --config " + tiny_config_path() + " --out " +
                  train_dir)
              .exit_code == 0);

  const std::string eval_dir = path_of("eval_out");
  const RunResult r =
      run_cli("eval --config " + tiny_config_path() + " --model " + train_dir +
              "/model_seed1.json --out " + eval_dir);
  CHECK(r.exit_code == 0);
  REQUIRE(fs::exists(eval_dir + "/eval_metrics.csv"));

  // same dataset, split, and parameters: the numeric cells must match the
  // seed-1 row of the training run exactly
  const std::string metrics = read_text(train_dir + "/metrics.csv");
  const std::string seed_row_start = "hycon,1,";
  const std::size_t at = metrics.find(seed_row_start);
  REQUIRE(at != std::string::npos);
  const std::string seed_cells = metrics.substr(
      at + seed_row_start.size(),
      metrics.find('\n', at) - at - seed_row_start.size());

  const std::string eval_csv = read_text(eval_dir + "/eval_metrics.csv");
  CHECK(eval_csv.find("eval,-," + seed_cells + "\n") != std::string::npos);
}

TEST_CASE("gradcheck honors the configured loss set and the corrupt hook") {
  const std::string cfg = path_of("baseline_cfg.json");
  write_text(cfg, "{\"losses\": {\"baseline_loss\": \"triplet\"}}");

  RunResult r = run_cli("gradcheck --config " + cfg);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("pred") != std::string::npos);
  CHECK(r.out.find("triplet") != std::string::npos);
  CHECK(r.out.find("2 losses checked") != std::string::npos);
  CHECK(r.out.find("PASS") != std::string::npos);

  r = run_cli("gradcheck --config " + cfg + " --tol 1e-2");
  CHECK(r.exit_code == 0);

  r = run_cli("gradcheck --config " + cfg + " --corrupt-loss triplet");
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("FAIL") != std::string::npos);
  CHECK(r.err.find("gradcheck failed: loss triplet") != std::string::npos);
}

TEST_CASE("export writes aligned embedding and projection tables") {
  const std::string train_dir = path_of("export_train_out");
  REQUIRE(run_cli("train --config " + tiny_config_path() + " --out " +
                  train_dir)
              .exit_code == 0);

  const std::string dir = path_of("export_out");
  const RunResult r = run_cli("export-embeddings --config " +
                              tiny_config_path() + " --model " + train_dir +
                              "/model_seed1.json --out " + dir);
  CHECK(r.exit_code == 0);

  const std::string emb = read_text(dir + "/embeddings.csv");
  const std::string pca = read_text(dir + "/embeddings_pca.csv");
  CHECK(emb.rfind("sample_id,split,label,class,modality_or_fused", 0) == 0);
  CHECK(pca.rfind("sample_id,pc1,pc2\n", 0) == 0);
  // four rows per sample (three modalities plus fused), one header each
  CHECK(line_count(emb) == 1 + 4 * 60);
  CHECK(line_count(pca) == 1 + 4 * 60);
  CHECK(emb.find(",language,") != std::string::npos);
  CHECK(emb.find(",fused,") != std::string::npos);
}

TEST_CASE("sweep writes one row per grid point") {
  const std::string cfg = path_of("sweep_cfg.json");
  write_text(cfg, tiny_config_json(
                      ",  \"sweep\": {\"kind\": \"alpha\", "
                      "\"alphas\": [0.5, 0.9]}\n"));
  const std::string dir = path_of("sweep_out");
  const RunResult r = run_cli("sweep --config " + cfg + " --out " + dir);
  CHECK(r.exit_code == 0);
  const std::string csv = read_text(dir + "/sweep.csv");
  CHECK(line_count(csv) == 3);
  CHECK(csv.find("alpha=0.5,mean,") != std::string::npos);
  CHECK(csv.find("alpha=0.9,mean,") != std::string::npos);
}

TEST_CASE("numerical failures surface as exit code two") {
  const std::string cfg = path_of("explode.json");
  write_text(cfg,
             "{\n"
             "  \"hyperparams\": {\"d\": 4, \"batch_size\": 8, "
             "\"learning_rate\": 1e308},\n"
             "  \"model\": {\"hidden\": 4},\n"
             "  \"data\": {\"synthetic\": {\"n_samples\": 32, \"dims\": [6, 4, 5],"
             " \"shared_strength\": 1000.0, \"seed\": 2},\n"
             "            \"split\": {\"train_frac\": 1.0, \"val_frac\": 0.0}},\n"
             "  \"train\": {\"epochs\": 2},\n"
             "  \"seeds\": [1]\n"
             "}\n");
  const RunResult r =
      run_cli("train --config " + cfg + " --out " + path_of("explode_out"));
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("numerical failure") != std::string::npos);
  CHECK(r.err.find("non-finite loss term") != std::string::npos);
}

}  // TEST_SUITE
