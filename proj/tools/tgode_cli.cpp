// Batch CLI over the shared-library C interface. Config file first, then
// flags as overrides; exit codes 0 ok, 2 usage, 3 data/model, 4 numeric.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "tgode/tgode.h"

namespace {

struct ConfigDeleter {
  void operator()(tgode_config* c) const { tgode_config_free(c); }
};
using ConfigPtr = std::unique_ptr<tgode_config, ConfigDeleter>;

int fail(tgode_status st) {
  std::fprintf(stderr, "error: %s\n", tgode_last_error());
  return static_cast<int>(st);
}

// Build the config from an optional file plus flag overrides (flags win).
int build_config(ConfigPtr& cfg, const std::string& config_path,
                 const std::vector<std::pair<std::string, std::string>>& overrides) {
  cfg.reset(tgode_config_create());
  if (!config_path.empty()) {
    tgode_status st = tgode_config_load_file(cfg.get(), config_path.c_str());
    if (st != TGODE_OK) return fail(st);
  }
  for (const auto& [k, v] : overrides) {
    tgode_status st = tgode_config_set(cfg.get(), k.c_str(), v.c_str());
    if (st != TGODE_OK) return fail(st);
  }
  return 0;
}

struct CommonOpts {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;

  void attach(CLI::App* cmd, bool with_train_keys) {
    cmd->add_option("-c,--config", config_path, "key = value configuration file");
    auto kv = [this](const char* key) {
      return [this, key](const std::string& v) { overrides.emplace_back(key, v); };
    };
    cmd->add_option_function<std::string>("--data", kv("data"), "interaction file");
    cmd->add_option_function<std::string>("--format", kv("format"), "csv or tsv");
    cmd->add_option_function<std::string>("--out", kv("out_dir"), "output directory");
    if (!with_train_keys) return;
    for (const char* key : {"seed", "lr", "batch", "iters", "inner_epochs", "d", "d_z", "K",
                            "pivots", "ode_layers", "ode_steps", "heads", "snapshot_grid", "tau",
                            "lambda_reg", "lambda_vae"}) {
      cmd->add_option_function<std::string>(std::string("--") + key, kv(key), key);
    }
    auto flag = [this](const char* key) {
      return [this, key](std::int64_t n) {
        if (n > 0) overrides.emplace_back(key, "true");
      };
    };
    cmd->add_flag_function("--no-diff", flag("no_diff"), "disable the diffusion generator");
    cmd->add_flag_function("--no-ode", flag("no_ode"), "disable the graph ODE");
    cmd->add_flag_function("--no-cs", flag("no_cs"), "disable the item-evolution stream");
    cmd->add_flag_function("--base", flag("base"), "disable all three modules");
  }
};

void print_owned(char* s) {
  if (!s) return;
  std::printf("%s\n", s);
  tgode_string_free(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"temporal-graph diffusion recommender"};
  app.require_subcommand(1);

  CommonOpts analyze_opts, train_opts, eval_opts, rec_opts;

  CLI::App* cmd_analyze = app.add_subcommand("analyze", "interval and emergence analyses");
  analyze_opts.attach(cmd_analyze, false);

  CLI::App* cmd_train = app.add_subcommand("train", "train and write a checkpoint");
  train_opts.attach(cmd_train, true);

  std::string checkpoint, split = "test", user;
  std::int64_t at_time = 0;
  int top_k = 10;

  CLI::App* cmd_evaluate = app.add_subcommand("evaluate", "ranking metrics on a split");
  eval_opts.attach(cmd_evaluate, true);
  cmd_evaluate->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  cmd_evaluate->add_option("--split", split, "valid or test");

  CLI::App* cmd_recommend = app.add_subcommand("recommend", "top-k items for a user at a time");
  rec_opts.attach(cmd_recommend, true);
  cmd_recommend->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  cmd_recommend->add_option("--user", user, "user id as it appears in the data")->required();
  cmd_recommend->add_option("--time", at_time, "raw timestamp")->required();
  cmd_recommend->add_option("-k,--top-k", top_k, "list length");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  ConfigPtr cfg;
  tgode_status st = TGODE_OK;
  char* out = nullptr;

  if (cmd_analyze->parsed()) {
    if (int rc = build_config(cfg, analyze_opts.config_path, analyze_opts.overrides)) return rc;
    st = tgode_analyze(cfg.get(), &out);
  } else if (cmd_train->parsed()) {
    if (int rc = build_config(cfg, train_opts.config_path, train_opts.overrides)) return rc;
    st = tgode_train(cfg.get(), &out);
  } else if (cmd_evaluate->parsed()) {
    if (int rc = build_config(cfg, eval_opts.config_path, eval_opts.overrides)) return rc;
    st = tgode_evaluate(cfg.get(), checkpoint.c_str(), split.c_str(), &out);
  } else {
    if (int rc = build_config(cfg, rec_opts.config_path, rec_opts.overrides)) return rc;
    st = tgode_recommend(cfg.get(), checkpoint.c_str(), user.c_str(), at_time, top_k, &out);
  }

  if (st != TGODE_OK) {
    tgode_string_free(out);
    return fail(st);
  }
  print_owned(out);
  return 0;
}
