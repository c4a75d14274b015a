#include "tgode/tgode.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>
#include <string>

#include "tgode/errors.hpp"
#include "tgode/runner.hpp"

using namespace tgode;

struct tgode_config {
  RunConfig cfg;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Exceptions map onto the documented exit codes.
tgode_status run_guarded(const std::function<void()>& body) {
  try {
    body();
    g_last_error.clear();
    return TGODE_OK;
  } catch (const ConfigError& e) {
    g_last_error = e.what();
    return TGODE_ERR_USAGE;
  } catch (const IoError& e) {
    g_last_error = e.what();
    return TGODE_ERR_USAGE;
  } catch (const NumericError& e) {
    g_last_error = e.what();
    return TGODE_ERR_NUMERIC;
  } catch (const std::exception& e) {
    // parse, mismatch, contract, dimension, domain: data/model problems
    g_last_error = e.what();
    return TGODE_ERR_DATA;
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
}

}  // namespace

extern "C" {

tgode_config* tgode_config_create(void) { return new tgode_config(); }

void tgode_config_free(tgode_config* cfg) { delete cfg; }

tgode_status tgode_config_load_file(tgode_config* cfg, const char* path) {
  return run_guarded([&] {
    if (!cfg || !path) throw ConfigError("null argument");
    cfg->cfg = load_run_config(path);
  });
}

tgode_status tgode_config_set(tgode_config* cfg, const char* key, const char* value) {
  return run_guarded([&] {
    if (!cfg || !key || !value) throw ConfigError("null argument");
    apply_config_entry(cfg->cfg, key, value);
  });
}

tgode_status tgode_analyze(const tgode_config* cfg, char** json_out) {
  return run_guarded([&] {
    if (!cfg) throw ConfigError("null config");
    Dataset d = load_interactions(cfg->cfg.data_path, cfg->cfg.file_format());
    AnalyzeOutput out = run_analyze(d);
    std::filesystem::create_directories(cfg->cfg.out_dir);
    write_file(cfg->cfg.out_dir + "/analysis.json", out.json);
    write_file(cfg->cfg.out_dir + "/intervals.csv", out.intervals_csv);
    write_file(cfg->cfg.out_dir + "/emergence.csv", out.emergence_csv);
    if (json_out) *json_out = dup_string(out.json);
  });
}

tgode_status tgode_train(const tgode_config* cfg, char** checkpoint_path_out) {
  return run_guarded([&] {
    if (!cfg) throw ConfigError("null config");
    TrainOutput out = run_train(cfg->cfg);
    if (checkpoint_path_out) *checkpoint_path_out = dup_string(out.checkpoint_path);
  });
}

tgode_status tgode_evaluate(const tgode_config* cfg, const char* checkpoint_path,
                            const char* split, char** json_out) {
  return run_guarded([&] {
    if (!cfg || !checkpoint_path || !split) throw ConfigError("null argument");
    MetricsReport report = run_evaluate(cfg->cfg, checkpoint_path, split);
    if (json_out) *json_out = dup_string(report.to_json());
  });
}

tgode_status tgode_recommend(const tgode_config* cfg, const char* checkpoint_path,
                             const char* user_id, int64_t time, int k, char** json_out) {
  return run_guarded([&] {
    if (!cfg || !checkpoint_path || !user_id) throw ConfigError("null argument");
    auto recs = run_recommend(cfg->cfg, checkpoint_path, user_id, time, k);
    std::ostringstream os;
    os.precision(10);
    os << "[";
    for (std::size_t i = 0; i < recs.size(); ++i) {
      if (i) os << ",";
      os << "{\"item\":\"" << recs[i].item_id << "\",\"score\":" << recs[i].score << "}";
    }
    os << "]";
    if (json_out) *json_out = dup_string(os.str());
  });
}

const char* tgode_last_error(void) { return g_last_error.c_str(); }

void tgode_string_free(char* s) { std::free(s); }

}  // extern "C"
