#include "tgode/config.hpp"

#include <algorithm>
#include <fstream>

#include "tgode/errors.hpp"

namespace tgode {

FileFormat RunConfig::file_format() const {
  if (format == "csv") return FileFormat::Csv;
  if (format == "tsv") return FileFormat::Tsv;
  throw ConfigError("unknown format '" + format + "' (expected csv or tsv)");
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos;
    long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad integer for key '" + key + "': '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad number for key '" + key + "': '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("bad boolean for key '" + key + "': '" + v + "'");
}

}  // namespace

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
  TrainConfig& t = cfg.train;
  if (key == "data") cfg.data_path = value;
  else if (key == "format") cfg.format = value;
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "top_k") cfg.top_k = static_cast<int>(to_int(key, value));
  else if (key == "seed") t.seed = static_cast<unsigned long long>(to_int(key, value));
  else if (key == "lr") t.lr = to_double(key, value);
  else if (key == "batch") t.batch = static_cast<int>(to_int(key, value));
  else if (key == "iters") t.outer_iters = static_cast<int>(to_int(key, value));
  else if (key == "inner_epochs") t.inner_epochs = static_cast<int>(to_int(key, value));
  else if (key == "d") t.d = static_cast<int>(to_int(key, value));
  else if (key == "d_z") t.d_z = static_cast<int>(to_int(key, value));
  else if (key == "K") t.K = static_cast<int>(to_int(key, value));
  else if (key == "pivots") t.pivots = static_cast<int>(to_int(key, value));
  else if (key == "ode_layers") t.ode_layers = static_cast<int>(to_int(key, value));
  else if (key == "ode_steps") t.ode_steps = static_cast<int>(to_int(key, value));
  else if (key == "heads") t.heads = static_cast<int>(to_int(key, value));
  else if (key == "snapshot_grid") t.snapshot_grid = static_cast<int>(to_int(key, value));
  else if (key == "tau") t.tau = to_double(key, value);
  else if (key == "lambda_reg") t.lambda_reg = to_double(key, value);
  else if (key == "lambda_vae") t.lambda_vae = to_double(key, value);
  else if (key == "no_diff") t.flags.no_diff = to_bool(key, value);
  else if (key == "no_ode") t.flags.no_ode = to_bool(key, value);
  else if (key == "no_cs") t.flags.no_cs = to_bool(key, value);
  else if (key == "base") {
    if (to_bool(key, value)) t.flags = AblationFlags::base();
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  RunConfig cfg;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    apply_config_entry(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  return cfg;
}

}  // namespace tgode
