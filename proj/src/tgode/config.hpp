#pragma once

#include <string>

#include "tgode/dataset.hpp"
#include "tgode/trainer.hpp"

namespace tgode {

// Key = value run configuration; unknown keys are rejected. CLI flags apply
// the same keys as overrides after the file is read.
struct RunConfig {
  std::string data_path;
  std::string format = "csv";  // csv | tsv
  std::string out_dir = ".";
  TrainConfig train;
  int top_k = 10;

  FileFormat file_format() const;
};

RunConfig load_run_config(const std::string& path);

// Apply one key=value pair; throws ConfigError naming the key when unknown
// or unparsable.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

}  // namespace tgode
