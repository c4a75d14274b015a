#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tgode/config.hpp"
#include "tgode/evaluation.hpp"

namespace tgode {

// Command-level operations shared by the C API and the test suites. Paths
// are produced under cfg.out_dir.

struct AnalyzeOutput {
  std::string json;         // combined report
  std::string intervals_csv;
  std::string emergence_csv;
};

AnalyzeOutput run_analyze(const Dataset& d);

struct TrainOutput {
  std::string checkpoint_path;
  std::string report_path;
};

// Load + split + train, write checkpoint ("model.tgode") and JSON-lines
// report ("train_report.jsonl") into cfg.out_dir.
TrainOutput run_train(const RunConfig& cfg);

// Rebuild the split deterministically, restore parameters, regenerate
// augmentation, and score the requested split ("valid" or "test").
MetricsReport run_evaluate(const RunConfig& cfg, const std::string& checkpoint_path,
                           const std::string& split_name);

struct Recommendation {
  std::string item_id;
  int item_index = 0;
  double score = 0.0;
};

// Top-k recommendation for a user id at a raw timestamp.
std::vector<Recommendation> run_recommend(const RunConfig& cfg, const std::string& checkpoint_path,
                                          const std::string& user_id, std::int64_t raw_time, int k);

}  // namespace tgode
