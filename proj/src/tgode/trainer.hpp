#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tgode/dataset.hpp"
#include "tgode/model.hpp"
#include "tgode/preference.hpp"

namespace tgode {

struct TrainConfig {
  unsigned long long seed = 42;
  double lr = 1e-3;
  int batch = 64;
  int outer_iters = 10;
  int inner_epochs = 1;

  int d = 64;
  int d_z = 32;
  int K = 5;
  int pivots = 8;  // m
  int ode_layers = 2;
  int ode_steps = 4;
  int heads = 2;
  int snapshot_grid = 32;
  double tau = 0.07;
  double lambda_reg = 1e-4;
  double lambda_vae = 1e-3;

  AblationFlags flags;

  ModelConfig model_config(int vocab) const;
};

struct EpochRecord {
  std::string phase;  // "diffusion" or "recommender"
  int iter = 0;
  int epoch = 0;
  double loss = 0.0;
};

struct TrainResult {
  std::unique_ptr<ModelParams> model;
  std::unique_ptr<GraphContext> graphs;  // with final-iteration augmentation
  std::vector<EpochRecord> report;

  std::string report_jsonl() const;
};

// Alternating loop: diffusion batches, augmented-graph regeneration, then
// recommender batches; repeated outer_iters times. Deterministic given seed.
TrainResult train_tgode(const SplitDataset& split, const TrainConfig& cfg);

// Regenerate per-user augmentation from the base graphs with the current
// generator, replacing the context's user graphs and snapshots.
void regenerate_augmentation(GraphContext& gc, const std::vector<UserTimeGraph>& base_graphs,
                             const Dataset& train, ModelParams& model, int pivots,
                             const AblationFlags& flags, int snapshot_grid);

// Score every target of a list against the full ranking; used by evaluate
// and the acceptance suite.
struct ScoredTarget {
  std::vector<int> ranking;  // descending by score, ties to smaller index
  int truth = 0;
};

std::vector<ScoredTarget> score_targets(ModelParams& model, const GraphContext& gc,
                                        const Dataset& full, const std::vector<PredictionTarget>& targets,
                                        const AblationFlags& flags, double tau);

}  // namespace tgode
