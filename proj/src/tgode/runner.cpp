#include "tgode/runner.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "tgode/checkpoint.hpp"
#include "tgode/errors.hpp"
#include "tgode/trainer.hpp"

namespace tgode {

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
}

// Restore a model at the configured dimensions and rebuild the graph context
// (with augmentation when the generator is enabled) from the train split.
struct RestoredModel {
  std::unique_ptr<ModelParams> model;
  std::unique_ptr<GraphContext> graphs;
};

RestoredModel restore(const RunConfig& cfg, const SplitDataset& split,
                      const std::string& checkpoint_path) {
  RestoredModel r;
  Rng rng(cfg.train.seed);
  r.model = std::make_unique<ModelParams>(cfg.train.model_config(split.full.item_vocab_size), rng);
  std::vector<Param*> ps = r.model->all_params();
  load_checkpoint(checkpoint_path, ps);

  r.graphs = std::make_unique<GraphContext>(
      build_graph_context(split.train, split.full.item_vocab_size, cfg.train.snapshot_grid));
  if (cfg.train.flags.diffusion_enabled()) {
    std::vector<UserTimeGraph> base = r.graphs->user_graphs;
    regenerate_augmentation(*r.graphs, base, split.train, *r.model, cfg.train.pivots,
                            cfg.train.flags, cfg.train.snapshot_grid);
  }
  return r;
}

}  // namespace

AnalyzeOutput run_analyze(const Dataset& d) {
  AnalysisReport rep = interval_histogram(d, {350});
  AnalysisReport em = emergence_ratios(d);
  rep.emergence_buckets = em.emergence_buckets;
  rep.item_count = em.item_count;
  rep.slice_days = em.slice_days;
  AnalyzeOutput out;
  out.intervals_csv = rep.intervals_csv();
  out.emergence_csv = em.emergence_csv();
  out.json = rep.to_json();
  return out;
}

TrainOutput run_train(const RunConfig& cfg) {
  Dataset d = load_interactions(cfg.data_path, cfg.file_format());
  SplitDataset split = chronological_split(d);
  TrainResult res = train_tgode(split, cfg.train);

  std::filesystem::create_directories(cfg.out_dir);
  TrainOutput out;
  out.checkpoint_path = cfg.out_dir + "/model.tgode";
  out.report_path = cfg.out_dir + "/train_report.jsonl";

  std::vector<Param*> ps = res.model->all_params();
  std::vector<const Param*> cps(ps.begin(), ps.end());
  save_checkpoint(out.checkpoint_path, cps);
  write_file(out.report_path, res.report_jsonl());
  return out;
}

MetricsReport run_evaluate(const RunConfig& cfg, const std::string& checkpoint_path,
                           const std::string& split_name) {
  if (split_name != "valid" && split_name != "test")
    throw ConfigError("unknown split '" + split_name + "' (expected valid or test)");
  Dataset d = load_interactions(cfg.data_path, cfg.file_format());
  SplitDataset split = chronological_split(d);
  RestoredModel r = restore(cfg, split, checkpoint_path);

  const auto& targets = split_name == "valid" ? split.valid_targets : split.test_targets;
  std::vector<ScoredTarget> scored =
      score_targets(*r.model, *r.graphs, split.full, targets, cfg.train.flags, cfg.train.tau);
  std::vector<RankedTarget> ranked;
  ranked.reserve(scored.size());
  for (auto& s : scored) ranked.push_back({std::move(s.ranking), s.truth});
  return rank_metrics(ranked, {5, 10, 20});
}

std::vector<Recommendation> run_recommend(const RunConfig& cfg, const std::string& checkpoint_path,
                                          const std::string& user_id, std::int64_t raw_time,
                                          int k) {
  if (k < 1) throw ConfigError("top_k must be >= 1");
  Dataset d = load_interactions(cfg.data_path, cfg.file_format());
  SplitDataset split = chronological_split(d);

  auto it = std::find(d.user_ids.begin(), d.user_ids.end(), user_id);
  if (it == d.user_ids.end()) throw MismatchError("unknown user id '" + user_id + "'");
  int user = static_cast<int>(it - d.user_ids.begin());

  RestoredModel r = restore(cfg, split, checkpoint_path);

  std::vector<Event> prefix = history_before(split.full, user, raw_time);
  double span = static_cast<double>(d.time_max - d.time_min);
  double t = span > 0 ? (raw_time - d.time_min) / span : 0.0;
  t = std::clamp(t, 0.0, 1.0);

  Tape tape;
  ForwardResult fr = forward_to_time(tape, *r.model, *r.graphs, user, prefix, t, cfg.train.flags);
  NodeId y_hat = predict_scores(tape, fr.h_s, fr.e_us_final, cfg.train.tau);
  const Tensor& scores = tape.value(y_hat);

  std::vector<int> order(scores.cols);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores.at(0, a) > scores.at(0, b); });

  std::vector<Recommendation> out;
  for (int i = 0; i < k && i < static_cast<int>(order.size()); ++i)
    out.push_back({d.item_ids[order[i]], order[i], scores.at(0, order[i])});
  return out;
}

}  // namespace tgode
