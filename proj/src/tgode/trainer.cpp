#include "tgode/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tgode/errors.hpp"

namespace tgode {

ModelConfig TrainConfig::model_config(int vocab) const {
  ModelConfig mc;
  mc.vocab = vocab;
  mc.d = d;
  mc.d_z = d_z;
  mc.K = K;
  mc.heads = heads;
  mc.ode_layers = ode_layers;
  mc.ode_steps = ode_steps;
  mc.snapshot_grid = snapshot_grid;
  mc.tau = tau;
  mc.lambda_reg = lambda_reg;
  mc.lambda_vae = lambda_vae;
  return mc;
}

std::string TrainResult::report_jsonl() const {
  std::ostringstream os;
  for (const auto& r : report) {
    os.precision(10);
    os << "{\"phase\":\"" << r.phase << "\",\"iter\":" << r.iter << ",\"epoch\":" << r.epoch
       << ",\"loss\":" << r.loss << "}\n";
  }
  return os.str();
}

namespace {

struct TrainTarget {
  int user;
  int item;
  std::int64_t raw_time;
  double norm_time;
};

template <typename T>
void shuffle_with(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(v[i - 1], v[j]);
  }
}

std::vector<Event> prefix_before(const InteractionSequence& s, std::int64_t raw_time) {
  std::vector<Event> out;
  for (const auto& e : s.events)
    if (e.raw_time < raw_time) out.push_back(e);
  return out;
}

Tensor history_row(const std::vector<Event>& prefix, int vocab) {
  Tensor a(1, vocab);
  for (const auto& e : prefix) a.at(0, e.item) += 1.0;
  return a;
}

Tensor sequence_repr_value(ModelParams& model, const GraphContext& gc, int user,
                           const std::vector<Event>& prefix, double t,
                           const AblationFlags& flags) {
  Tape tape;
  ForwardResult fr = forward_to_time(tape, model, gc, user, prefix, t, flags);
  return tape.value(fr.h_s);
}

}  // namespace

void regenerate_augmentation(GraphContext& gc, const std::vector<UserTimeGraph>& base_graphs,
                             const Dataset& train, ModelParams& model, int pivots,
                             const AblationFlags& flags, int snapshot_grid) {
  // augmentation is refreshed from the base graphs each time, never stacked
  gc.user_graphs = base_graphs;
  gc.rebuild_user_snapshots(snapshot_grid);
  for (const auto& seq : train.sequences) {
    PivotGrid grid = build_pivot_grid(seq, pivots);
    if (grid.uncovered.empty()) continue;
    AugmentedUserGraph aug = build_augmented_graph(seq, grid, model, gc, flags);
    if (aug.added.empty()) continue;
    UserTimeGraph& ug = gc.user_graphs[seq.user];
    ug.edges = aug.all_edges();
    std::vector<int> nodes = ug.node_items;
    for (const auto& a : aug.added) nodes.push_back(a.item);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    ug.node_items = std::move(nodes);
  }
  gc.rebuild_user_snapshots(snapshot_grid);
}

TrainResult train_tgode(const SplitDataset& split, const TrainConfig& cfg) {
  if (split.train.interaction_count() == 0) throw ContractError("train_tgode: empty train split");
  int vocab = split.full.item_vocab_size;

  Rng rng(cfg.seed);
  TrainResult result;
  result.model = std::make_unique<ModelParams>(cfg.model_config(vocab), rng);
  ModelParams& model = *result.model;

  result.graphs = std::make_unique<GraphContext>(
      build_graph_context(split.train, vocab, cfg.snapshot_grid));
  GraphContext& gc = *result.graphs;
  const std::vector<UserTimeGraph> base_graphs = gc.user_graphs;

  // every event with at least one strictly earlier interaction is a target
  std::vector<TrainTarget> targets;
  for (const auto& s : split.train.sequences)
    for (std::size_t i = 1; i < s.events.size(); ++i) {
      const Event& e = s.events[i];
      if (s.events[0].raw_time < e.raw_time)
        targets.push_back({s.user, e.item, e.raw_time, e.norm_time});
    }

  NoiseSchedule sched = NoiseSchedule::linear(cfg.K);

  Adam opt_diff({cfg.lr});
  opt_diff.register_params(model.diffusion_params());
  Adam opt_rec({cfg.lr});
  opt_rec.register_params(model.recommender_params());

  for (int iter = 1; iter <= cfg.outer_iters; ++iter) {
    if (cfg.flags.diffusion_enabled()) {
      for (int epoch = 1; epoch <= cfg.inner_epochs; ++epoch) {
        std::vector<TrainTarget> order = targets;
        shuffle_with(order, rng);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t lo = 0; lo < order.size(); lo += cfg.batch) {
          std::size_t hi = std::min(order.size(), lo + cfg.batch);
          std::vector<DiffusionExample> batch;
          for (std::size_t i = lo; i < hi; ++i) {
            const TrainTarget& t = order[i];
            const InteractionSequence* s = split.train.find_user(t.user);
            std::vector<Event> prefix = prefix_before(*s, t.raw_time);
            if (prefix.empty()) continue;
            DiffusionExample ex;
            ex.a_row = history_row(prefix, vocab);
            // sequence representation is a constant input this phase
            ex.h_s = sequence_repr_value(model, gc, t.user, prefix, t.norm_time, cfg.flags);
            ex.t = t.norm_time;
            batch.push_back(std::move(ex));
          }
          if (batch.empty()) continue;
          Tape tape;
          NodeId loss = diffusion_loss(tape, batch, model.generator, sched, rng);
          double lv = tape.value(loss).v[0];
          if (!std::isfinite(lv))
            throw NumericError("train_tgode: non-finite diffusion loss, iter " +
                               std::to_string(iter) + " batch " + std::to_string(batches));
          tape.backward(loss);
          opt_diff.step();
          loss_sum += lv;
          ++batches;
        }
        result.report.push_back(
            {"diffusion", iter, epoch, batches ? loss_sum / batches : 0.0});
      }
      regenerate_augmentation(gc, base_graphs, split.train, model, cfg.pivots, cfg.flags,
                              cfg.snapshot_grid);
    }

    for (int epoch = 1; epoch <= cfg.inner_epochs; ++epoch) {
      std::vector<TrainTarget> order = targets;
      shuffle_with(order, rng);
      double loss_sum = 0.0;
      std::size_t batches = 0;
      for (std::size_t lo = 0; lo < order.size(); lo += cfg.batch) {
        std::size_t hi = std::min(order.size(), lo + cfg.batch);
        Tape tape;
        NodeId batch_loss = -1;
        int used = 0;
        for (std::size_t i = lo; i < hi; ++i) {
          const TrainTarget& t = order[i];
          const InteractionSequence* s = split.train.find_user(t.user);
          std::vector<Event> prefix = prefix_before(*s, t.raw_time);
          if (prefix.empty()) continue;
          ForwardResult fr = forward_to_time(tape, model, gc, t.user, prefix, t.norm_time, cfg.flags);
          NodeId y_hat = predict_scores(tape, fr.h_s, fr.e_us_final, cfg.tau);
          NodeId li = rec_loss(tape, y_hat, t.item);
          batch_loss = used == 0 ? li : tape.add(batch_loss, li);
          ++used;
        }
        if (used == 0) continue;
        NodeId loss = tape.scale(batch_loss, 1.0 / used);
        double lv = tape.value(loss).v[0];
        if (!std::isfinite(lv))
          throw NumericError("train_tgode: non-finite recommender loss, iter " +
                             std::to_string(iter) + " batch " + std::to_string(batches));
        tape.backward(loss);
        opt_rec.step();
        loss_sum += lv;
        ++batches;
      }
      result.report.push_back(
          {"recommender", iter, epoch, batches ? loss_sum / batches : 0.0});
    }
  }
  return result;
}

std::vector<ScoredTarget> score_targets(ModelParams& model, const GraphContext& gc,
                                        const Dataset& full,
                                        const std::vector<PredictionTarget>& targets,
                                        const AblationFlags& flags, double tau) {
  std::vector<ScoredTarget> out;
  out.reserve(targets.size());
  for (const auto& t : targets) {
    std::vector<Event> prefix = history_before(full, t.user, t.raw_time);
    ScoredTarget st;
    st.truth = t.item;
    if (!prefix.empty()) {
      Tape tape;
      ForwardResult fr = forward_to_time(tape, model, gc, t.user, prefix, t.norm_time, flags);
      NodeId y_hat = predict_scores(tape, fr.h_s, fr.e_us_final, tau);
      const Tensor& scores = tape.value(y_hat);
      std::vector<int> order(scores.cols);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return scores.at(0, a) > scores.at(0, b); });
      st.ranking = std::move(order);
    }
    out.push_back(std::move(st));
  }
  return out;
}

}  // namespace tgode
