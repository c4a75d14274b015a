#include "tgode/preference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "tgode/errors.hpp"

namespace tgode {

PivotGrid build_pivot_grid(const InteractionSequence& seq, int m) {
  if (m < 1) throw ContractError("build_pivot_grid: m must be >= 1");
  PivotGrid grid;
  if (m == 1) {
    grid.pivots = {0.5};
  } else {
    for (int j = 0; j < m; ++j) grid.pivots.push_back(static_cast<double>(j) / (m - 1));
  }

  std::vector<bool> hit(grid.pivots.size(), false);
  for (const auto& e : seq.events) {
    std::size_t best = 0;
    double best_dist = std::fabs(grid.pivots[0] - e.norm_time);
    for (std::size_t j = 1; j < grid.pivots.size(); ++j) {
      double dist = std::fabs(grid.pivots[j] - e.norm_time);
      if (dist < best_dist) {  // strict: ties stay with the smaller pivot
        best = j;
        best_dist = dist;
      }
    }
    hit[best] = true;
  }

  for (std::size_t j = 0; j < grid.pivots.size(); ++j)
    (hit[j] ? grid.covered : grid.uncovered).push_back(grid.pivots[j]);

  if (grid.uncovered.empty()) {
    grid.l_num = 0;
  } else {
    grid.l_num = std::max<int>(
        1, static_cast<int>(seq.events.size() / grid.uncovered.size()));
  }
  return grid;
}

namespace {

bool is_uncovered(const PivotGrid& grid, double pivot) {
  for (double p : grid.uncovered)
    if (p == pivot) return true;
  return false;
}

}  // namespace

std::vector<double> infer_user_scores(const InteractionSequence& seq, double pivot,
                                      const PivotGrid& grid, ModelParams& m,
                                      const GraphContext& gc, const AblationFlags& flags) {
  if (!is_uncovered(grid, pivot))
    throw ContractError("infer_user_scores: pivot is not in the uncovered set");

  int vocab = m.cfg.vocab;
  Tensor a_row(1, vocab);
  std::vector<Event> prefix;
  for (const auto& e : seq.events)
    if (e.norm_time < pivot) {
      a_row.at(0, e.item) += 1.0;
      prefix.push_back(e);
    }

  // sequence representation at the pivot from the continuous-time pathway
  Tensor h_s(1, m.cfg.d);
  {
    Tape tape;
    ForwardResult fr = forward_to_time(tape, m, gc, seq.user, prefix, pivot, flags);
    h_s = tape.value(fr.h_s);
  }

  Tape tape;
  LatentEncoding enc = encode_latent(tape, a_row, h_s, m.generator, false, nullptr);
  NodeId z0_hat = predict_z0(tape, enc.z0, pivot, 0, m.generator);
  NodeId scores = decode_scores(tape, z0_hat, m.generator);
  std::vector<double> out = tape.value(scores).v;

  for (const auto& e : seq.events) out[e.item] = -std::numeric_limits<double>::infinity();
  return out;
}

std::vector<TimedEdge> AugmentedUserGraph::all_edges() const {
  std::vector<TimedEdge> edges = base.edges;
  for (const auto& a : added) edges.push_back(a.edge);
  return merge_timed_edges(edges);
}

AugmentedUserGraph build_augmented_graph(const InteractionSequence& seq, const PivotGrid& grid,
                                         ModelParams& m, const GraphContext& gc,
                                         const AblationFlags& flags) {
  AugmentedUserGraph aug;
  aug.base = gc.user_graphs[seq.user];
  if (grid.uncovered.empty()) return aug;

  for (double pivot : grid.uncovered) {
    std::vector<double> scores = infer_user_scores(seq, pivot, grid, m, gc, flags);

    std::vector<int> order;
    for (int i = 0; i < static_cast<int>(scores.size()); ++i)
      if (std::isfinite(scores[i])) order.push_back(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores[a] > scores[b]; });
    if (static_cast<int>(order.size()) > grid.l_num) order.resize(grid.l_num);

    // temporally nearest base items on either side of the pivot
    const Event* prev = nullptr;
    const Event* next = nullptr;
    for (const auto& e : seq.events) {
      if (e.norm_time < pivot) prev = &e;
      if (e.norm_time > pivot && !next) next = &e;
    }

    for (int item : order) {
      if (prev)
        aug.added.push_back({{prev->item, item, pivot, 1.0}, pivot, item, scores[item]});
      if (next)
        aug.added.push_back({{item, next->item, next->norm_time, 1.0}, pivot, item, scores[item]});
    }
  }
  return aug;
}

}  // namespace tgode
