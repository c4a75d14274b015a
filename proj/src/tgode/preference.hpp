#pragma once

#include <vector>

#include "tgode/dataset.hpp"
#include "tgode/model.hpp"
#include "tgode/temporal_graphs.hpp"

namespace tgode {

struct PivotGrid {
  std::vector<double> pivots;     // m equally spaced normalized times
  std::vector<double> covered;    // pivots hit by the nearest-pivot mapping
  std::vector<double> uncovered;  // complement
  int l_num = 0;                  // per-pivot generation budget; 0 iff uncovered empty
};

// Pivot j sits at (j-1)/(m-1); observed times map to the nearest pivot with
// ties to the smaller one. l_num = max(1, floor(|observed| / |uncovered|)).
PivotGrid build_pivot_grid(const InteractionSequence& seq, int m);

// Deterministic K=0 denoising at an uncovered pivot: history scores decoded
// from the latent, with already-interacted items masked to -inf.
std::vector<double> infer_user_scores(const InteractionSequence& seq, double pivot,
                                      const PivotGrid& grid, ModelParams& m,
                                      const GraphContext& gc, const AblationFlags& flags);

struct AddedEdge {
  TimedEdge edge;
  double pivot = 0.0;  // the uncovered pivot that generated it
  int item = 0;        // the inserted item
  double score = 0.0;
};

struct AugmentedUserGraph {
  UserTimeGraph base;
  std::vector<AddedEdge> added;

  // base edges plus added edges, merged
  std::vector<TimedEdge> all_edges() const;
};

// Insert the top-l_num scoring items at each uncovered pivot, attaching each
// to the temporally nearest base items on both sides.
AugmentedUserGraph build_augmented_graph(const InteractionSequence& seq, const PivotGrid& grid,
                                         ModelParams& m, const GraphContext& gc,
                                         const AblationFlags& flags);

}  // namespace tgode
