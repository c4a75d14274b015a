#pragma once

#include <string>
#include <vector>

#include "tgode/dataset.hpp"
#include "tgode/tensor.hpp"

namespace tgode {

struct TimedEdge {
  int src = 0;
  int dst = 0;
  double time = 0.0;  // normalized; the later endpoint's interaction time
  double weight = 1.0;
};

// Per-user directed graph of consecutive item transitions.
struct UserTimeGraph {
  int user = 0;
  std::vector<int> node_items;
  std::vector<TimedEdge> edges;  // merged per (src,dst): summed weight, latest time
};

// Global transition graph pooled over all sequences; nodes are the full vocabulary.
struct ItemEvolutionGraph {
  int node_count = 0;
  std::vector<TimedEdge> edges;  // sorted by time after construction
};

// Snapshot of a graph restricted to edges strictly before t_query, with
// out-degree row normalization D^-1 A. Zero-degree rows stay all-zero.
struct TemporalAdjacency {
  SparseRowMatrix normalized;  // D^-1 A
  SparseRowMatrix raw;         // A (merged edge weights)
};

UserTimeGraph build_user_time_graph(const InteractionSequence& s);
ItemEvolutionGraph build_item_evolution_graph(const Dataset& d);

TemporalAdjacency adjacency_snapshot(const std::vector<TimedEdge>& edges, int node_count,
                                     double t_query);

inline TemporalAdjacency adjacency_snapshot(const UserTimeGraph& g, int node_count, double t_query) {
  return adjacency_snapshot(g.edges, node_count, t_query);
}
inline TemporalAdjacency adjacency_snapshot(const ItemEvolutionGraph& g, double t_query) {
  return adjacency_snapshot(g.edges, g.node_count, t_query);
}

// Merge duplicate (src,dst) pairs: weights add, time is the latest occurrence.
std::vector<TimedEdge> merge_timed_edges(const std::vector<TimedEdge>& edges);

// Debug export: "src dst weight time", one edge per line.
std::string export_edge_list(const std::vector<TimedEdge>& edges);

}  // namespace tgode
