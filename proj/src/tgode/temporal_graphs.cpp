#include "tgode/temporal_graphs.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace tgode {

std::vector<TimedEdge> merge_timed_edges(const std::vector<TimedEdge>& edges) {
  std::map<std::pair<int, int>, TimedEdge> merged;
  for (const auto& e : edges) {
    auto key = std::make_pair(e.src, e.dst);
    auto it = merged.find(key);
    if (it == merged.end()) {
      merged.emplace(key, e);
    } else {
      it->second.weight += e.weight;
      it->second.time = std::max(it->second.time, e.time);
    }
  }
  std::vector<TimedEdge> out;
  out.reserve(merged.size());
  for (auto& [k, e] : merged) out.push_back(e);
  return out;
}

UserTimeGraph build_user_time_graph(const InteractionSequence& s) {
  UserTimeGraph g;
  g.user = s.user;
  std::vector<int> nodes;
  for (const auto& e : s.events) nodes.push_back(e.item);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  g.node_items = std::move(nodes);

  std::vector<TimedEdge> raw;
  for (std::size_t i = 0; i + 1 < s.events.size(); ++i) {
    // edge time = the later interaction's time, so a snapshot only contains
    // edges whose both endpoints have already been observed
    raw.push_back({s.events[i].item, s.events[i + 1].item, s.events[i + 1].norm_time, 1.0});
  }
  g.edges = merge_timed_edges(raw);
  return g;
}

ItemEvolutionGraph build_item_evolution_graph(const Dataset& d) {
  ItemEvolutionGraph g;
  g.node_count = d.item_vocab_size;
  std::vector<TimedEdge> raw;
  for (const auto& s : d.sequences)
    for (std::size_t i = 0; i + 1 < s.events.size(); ++i)
      raw.push_back({s.events[i].item, s.events[i + 1].item, s.events[i + 1].norm_time, 1.0});
  g.edges = merge_timed_edges(raw);
  std::stable_sort(g.edges.begin(), g.edges.end(),
                   [](const TimedEdge& a, const TimedEdge& b) { return a.time < b.time; });
  return g;
}

TemporalAdjacency adjacency_snapshot(const std::vector<TimedEdge>& edges, int node_count,
                                     double t_query) {
  TemporalAdjacency adj;
  adj.raw = SparseRowMatrix(node_count, node_count);
  for (const auto& e : edges)
    if (e.time < t_query) adj.raw.row[e.src].push_back({e.dst, e.weight});

  adj.normalized = SparseRowMatrix(node_count, node_count);
  for (int i = 0; i < node_count; ++i) {
    double deg = 0.0;
    for (const auto& e : adj.raw.row[i]) deg += e.w;
    if (deg <= 0.0) continue;
    for (const auto& e : adj.raw.row[i]) adj.normalized.row[i].push_back({e.col, e.w / deg});
  }
  return adj;
}

std::string export_edge_list(const std::vector<TimedEdge>& edges) {
  std::ostringstream os;
  for (const auto& e : edges) os << e.src << " " << e.dst << " " << e.weight << " " << e.time << "\n";
  return os.str();
}

}  // namespace tgode
