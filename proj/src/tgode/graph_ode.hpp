#pragma once

#include <functional>
#include <vector>

#include "tgode/temporal_graphs.hpp"
#include "tgode/tensor.hpp"
#include "tgode/time_codec.hpp"

namespace tgode {

// Attention graph encoder weights (shared between the two graph views).
struct GraphEncoderParams {
  int d = 0;
  TimeEmbeddingCodec phi;  // position embedding, fixed frequencies
  Param w_q, w_k, w_v, w_l;  // d x d
  Param attn;                // (2d + phi.dim) x 1

  GraphEncoderParams() = default;
  GraphEncoderParams(int d, int phi_dim, Rng& rng);
  std::vector<Param*> params();
};

// Drift-field weights: W_a fuses the item-evolution state with g(t), W_b the
// propagated user state, W_c is the per-layer propagation matrix.
struct OdeFunctionParams {
  int d = 0;
  int layers = 2;
  TimeEmbeddingCodec g_codec;  // timestamp encoding, fixed frequencies
  Param w_a;  // (d + g.dim) x d
  Param w_b;  // (d + g.dim) x d
  Param w_c;  // d x d

  OdeFunctionParams() = default;
  OdeFunctionParams(int d, int g_dim, int layers, Rng& rng);
  std::vector<Param*> params();
};

// Precomputed row-normalized adjacency snapshots on a fixed time grid;
// adjacency only changes at observed edge times, so stage times snap to the
// nearest grid point.
class SnapshotCache {
 public:
  SnapshotCache() = default;
  SnapshotCache(const std::vector<TimedEdge>& edges, int node_count, int grid_points = 32);
  const SparseRowMatrix& at(double t) const;

 private:
  std::vector<SparseRowMatrix> grid_;
};

// Eq.-style attention encoding over the snapshot at t: per directed edge
// j -> i, alpha_ij = sigmoid(a^T [W_Q x_i, W_K x_j, Phi(t)]); node output is
// sum_j alpha_ij W_V x_j + W_l x_i. Isolated nodes keep only the self term.
NodeId encode_graph(Tape& tape, NodeId x, const SparseRowMatrix& snapshot_raw, double t,
                    GraphEncoderParams& p);

// Shared drift of both trajectories at time t.
using DerivativeFn = std::function<NodeId(Tape&, NodeId e_us, NodeId e_cs, double t)>;

// f_us(e_us, g(t)) + f_cs(e_cs, g(t)) with l residual propagation layers over
// the normalized user-graph snapshot.
NodeId ode_derivative(Tape& tape, NodeId e_us, NodeId e_cs, double t,
                      const SparseRowMatrix& user_adj_normalized, OdeFunctionParams& p);

DerivativeFn make_ode_derivative(const SnapshotCache& user_snapshots, OdeFunctionParams& p);

struct OdePair {
  NodeId e_us;
  NodeId e_cs;
};

// Classical fixed-step RK4 from t_start to t_end; both states advance under
// the shared field. Differentiable end to end.
OdePair integrate_rk4(Tape& tape, NodeId e_us0, NodeId e_cs0, double t_start, double t_end,
                      int steps, const DerivativeFn& f);

}  // namespace tgode
