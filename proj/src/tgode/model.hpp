#pragma once

#include <memory>
#include <vector>

#include "tgode/dataset.hpp"
#include "tgode/diffusion.hpp"
#include "tgode/graph_ode.hpp"
#include "tgode/temporal_graphs.hpp"
#include "tgode/tensor.hpp"

namespace tgode {

// Single-block causal self-attention decoder with a feed-forward sublayer.
struct DecoderParams {
  int d = 0;
  int heads = 2;
  Param w_q, w_k, w_v, w_o;  // d x d
  Param ff_w1, ff_b1;        // d -> 4d
  Param ff_w2, ff_b2;        // 4d -> d

  DecoderParams() = default;
  DecoderParams(int d, int heads, Rng& rng);
  std::vector<Param*> params();

  // seq is L x d; returns L x d
  NodeId forward(Tape& tape, NodeId seq);
};

struct AblationFlags {
  bool no_diff = false;
  bool no_ode = false;
  bool no_cs = false;

  static AblationFlags base() { return {true, true, true}; }
  bool diffusion_enabled() const { return !no_diff; }
  bool ode_enabled() const { return !no_ode; }
  bool cs_enabled() const { return !no_cs; }
};

struct ModelConfig {
  int vocab = 0;
  int d = 64;
  int d_z = 32;
  int K = 5;
  int heads = 2;
  int ode_layers = 2;
  int ode_steps = 4;
  int phi_dim = 16;
  int g_dim = 16;
  int c_dim = 16;
  int step_dim = 8;
  int gen_hidden = 64;
  int snapshot_grid = 32;
  double tau = 0.07;
  double lambda_reg = 1e-4;
  double lambda_vae = 1e-3;
};

// Every trainable tensor of the pipeline; the single source of truth for d.
struct ModelParams {
  ModelConfig cfg;
  Param item_embeddings;  // "rec/x", vocab x d
  GraphEncoderParams encoder;
  OdeFunctionParams ode;
  DecoderParams decoder;
  GeneratorParams generator;

  ModelParams() = default;
  ModelParams(const ModelConfig& cfg, Rng& rng);

  std::vector<Param*> recommender_params();  // embeddings + encoder + ode + decoder
  std::vector<Param*> diffusion_params();
  std::vector<Param*> all_params();
};

// Immutable graph context for forward passes: the (possibly augmented)
// per-user graphs and the global item evolution graph, with snapshot caches.
struct GraphContext {
  std::vector<UserTimeGraph> user_graphs;  // indexed by user
  ItemEvolutionGraph cs_graph;
  std::vector<SnapshotCache> user_snapshots;
  SnapshotCache cs_snapshots;
  int node_count = 0;

  void rebuild_user_snapshots(int grid_points);
};

GraphContext build_graph_context(const Dataset& train, int vocab, int grid_points);

struct ForwardResult {
  NodeId h_s;         // 1 x d sequence representation at target time
  NodeId e_us_final;  // vocab x d evolved us-stream item embeddings
  bool empty_prefix = false;
};

// Full pathway: encode both graphs at the last observed time, integrate the
// ODE to the target time, decode the prefix sequence. An empty prefix yields
// h_s = 0 and un-evolved embeddings.
ForwardResult forward_to_time(Tape& tape, ModelParams& m, const GraphContext& gc, int user,
                              const std::vector<Event>& prefix, double t_target,
                              const AblationFlags& flags);

// Eq.-style cosine scoring: softmax(normalize(h_s) . normalize(e_v) / tau).
NodeId predict_scores(Tape& tape, NodeId h_s, NodeId evolved_items, double tau);

// Binary cross-entropy over the full vocabulary against a one-hot target.
NodeId rec_loss(Tape& tape, NodeId y_hat, int target_item);

}  // namespace tgode
