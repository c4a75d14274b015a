#include "tgode/model.hpp"

#include <cmath>

#include "tgode/errors.hpp"

namespace tgode {

DecoderParams::DecoderParams(int dd, int h, Rng& rng) : d(dd), heads(h) {
  if (dd % h != 0) throw ContractError("DecoderParams: d must be divisible by heads");
  auto make = [&](const char* name, int r, int c) {
    Param p(std::string("rec/dec_") + name, Tensor(r, c));
    init_gaussian(p, rng, 1.0 / std::sqrt(static_cast<double>(r)));
    return p;
  };
  w_q = make("w_q", dd, dd);
  w_k = make("w_k", dd, dd);
  w_v = make("w_v", dd, dd);
  w_o = make("w_o", dd, dd);
  ff_w1 = make("ff_w1", dd, 4 * dd);
  ff_b1 = Param("rec/dec_ff_b1", Tensor(1, 4 * dd));
  ff_w2 = make("ff_w2", 4 * dd, dd);
  ff_b2 = Param("rec/dec_ff_b2", Tensor(1, dd));
}

std::vector<Param*> DecoderParams::params() {
  return {&w_q, &w_k, &w_v, &w_o, &ff_w1, &ff_b1, &ff_w2, &ff_b2};
}

NodeId DecoderParams::forward(Tape& tape, NodeId seq) {
  int dh = d / heads;
  NodeId q = tape.matmul(seq, tape.leaf(w_q));
  NodeId k = tape.matmul(seq, tape.leaf(w_k));
  NodeId v = tape.matmul(seq, tape.leaf(w_v));
  double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  NodeId heads_out = -1;
  for (int hidx = 0; hidx < heads; ++hidx) {
    int c0 = hidx * dh, c1 = (hidx + 1) * dh;
    NodeId head = tape.attention(tape.slice_cols(q, c0, c1), tape.slice_cols(k, c0, c1),
                                 tape.slice_cols(v, c0, c1), true, scale);
    heads_out = hidx == 0 ? head : tape.concat_cols(heads_out, head);
  }
  NodeId x1 = tape.add(seq, tape.matmul(heads_out, tape.leaf(w_o)));
  NodeId ff = tape.add_rowvec(tape.matmul(tape.relu(tape.add_rowvec(tape.matmul(x1, tape.leaf(ff_w1)),
                                                                    tape.leaf(ff_b1))),
                                          tape.leaf(ff_w2)),
                              tape.leaf(ff_b2));
  return tape.add(x1, ff);
}

ModelParams::ModelParams(const ModelConfig& c, Rng& rng)
    : cfg(c),
      item_embeddings("rec/x", Tensor(c.vocab, c.d)),
      encoder(c.d, c.phi_dim, rng),
      ode(c.d, c.g_dim, c.ode_layers, rng),
      decoder(c.d, c.heads, rng),
      generator(
          [&] {
            GeneratorConfig gc;
            gc.vocab = c.vocab;
            gc.d = c.d;
            gc.d_z = c.d_z;
            gc.hidden = c.gen_hidden;
            gc.K = c.K;
            gc.c_dim = c.c_dim;
            gc.step_dim = c.step_dim;
            gc.lambda_reg = c.lambda_reg;
            gc.lambda_vae = c.lambda_vae;
            return gc;
          }(),
          rng) {
  init_gaussian(item_embeddings, rng, 0.1);
}

std::vector<Param*> ModelParams::recommender_params() {
  std::vector<Param*> ps = {&item_embeddings};
  for (Param* p : encoder.params()) ps.push_back(p);
  for (Param* p : ode.params()) ps.push_back(p);
  for (Param* p : decoder.params()) ps.push_back(p);
  return ps;
}

std::vector<Param*> ModelParams::diffusion_params() { return generator.params(); }

std::vector<Param*> ModelParams::all_params() {
  auto ps = recommender_params();
  for (Param* p : diffusion_params()) ps.push_back(p);
  return ps;
}

void GraphContext::rebuild_user_snapshots(int grid_points) {
  user_snapshots.clear();
  user_snapshots.reserve(user_graphs.size());
  for (const auto& g : user_graphs)
    user_snapshots.emplace_back(g.edges, node_count, grid_points);
}

GraphContext build_graph_context(const Dataset& train, int vocab, int grid_points) {
  GraphContext gc;
  gc.node_count = vocab;
  gc.user_graphs.resize(train.user_vocab_size);
  for (const auto& s : train.sequences) gc.user_graphs[s.user] = build_user_time_graph(s);
  for (int u = 0; u < train.user_vocab_size; ++u) gc.user_graphs[u].user = u;
  gc.cs_graph = build_item_evolution_graph(train);
  gc.cs_graph.node_count = vocab;
  gc.rebuild_user_snapshots(grid_points);
  gc.cs_snapshots = SnapshotCache(gc.cs_graph.edges, vocab, grid_points);
  return gc;
}

ForwardResult forward_to_time(Tape& tape, ModelParams& m, const GraphContext& gc, int user,
                              const std::vector<Event>& prefix, double t_target,
                              const AblationFlags& flags) {
  ForwardResult out;
  NodeId x = tape.leaf(m.item_embeddings);
  if (prefix.empty()) {
    out.h_s = tape.constant(Tensor(1, m.cfg.d));
    out.e_us_final = x;
    out.empty_prefix = true;
    return out;
  }

  double t_n = prefix.back().norm_time;
  const UserTimeGraph& ug = gc.user_graphs[user];
  TemporalAdjacency us_adj = adjacency_snapshot(ug.edges, gc.node_count, t_n);
  NodeId e_us = encode_graph(tape, x, us_adj.raw, t_n, m.encoder);
  NodeId e_cs = e_us;
  if (flags.cs_enabled()) {
    TemporalAdjacency cs_adj = adjacency_snapshot(gc.cs_graph.edges, gc.node_count, t_n);
    e_cs = encode_graph(tape, x, cs_adj.raw, t_n, m.encoder);
  }

  if (flags.ode_enabled() && t_target > t_n) {
    const SnapshotCache& cache = gc.user_snapshots[user];
    bool with_cs = flags.cs_enabled();
    DerivativeFn f = [&m, &cache, with_cs](Tape& tp, NodeId us, NodeId cs, double t) -> NodeId {
      if (with_cs) return ode_derivative(tp, us, cs, t, cache.at(t), m.ode);
      // without the item evolution graph only the user-graph drift remains
      int rows = tp.value(us).rows;
      Tensor g_t = m.ode.g_codec.encode_value(t);
      Tensor g_rows(rows, g_t.cols);
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < g_t.cols; ++j) g_rows.at(i, j) = g_t.at(0, j);
      NodeId h = us;
      NodeId w_c = tp.leaf(m.ode.w_c);
      for (int layer = 0; layer < m.ode.layers; ++layer)
        h = tp.add(tp.tanh_(tp.spmm(cache.at(t), tp.matmul(h, w_c))), h);
      return tp.matmul(tp.concat_cols(h, tp.constant(std::move(g_rows))), tp.leaf(m.ode.w_b));
    };
    OdePair evolved = integrate_rk4(tape, e_us, e_cs, t_n, t_target, m.cfg.ode_steps, f);
    e_us = evolved.e_us;
    e_cs = evolved.e_cs;
  }

  std::vector<int> seq_items;
  seq_items.reserve(prefix.size());
  for (const auto& e : prefix) seq_items.push_back(e.item);

  NodeId us_seq = m.decoder.forward(tape, tape.gather_rows(e_us, seq_items));
  int last = static_cast<int>(seq_items.size()) - 1;
  NodeId h_us = tape.l2_normalize_rows(tape.gather_rows(us_seq, {last}));
  if (flags.cs_enabled()) {
    NodeId cs_seq = m.decoder.forward(tape, tape.gather_rows(e_cs, seq_items));
    NodeId h_cs = tape.l2_normalize_rows(tape.gather_rows(cs_seq, {last}));
    out.h_s = tape.add(h_us, h_cs);
  } else {
    out.h_s = h_us;
  }
  out.e_us_final = e_us;
  return out;
}

NodeId predict_scores(Tape& tape, NodeId h_s, NodeId evolved_items, double tau) {
  if (tau <= 0.0) throw ContractError("predict_scores: tau must be positive");
  NodeId hn = tape.l2_normalize_rows(h_s);
  NodeId en = tape.l2_normalize_rows(evolved_items);
  return tape.softmax_rows(tape.scale(tape.matmul(hn, tape.transpose(en)), 1.0 / tau));
}

NodeId rec_loss(Tape& tape, NodeId y_hat, int target_item) {
  const Tensor& Y = tape.value(y_hat);
  if (Y.rows != 1) throw ContractError("rec_loss: y_hat must be a single row");
  if (target_item < 0 || target_item >= Y.cols) throw ContractError("rec_loss: invalid target index");
  Tensor one_hot(1, Y.cols);
  one_hot.at(0, target_item) = 1.0;
  Tensor ones = Tensor::full(1, Y.cols, 1.0);
  NodeId y = tape.constant(std::move(one_hot));
  NodeId one = tape.constant(std::move(ones));
  NodeId log_p = tape.log_(tape.clamp_min(y_hat, 1e-12));
  NodeId log_q = tape.log_(tape.clamp_min(tape.sub(one, y_hat), 1e-12));
  NodeId pos = tape.mul(y, log_p);
  NodeId neg = tape.mul(tape.sub(one, y), log_q);
  return tape.scale(tape.sum(tape.add(pos, neg)), -1.0);
}

}  // namespace tgode
