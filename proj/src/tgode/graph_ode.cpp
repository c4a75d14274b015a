#include "tgode/graph_ode.hpp"

#include <algorithm>
#include <cmath>

#include "tgode/errors.hpp"

namespace tgode {

GraphEncoderParams::GraphEncoderParams(int dd, int phi_dim, Rng& rng)
    : d(dd), phi("codec/phi", phi_dim, false) {
  double s = 1.0 / std::sqrt(static_cast<double>(dd));
  auto make = [&](const char* name, int r, int c, double stddev) {
    Param p(std::string("rec/enc_") + name, Tensor(r, c));
    init_gaussian(p, rng, stddev);
    return p;
  };
  w_q = make("w_q", dd, dd, s);
  w_k = make("w_k", dd, dd, s);
  w_v = make("w_v", dd, dd, s);
  w_l = make("w_l", dd, dd, s);
  attn = make("attn", 2 * dd + phi_dim, 1, 1.0 / std::sqrt(static_cast<double>(2 * dd + phi_dim)));
}

std::vector<Param*> GraphEncoderParams::params() { return {&w_q, &w_k, &w_v, &w_l, &attn}; }

OdeFunctionParams::OdeFunctionParams(int dd, int g_dim, int nlayers, Rng& rng)
    : d(dd), layers(nlayers), g_codec("codec/g", g_dim, false) {
  if (nlayers < 1) throw ContractError("OdeFunctionParams: layers must be >= 1");
  auto make = [&](const char* name, int r, int c) {
    Param p(std::string("ode/") + name, Tensor(r, c));
    init_gaussian(p, rng, 1.0 / std::sqrt(static_cast<double>(r)));
    return p;
  };
  w_a = make("w_a", dd + g_dim, dd);
  w_b = make("w_b", dd + g_dim, dd);
  w_c = make("w_c", dd, dd);
}

std::vector<Param*> OdeFunctionParams::params() { return {&w_a, &w_b, &w_c}; }

SnapshotCache::SnapshotCache(const std::vector<TimedEdge>& edges, int node_count, int grid_points) {
  grid_.reserve(grid_points + 1);
  for (int i = 0; i <= grid_points; ++i) {
    double t = static_cast<double>(i) / grid_points;
    grid_.push_back(adjacency_snapshot(edges, node_count, t).normalized);
  }
}

const SparseRowMatrix& SnapshotCache::at(double t) const {
  int n = static_cast<int>(grid_.size()) - 1;
  int idx = static_cast<int>(std::lround(t * n));
  idx = std::clamp(idx, 0, n);
  return grid_[idx];
}

NodeId encode_graph(Tape& tape, NodeId x, const SparseRowMatrix& snapshot_raw, double t,
                    GraphEncoderParams& p) {
  NodeId self = tape.matmul(x, tape.leaf(p.w_l));

  std::vector<int> src, dst;
  for (int i = 0; i < snapshot_raw.rows; ++i)
    for (const auto& e : snapshot_raw.row[i]) {
      src.push_back(i);
      dst.push_back(e.col);
    }
  if (src.empty()) return self;

  int n_edges = static_cast<int>(src.size());
  NodeId q = tape.matmul(x, tape.leaf(p.w_q));
  NodeId k = tape.matmul(x, tape.leaf(p.w_k));
  NodeId v = tape.matmul(x, tape.leaf(p.w_v));

  NodeId q_dst = tape.gather_rows(q, dst);  // W_Q x_i, i = receiving node
  NodeId k_src = tape.gather_rows(k, src);  // W_K x_j, j = in-neighbor

  Tensor phi_rows(n_edges, p.phi.dim);
  Tensor phi_t = p.phi.encode_value(t);
  for (int r = 0; r < n_edges; ++r)
    for (int c = 0; c < p.phi.dim; ++c) phi_rows.at(r, c) = phi_t.at(0, c);

  NodeId feat = tape.concat_cols(tape.concat_cols(q_dst, k_src), tape.constant(std::move(phi_rows)));
  NodeId alpha = tape.sigmoid(tape.matmul(feat, tape.leaf(p.attn)));  // E x 1
  NodeId msg = tape.scale_rows(tape.gather_rows(v, src), alpha);
  NodeId agg = tape.scatter_add_rows(msg, dst, snapshot_raw.rows);
  return tape.add(agg, self);
}

namespace {

NodeId broadcast_rows(Tape& tape, const Tensor& rowvec, int rows) {
  Tensor out(rows, rowvec.cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < rowvec.cols; ++j) out.at(i, j) = rowvec.at(0, j);
  return tape.constant(std::move(out));
}

}  // namespace

NodeId ode_derivative(Tape& tape, NodeId e_us, NodeId e_cs, double t,
                      const SparseRowMatrix& user_adj_normalized, OdeFunctionParams& p) {
  int rows = tape.value(e_us).rows;
  NodeId g_rows = broadcast_rows(tape, p.g_codec.encode_value(t), rows);

  NodeId f_cs = tape.matmul(tape.concat_cols(e_cs, g_rows), tape.leaf(p.w_a));

  NodeId h = e_us;
  NodeId w_c = tape.leaf(p.w_c);
  for (int layer = 0; layer < p.layers; ++layer)
    h = tape.add(tape.tanh_(tape.spmm(user_adj_normalized, tape.matmul(h, w_c))), h);
  NodeId f_us = tape.matmul(tape.concat_cols(h, g_rows), tape.leaf(p.w_b));

  return tape.add(f_us, f_cs);
}

DerivativeFn make_ode_derivative(const SnapshotCache& user_snapshots, OdeFunctionParams& p) {
  return [&user_snapshots, &p](Tape& tape, NodeId e_us, NodeId e_cs, double t) {
    return ode_derivative(tape, e_us, e_cs, t, user_snapshots.at(t), p);
  };
}

OdePair integrate_rk4(Tape& tape, NodeId e_us0, NodeId e_cs0, double t_start, double t_end,
                      int steps, const DerivativeFn& f) {
  if (t_end < t_start) throw ContractError("integrate_rk4: t_end < t_start");
  if (steps < 1) throw ContractError("integrate_rk4: steps must be >= 1");
  if (t_end == t_start) return {e_us0, e_cs0};

  double h = (t_end - t_start) / steps;
  NodeId us = e_us0;
  NodeId cs = e_cs0;
  for (int s = 0; s < steps; ++s) {
    double t = t_start + s * h;
    NodeId k1 = f(tape, us, cs, t);
    NodeId k2 = f(tape, tape.add(us, tape.scale(k1, h / 2)), tape.add(cs, tape.scale(k1, h / 2)),
                  t + h / 2);
    NodeId k3 = f(tape, tape.add(us, tape.scale(k2, h / 2)), tape.add(cs, tape.scale(k2, h / 2)),
                  t + h / 2);
    NodeId k4 = f(tape, tape.add(us, tape.scale(k3, h)), tape.add(cs, tape.scale(k3, h)), t + h);
    NodeId incr = tape.scale(
        tape.add(tape.add(k1, tape.scale(k2, 2.0)), tape.add(tape.scale(k3, 2.0), k4)), h / 6.0);
    us = tape.add(us, incr);
    cs = tape.add(cs, incr);
    if (!tape.value(us).finite() || !tape.value(cs).finite())
      throw NumericError("integrate_rk4: non-finite state at step " + std::to_string(s));
  }
  return {us, cs};
}

}  // namespace tgode
