#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "tgode/graph_ode.hpp"
#include "test_util.hpp"

using namespace tgode;
using tgode_test::random_tensor;

TEST_CASE("empty graph reduces to the self term") {
  Rng rng(3);
  GraphEncoderParams p(4, 6, rng);
  Tensor x = random_tensor(5, 4, rng);
  SparseRowMatrix empty(5, 5);
  Tape tape;
  NodeId e = encode_graph(tape, tape.constant(x), empty, 0.5, p);
  Tape ref;
  NodeId want = ref.matmul(ref.constant(x), ref.leaf(p.w_l));
  for (std::size_t i = 0; i < x.v.size(); ++i)
    CHECK(tape.value(e).v[i] == doctest::Approx(ref.value(want).v[i]));
}

TEST_CASE("single edge matches scalar arithmetic at d=2") {
  Rng rng(5);
  GraphEncoderParams p(2, 2, rng);
  // small fixed weights
  p.w_q.value.v = {0.1, 0.2, -0.1, 0.3};
  p.w_k.value.v = {0.2, -0.2, 0.1, 0.1};
  p.w_v.value.v = {0.3, 0.1, 0.0, 0.2};
  p.w_l.value.v = {1.0, 0.0, 0.0, 1.0};
  p.attn.value.v = {0.5, -0.5, 0.25, 0.25, 0.1, -0.1};
  Tensor x(2, 2);
  x.v = {1.0, -1.0, 0.5, 2.0};

  // one edge j=0 -> i=1
  SparseRowMatrix raw(2, 2);
  raw.row[0] = {{1, 1.0}};
  double t = 0.3;

  Tape tape;
  NodeId e = encode_graph(tape, tape.constant(x), raw, t, p);

  // scalar re-derivation of alpha and the aggregated row
  auto matvec = [&](const std::vector<double>& w, double a, double b) {
    return std::pair<double, double>{a * w[0] + b * w[2], a * w[1] + b * w[3]};
  };
  auto [q0, q1] = matvec(p.w_q.value.v, x.at(1, 0), x.at(1, 1));  // W_Q x_i, i = 1
  auto [k0, k1] = matvec(p.w_k.value.v, x.at(0, 0), x.at(0, 1));  // W_K x_j, j = 0
  Tensor phi = p.phi.encode_value(t);
  double pre = q0 * p.attn.value.v[0] + q1 * p.attn.value.v[1] + k0 * p.attn.value.v[2] +
               k1 * p.attn.value.v[3] + phi.at(0, 0) * p.attn.value.v[4] +
               phi.at(0, 1) * p.attn.value.v[5];
  double alpha = 1.0 / (1.0 + std::exp(-pre));
  CHECK(alpha > 0.0);
  CHECK(alpha < 1.0);
  auto [v0, v1] = matvec(p.w_v.value.v, x.at(0, 0), x.at(0, 1));
  auto [l0, l1] = matvec(p.w_l.value.v, x.at(1, 0), x.at(1, 1));
  CHECK(tape.value(e).at(1, 0) == doctest::Approx(alpha * v0 + l0).epsilon(1e-10));
  CHECK(tape.value(e).at(1, 1) == doctest::Approx(alpha * v1 + l1).epsilon(1e-10));
  // node 0 has no in-neighbors: self term only
  auto [s0, s1] = matvec(p.w_l.value.v, x.at(0, 0), x.at(0, 1));
  CHECK(tape.value(e).at(0, 0) == doctest::Approx(s0));
  CHECK(tape.value(e).at(0, 1) == doctest::Approx(s1));
}

TEST_CASE("zero drift weights freeze the states") {
  Rng rng(7);
  OdeFunctionParams p(3, 4, 1, rng);
  p.w_a.value.fill(0.0);
  p.w_b.value.fill(0.0);
  SparseRowMatrix adj(4, 4);
  Tensor us0 = random_tensor(4, 3, rng);
  Tensor cs0 = random_tensor(4, 3, rng);
  Tape tape;
  auto f = [&](Tape& t, NodeId us, NodeId cs, double time) {
    return ode_derivative(t, us, cs, time, adj, p);
  };
  OdePair out = integrate_rk4(tape, tape.constant(us0), tape.constant(cs0), 0.0, 1.0, 4, f);
  for (std::size_t i = 0; i < us0.v.size(); ++i) {
    CHECK(tape.value(out.e_us).v[i] == doctest::Approx(us0.v[i]));
    CHECK(tape.value(out.e_cs).v[i] == doctest::Approx(cs0.v[i]));
  }
}

TEST_CASE("empty adjacency single layer leaves the propagated state unchanged") {
  Rng rng(9);
  OdeFunctionParams p(3, 4, 1, rng);
  SparseRowMatrix adj(2, 2);
  Tensor us = random_tensor(2, 3, rng);
  Tensor cs = random_tensor(2, 3, rng);
  Tape tape;
  NodeId d = ode_derivative(tape, tape.constant(us), tape.constant(cs), 0.4, adj, p);

  // straight-line recomputation: f_us = [us, g] W_b, f_cs = [cs, g] W_a
  Tensor g = p.g_codec.encode_value(0.4);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) {
      double want = 0.0;
      for (int j = 0; j < 3; ++j) {
        want += us.at(r, j) * p.w_b.value.at(j, c);
        want += cs.at(r, j) * p.w_a.value.at(j, c);
      }
      for (int j = 0; j < 4; ++j) {
        want += g.at(0, j) * p.w_b.value.at(3 + j, c);
        want += g.at(0, j) * p.w_a.value.at(3 + j, c);
      }
      CHECK(tape.value(d).at(r, c) == doctest::Approx(want).epsilon(1e-10));
    }
}

TEST_CASE("derivative matches a straight-line re-implementation") {
  Rng rng(13);
  const int n = 4, d = 3, layers = 2;
  OdeFunctionParams p(d, 4, layers, rng);
  SparseRowMatrix adj(n, n);
  adj.row[0] = {{1, 0.5}, {2, 0.5}};
  adj.row[2] = {{3, 1.0}};
  adj.row[3] = {{0, 0.25}, {1, 0.75}};
  Tensor us = random_tensor(n, d, rng);
  Tensor cs = random_tensor(n, d, rng);
  double t = 0.6;

  Tape tape;
  NodeId out = ode_derivative(tape, tape.constant(us), tape.constant(cs), t, adj, p);

  // independent dense recomputation
  Tensor g = p.g_codec.encode_value(t);
  auto fuse = [&](const Tensor& state, const Param& w) {
    Tensor r(n, d);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < d; ++c) {
        double acc = 0.0;
        for (int j = 0; j < d; ++j) acc += state.at(i, j) * w.value.at(j, c);
        for (int j = 0; j < g.cols; ++j) acc += g.at(0, j) * w.value.at(d + j, c);
        r.at(i, c) = acc;
      }
    return r;
  };
  Tensor h = us;
  for (int layer = 0; layer < layers; ++layer) {
    Tensor nh(n, d);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < d; ++c) {
        double prop = 0.0;
        for (const auto& e : adj.row[i])
          for (int j = 0; j < d; ++j) prop += e.w * h.at(e.col, j) * p.w_c.value.at(j, c);
        nh.at(i, c) = std::tanh(prop) + h.at(i, c);
      }
    h = nh;
  }
  Tensor f_us = fuse(h, p.w_b);
  Tensor f_cs = fuse(cs, p.w_a);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c)
      CHECK(tape.value(out).at(i, c) == doctest::Approx(f_us.at(i, c) + f_cs.at(i, c)).epsilon(1e-9));
}

TEST_CASE("rk4 solves dy/dt = -2y to 1e-6 and converges at order four") {
  auto field = [](Tape& t, NodeId us, NodeId, double) { return t.scale(us, -2.0); };
  auto solve = [&](int steps) {
    Tape tape;
    NodeId y0 = tape.constant(Tensor::row({1.0}));
    OdePair out = integrate_rk4(tape, y0, y0, 0.0, 1.0, steps, field);
    return tape.value(out.e_us).v[0];
  };
  double exact = std::exp(-2.0);
  CHECK(std::fabs(solve(16) - exact) < 1e-6);
  double prev_err = std::fabs(solve(4) - exact);
  for (int steps : {8, 16, 32}) {
    double err = std::fabs(solve(steps) - exact);
    double factor = prev_err / err;
    CHECK(factor >= 12.0);
    CHECK(factor <= 20.0);
    prev_err = err;
  }
}

TEST_CASE("zero-length interval is the identity") {
  Rng rng(17);
  Tensor y = random_tensor(2, 2, rng);
  Tape tape;
  NodeId y0 = tape.constant(y);
  auto field = [](Tape& t, NodeId us, NodeId, double) { return t.scale(us, -2.0); };
  OdePair out = integrate_rk4(tape, y0, y0, 0.3, 0.3, 4, field);
  CHECK(out.e_us == y0);
}

TEST_CASE("gradients flow through the solver") {
  Rng rng(19);
  const int n = 4, d = 2;
  GraphEncoderParams enc(d, 2, rng);
  OdeFunctionParams p(d, 2, 1, rng);
  Param x("x", random_tensor(n, d, rng, 0.5));
  std::vector<TimedEdge> edges = {{0, 1, 0.1, 1.0}, {1, 2, 0.3, 1.0}, {2, 3, 0.5, 2.0}};
  SnapshotCache cache(edges, n, 8);
  Param target("target", random_tensor(n, d, rng, 0.5));

  auto f = [&](Tape& t) {
    NodeId e0 = encode_graph(t, t.leaf(x), cache.at(0.5), 0.5, enc);
    DerivativeFn field = make_ode_derivative(cache, p);
    OdePair out = integrate_rk4(t, e0, e0, 0.5, 1.0, 2, field);
    return t.squared_error(out.e_us, t.leaf(target));
  };
  std::vector<Param*> ps = {&x, &p.w_a, &p.w_b, &p.w_c, &enc.w_q, &enc.w_k, &enc.w_v, &enc.w_l,
                            &enc.attn};
  CHECK(tgode_test::max_rel_grad_err(ps, f) < 1e-4);
}

TEST_CASE("integration is bit-deterministic") {
  Rng rng(23);
  OdeFunctionParams p(3, 4, 2, rng);
  SparseRowMatrix adj(3, 3);
  adj.row[0] = {{1, 1.0}};
  Tensor us = random_tensor(3, 3, rng);
  Tensor cs = random_tensor(3, 3, rng);
  auto run = [&] {
    Tape tape;
    auto f = [&](Tape& t, NodeId a, NodeId b, double time) {
      return ode_derivative(t, a, b, time, adj, p);
    };
    OdePair out = integrate_rk4(tape, tape.constant(us), tape.constant(cs), 0.0, 1.0, 4, f);
    return tape.value(out.e_us).v;
  };
  CHECK(run() == run());
}

TEST_CASE("snapshot cache rounds to the nearest grid point") {
  std::vector<TimedEdge> edges = {{0, 1, 0.49, 1.0}};
  SnapshotCache cache(edges, 2, 4);  // grid at 0, 0.25, 0.5, 0.75, 1
  // 0.45 snaps to the 0.5 snapshot, which holds the 0.49 edge (strict <)
  CHECK(cache.at(0.45).row[0].size() == 1);
  CHECK(cache.at(0.3).row[0].empty());  // snaps to 0.25
  CHECK(cache.at(1.0).row[0].size() == 1);
}
