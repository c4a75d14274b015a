#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tgode/errors.hpp"
#include "tgode/rng.hpp"

namespace tgode {

// Dense row-major matrix of doubles. Vectors are 1xN. Everything in the model
// is rank <= 2; the checkpoint format allows higher ranks but nothing uses them.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}

  static Tensor zeros(int r, int c) { return Tensor(r, c); }
  static Tensor full(int r, int c, double x) {
    Tensor t(r, c);
    for (auto& e : t.v) e = x;
    return t;
  }
  static Tensor row(std::vector<double> vals) {
    Tensor t;
    t.rows = 1;
    t.cols = static_cast<int>(vals.size());
    t.v = std::move(vals);
    return t;
  }

  std::size_t size() const { return v.size(); }
  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
  bool finite() const;
  void fill(double x) {
    for (auto& e : v) e = x;
  }
};

// A named trainable parameter: value plus accumulated gradient.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  Param() = default;
  Param(std::string n, Tensor init) : name(std::move(n)), value(std::move(init)), grad(value.rows, value.cols) {}

  void zero_grad() { grad.fill(0.0); }
};

// Constant sparse row-major matrix used for adjacency propagation. Not
// differentiable; gradients flow only through the dense operand of spmm.
struct SparseRowMatrix {
  struct Entry {
    int col;
    double w;
  };
  int rows = 0;
  int cols = 0;
  std::vector<std::vector<Entry>> row;

  SparseRowMatrix() = default;
  SparseRowMatrix(int r, int c) : rows(r), cols(c), row(r) {}
};

using NodeId = int;

// Reverse-mode tape. Ops record forward values and a vector-Jacobian product;
// backward() walks the recording in reverse. One tape per training example or
// batch; parameters live outside and collect gradients across tapes.
class Tape {
 public:
  struct Node {
    Tensor val;
    Tensor grad;  // allocated lazily in backward()
    std::function<void(Tape&, Node&)> vjp;  // may be empty for leaves/constants
    Param* param = nullptr;
  };

  NodeId leaf(Param& p);          // tracked: backward adds into p.grad
  NodeId constant(Tensor t);      // untracked input

  NodeId matmul(NodeId a, NodeId b);
  NodeId transpose(NodeId a);
  NodeId add(NodeId a, NodeId b);
  NodeId add_rowvec(NodeId a, NodeId b);  // b is 1xN, broadcast over rows of a
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId a, double c);
  NodeId scale_rows(NodeId a, NodeId s);  // s is Mx1; row i of a scaled by s[i]
  NodeId concat_cols(NodeId a, NodeId b);
  NodeId slice_cols(NodeId a, int c0, int c1);  // [c0, c1)
  NodeId sum(NodeId a);
  NodeId mean(NodeId a);
  NodeId sigmoid(NodeId a);
  NodeId tanh_(NodeId a);
  NodeId relu(NodeId a);
  NodeId exp_(NodeId a);
  NodeId abs_(NodeId a);
  NodeId clamp_min(NodeId a, double lo);
  NodeId log_(NodeId a);
  NodeId sin_(NodeId a);
  NodeId cos_(NodeId a);
  NodeId softmax_rows(NodeId a);
  NodeId l2_normalize_rows(NodeId a);
  NodeId squared_error(NodeId a, NodeId b);  // sum of squared differences, 1x1
  NodeId gather_rows(NodeId a, std::vector<int> idx);
  NodeId scatter_add_rows(NodeId a, std::vector<int> idx, int out_rows);
  NodeId spmm(const SparseRowMatrix& m, NodeId b);  // m is copied onto the tape

  // Scaled dot-product attention over one sequence: softmax(q k^T * scale
  // [+ causal mask]) v. Composed from primitive ops, so its VJP is exact.
  NodeId attention(NodeId q, NodeId k, NodeId v, bool causal, double scale_factor);

  void backward(NodeId loss);

  const Tensor& value(NodeId id) const { return nodes_[id].val; }
  const Tensor& grad(NodeId id) const { return nodes_[id].grad; }
  std::size_t node_count() const { return nodes_.size(); }

 private:
  std::vector<Node> nodes_;
  std::vector<SparseRowMatrix> sparse_;

  NodeId push(Tensor val, std::function<void(Tape&, Node&)> vjp);
  Tensor& grad_buf(NodeId id);
  void add_grad(NodeId id, const Tensor& g);
  friend struct TapeDetail;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adaptive-moment optimizer with bias correction. Parameters are registered
// once; step() consumes and clears their accumulated gradients.
class Adam {
 public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

  void register_params(const std::vector<Param*>& ps);
  void step();
  std::int64_t step_count() const { return t_; }
  AdamConfig& config() { return cfg_; }

 private:
  AdamConfig cfg_;
  std::vector<Param*> params_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::int64_t t_ = 0;
};

// Fill a parameter with scaled Gaussian entries (fan-in scaling).
void init_gaussian(Param& p, Rng& rng, double stddev);

}  // namespace tgode
