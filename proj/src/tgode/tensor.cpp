#include "tgode/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tgode {

namespace {

std::string shape_str(const Tensor& t) {
  std::ostringstream os;
  os << t.rows << "x" << t.cols;
  return os.str();
}

[[noreturn]] void dim_error(const char* op, const Tensor& a, const Tensor& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b));
}

[[noreturn]] void dim_error(const char* op, const Tensor& a) {
  throw DimensionError(std::string(op) + ": bad shape " + shape_str(a));
}

}  // namespace

bool Tensor::finite() const {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

NodeId Tape::push(Tensor val, std::function<void(Tape&, Node&)> vjp) {
  Node n;
  n.val = std::move(val);
  n.vjp = std::move(vjp);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

Tensor& Tape::grad_buf(NodeId id) {
  Node& n = nodes_[id];
  if (n.grad.v.empty()) n.grad = Tensor(n.val.rows, n.val.cols);
  return n.grad;
}

void Tape::add_grad(NodeId id, const Tensor& g) {
  Tensor& dst = grad_buf(id);
  for (std::size_t i = 0; i < dst.v.size(); ++i) dst.v[i] += g.v[i];
}

NodeId Tape::leaf(Param& p) {
  NodeId id = push(p.value, nullptr);
  nodes_[id].param = &p;
  return id;
}

NodeId Tape::constant(Tensor t) { return push(std::move(t), nullptr); }

NodeId Tape::matmul(NodeId a, NodeId b) {
  const Tensor& A = nodes_[a].val;
  const Tensor& B = nodes_[b].val;
  if (A.cols != B.rows) dim_error("matmul", A, B);
  Tensor C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      double aik = A.at(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < B.cols; ++j) C.at(i, j) += aik * B.at(k, j);
    }
  return push(std::move(C), [a, b](Tape& t, Node& n) {
    const Tensor& A = t.nodes_[a].val;
    const Tensor& B = t.nodes_[b].val;
    const Tensor& dC = n.grad;
    Tensor& dA = t.grad_buf(a);
    for (int i = 0; i < A.rows; ++i)
      for (int j = 0; j < B.cols; ++j) {
        double d = dC.at(i, j);
        if (d == 0.0) continue;
        for (int k = 0; k < A.cols; ++k) dA.at(i, k) += d * B.at(k, j);
      }
    Tensor& dB = t.grad_buf(b);
    for (int i = 0; i < A.rows; ++i)
      for (int k = 0; k < A.cols; ++k) {
        double aik = A.at(i, k);
        if (aik == 0.0) continue;
        for (int j = 0; j < B.cols; ++j) dB.at(k, j) += aik * dC.at(i, j);
      }
  });
}

NodeId Tape::transpose(NodeId a) {
  const Tensor& A = nodes_[a].val;
  Tensor C(A.cols, A.rows);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) C.at(j, i) = A.at(i, j);
  return push(std::move(C), [a](Tape& t, Node& n) {
    Tensor& dA = t.grad_buf(a);
    for (int i = 0; i < dA.rows; ++i)
      for (int j = 0; j < dA.cols; ++j) dA.at(i, j) += n.grad.at(j, i);
  });
}

NodeId Tape::add(NodeId a, NodeId b) {
  const Tensor& A = nodes_[a].val;
  const Tensor& B = nodes_[b].val;
  if (!A.same_shape(B)) dim_error("add", A, B);
  Tensor C = A;
  for (std::size_t i = 0; i < C.v.size(); ++i) C.v[i] += B.v[i];
  return push(std::move(C), [a, b](Tape& t, Node& n) {
    t.add_grad(a, n.grad);
    t.add_grad(b, n.grad);
  });
}

NodeId Tape::add_rowvec(NodeId a, NodeId b) {
  const Tensor& A = nodes_[a].val;
  const Tensor& B = nodes_[b].val;
  if (B.rows != 1 || B.cols != A.cols) dim_error("add_rowvec", A, B);
  Tensor C = A;
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) C.at(i, j) += B.at(0, j);
  return push(std::move(C), [a, b](Tape& t, Node& n) {
    t.add_grad(a, n.grad);
    Tensor& dB = t.grad_buf(b);
    for (int i = 0; i < n.grad.rows; ++i)
      for (int j = 0; j < n.grad.cols; ++j) dB.at(0, j) += n.grad.at(i, j);
  });
}

NodeId Tape::sub(NodeId a, NodeId b) {
  const Tensor& A = nodes_[a].val;
  const Tensor& B = nodes_[b].val;
  if (!A.same_shape(B)) dim_error("sub", A, B);
  Tensor C = A;
  for (std::size_t i = 0; i < C.v.size(); ++i) C.v[i] -= B.v[i];
  return push(std::move(C), [a, b](Tape& t, Node& n) {
    t.add_grad(a, n.grad);
    Tensor& dB = t.grad_buf(b);
    for (std::size_t i = 0; i < dB.v.size(); ++i) dB.v[i] -= n.grad.v[i];
  });
}

NodeId Tape::mul(NodeId a, NodeId b) {
  const Tensor& A = nodes_[a].val;
  const Tensor& B = nodes_[b].val;
  if (!A.same_shape(B)) dim_error("mul", A, B);
  Tensor C = A;
  for (std::size_t i = 0; i < C.v.size(); ++i) C.v[i] *= B.v[i];
  return push(std::move(C), [a, b](Tape& t, Node& n) {
    const Tensor& A = t.nodes_[a].val;
    const Tensor& B = t.nodes_[b].val;
    Tensor& dA = t.grad_buf(a);
    Tensor& dB = t.grad_buf(b);
    for (std::size_t i = 0; i < dA.v.size(); ++i) {
      dA.v[i] += n.grad.v[i] * B.v[i];
      dB.v[i] += n.grad.v[i] * A.v[i];
    }
  });
}

NodeId Tape::scale(NodeId a, double c) {
  Tensor C = nodes_[a].val;
  for (auto& e : C.v) e *= c;
  return push(std::move(C), [a, c](Tape& t, Node& n) {
    Tensor& dA = t.grad_buf(a);
    for (std::size_t i = 0; i < dA.v.size(); ++i) dA.v[i] += c * n.grad.v[i];
  });
}

NodeId Tape::scale_rows(NodeId a, NodeId s) {
  const Tensor& A = nodes_[a].val;
  const Tensor& S = nodes_[s].val;
  if (S.cols != 1 || S.rows != A.rows) dim_error("scale_rows", A, S);
  Tensor C = A;
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) C.at(i, j) *= S.at(i, 0);
  return push(std::move(C), [a, s](Tape& t, Node& n) {
    const Tensor& A = t.nodes_[a].val;
    const Tensor& S = t.nodes_[s].val;
    Tensor& dA = t.grad_buf(a);
    Tensor& dS = t.grad_buf(s);
    for (int i = 0; i < A.rows; ++i)
      for (int j = 0; j < A.cols; ++j) {
        dA.at(i, j) += S.at(i, 0) * n.grad.at(i, j);
        dS.at(i, 0) += A.at(i, j) * n.grad.at(i, j);
      }
  });
}

NodeId Tape::concat_cols(NodeId a, NodeId b) {
  const Tensor& A = nodes_[a].val;
  const Tensor& B = nodes_[b].val;
  if (A.rows != B.rows) dim_error("concat_cols", A, B);
  Tensor C(A.rows, A.cols + B.cols);
  for (int i = 0; i < A.rows; ++i) {
    for (int j = 0; j < A.cols; ++j) C.at(i, j) = A.at(i, j);
    for (int j = 0; j < B.cols; ++j) C.at(i, A.cols + j) = B.at(i, j);
  }
  int ac = A.cols;
  return push(std::move(C), [a, b, ac](Tape& t, Node& n) {
    Tensor& dA = t.grad_buf(a);
    Tensor& dB = t.grad_buf(b);
    for (int i = 0; i < dA.rows; ++i) {
      for (int j = 0; j < dA.cols; ++j) dA.at(i, j) += n.grad.at(i, j);
      for (int j = 0; j < dB.cols; ++j) dB.at(i, j) += n.grad.at(i, ac + j);
    }
  });
}

NodeId Tape::slice_cols(NodeId a, int c0, int c1) {
  const Tensor& A = nodes_[a].val;
  if (c0 < 0 || c1 > A.cols || c0 >= c1) dim_error("slice_cols", A);
  Tensor C(A.rows, c1 - c0);
  for (int i = 0; i < A.rows; ++i)
    for (int j = c0; j < c1; ++j) C.at(i, j - c0) = A.at(i, j);
  return push(std::move(C), [a, c0, c1](Tape& t, Node& n) {
    Tensor& dA = t.grad_buf(a);
    for (int i = 0; i < dA.rows; ++i)
      for (int j = c0; j < c1; ++j) dA.at(i, j) += n.grad.at(i, j - c0);
  });
}

NodeId Tape::sum(NodeId a) {
  const Tensor& A = nodes_[a].val;
  Tensor C(1, 1);
  for (double x : A.v) C.v[0] += x;
  return push(std::move(C), [a](Tape& t, Node& n) {
    Tensor& dA = t.grad_buf(a);
    for (auto& e : dA.v) e += n.grad.v[0];
  });
}

NodeId Tape::mean(NodeId a) {
  const Tensor& A = nodes_[a].val;
  double inv = 1.0 / static_cast<double>(A.size());
  Tensor C(1, 1);
  for (double x : A.v) C.v[0] += x;
  C.v[0] *= inv;
  return push(std::move(C), [a, inv](Tape& t, Node& n) {
    Tensor& dA = t.grad_buf(a);
    for (auto& e : dA.v) e += inv * n.grad.v[0];
  });
}

NodeId Tape::sigmoid(NodeId a) {
  Tensor C = nodes_[a].val;
  for (auto& e : C.v) e = 1.0 / (1.0 + std::exp(-e));
  return push(std::move(C), [a](Tape& t, Node& n) {
    Tensor& dA = t.grad_buf(a);
    for (std::size_t i = 0; i < dA.v.size(); ++i) {
      double y = n.val.v[i];
      dA.v[i] += n.grad.v[i] * y * (1.0 - y);
    }
  });
}

NodeId Tape::tanh_(NodeId a) {
  Tensor C = nodes_[a].val;
  for (auto& e : C.v) e = std::tanh(e);
  return push(std::move(C), [a](Tape& t, Node& n) {
    Tensor& dA = t.grad_buf(a);
    for (std::size_t i = 0; i < dA.v.size(); ++i) {
      double y = n.val.v[i];
      dA.v[i] += n.grad.v[i] * (1.0 - y * y);
    }
  });
}

NodeId Tape::relu(NodeId a) {
  Tensor C = nodes_[a].val;
  for (auto& e : C.v) e = e > 0.0 ? e : 0.0;
  return push(std::move(C), [a](Tape& t, Node& n) {
    const Tensor& A = t.nodes_[a].val;
    Tensor& dA = t.grad_buf(a);
    for (std::size_t i = 0; i < dA.v.size(); ++i)
      if (A.v[i] > 0.0) dA.v[i] += n.grad.v[i];
  });
}

NodeId Tape::exp_(NodeId a) {
  Tensor C = nodes_[a].val;
  for (auto& e : C.v) e = std::exp(e);
  return push(std::move(C), [a](Tape& t, Node& n) {
    Tensor& dA = t.grad_buf(a);
    for (std::size_t i = 0; i < dA.v.size(); ++i) dA.v[i] += n.grad.v[i] * n.val.v[i];
  });
}

NodeId Tape::abs_(NodeId a) {
  Tensor C = nodes_[a].val;
  for (auto& e : C.v) e = std::fabs(e);
  return push(std::move(C), [a](Tape& t, Node& n) {
    const Tensor& A = t.nodes_[a].val;
    Tensor& dA = t.grad_buf(a);
    for (std::size_t i = 0; i < dA.v.size(); ++i)
      dA.v[i] += n.grad.v[i] * (A.v[i] > 0.0 ? 1.0 : A.v[i] < 0.0 ? -1.0 : 0.0);
  });
}

NodeId Tape::clamp_min(NodeId a, double lo) {
  Tensor C = nodes_[a].val;
  for (auto& e : C.v) e = e < lo ? lo : e;
  return push(std::move(C), [a, lo](Tape& t, Node& n) {
    const Tensor& A = t.nodes_[a].val;
    Tensor& dA = t.grad_buf(a);
    for (std::size_t i = 0; i < dA.v.size(); ++i)
      if (A.v[i] >= lo) dA.v[i] += n.grad.v[i];
  });
}

NodeId Tape::log_(NodeId a) {
  const Tensor& A = nodes_[a].val;
  for (double x : A.v)
    if (!(x > 0.0)) throw DomainError("log: non-positive input " + std::to_string(x));
  Tensor C = A;
  for (auto& e : C.v) e = std::log(e);
  return push(std::move(C), [a](Tape& t, Node& n) {
    const Tensor& A = t.nodes_[a].val;
    Tensor& dA = t.grad_buf(a);
    for (std::size_t i = 0; i < dA.v.size(); ++i) dA.v[i] += n.grad.v[i] / A.v[i];
  });
}

NodeId Tape::sin_(NodeId a) {
  Tensor C = nodes_[a].val;
  for (auto& e : C.v) e = std::sin(e);
  return push(std::move(C), [a](Tape& t, Node& n) {
    const Tensor& A = t.nodes_[a].val;
    Tensor& dA = t.grad_buf(a);
    for (std::size_t i = 0; i < dA.v.size(); ++i) dA.v[i] += n.grad.v[i] * std::cos(A.v[i]);
  });
}

NodeId Tape::cos_(NodeId a) {
  Tensor C = nodes_[a].val;
  for (auto& e : C.v) e = std::cos(e);
  return push(std::move(C), [a](Tape& t, Node& n) {
    const Tensor& A = t.nodes_[a].val;
    Tensor& dA = t.grad_buf(a);
    for (std::size_t i = 0; i < dA.v.size(); ++i) dA.v[i] -= n.grad.v[i] * std::sin(A.v[i]);
  });
}

NodeId Tape::softmax_rows(NodeId a) {
  const Tensor& A = nodes_[a].val;
  if (!A.finite()) throw DomainError("softmax: non-finite input");
  Tensor C(A.rows, A.cols);
  for (int i = 0; i < A.rows; ++i) {
    double mx = A.at(i, 0);
    for (int j = 1; j < A.cols; ++j) mx = std::max(mx, A.at(i, j));
    double z = 0.0;
    for (int j = 0; j < A.cols; ++j) {
      double e = std::exp(A.at(i, j) - mx);
      C.at(i, j) = e;
      z += e;
    }
    for (int j = 0; j < A.cols; ++j) C.at(i, j) /= z;
  }
  return push(std::move(C), [a](Tape& t, Node& n) {
    Tensor& dA = t.grad_buf(a);
    for (int i = 0; i < n.val.rows; ++i) {
      double dot = 0.0;
      for (int j = 0; j < n.val.cols; ++j) dot += n.grad.at(i, j) * n.val.at(i, j);
      for (int j = 0; j < n.val.cols; ++j)
        dA.at(i, j) += n.val.at(i, j) * (n.grad.at(i, j) - dot);
    }
  });
}

NodeId Tape::l2_normalize_rows(NodeId a) {
  const Tensor& A = nodes_[a].val;
  Tensor C(A.rows, A.cols);
  std::vector<double> norms(A.rows, 0.0);
  for (int i = 0; i < A.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < A.cols; ++j) s += A.at(i, j) * A.at(i, j);
    double nrm = std::sqrt(s);
    norms[i] = nrm;
    if (nrm > 1e-12)
      for (int j = 0; j < A.cols; ++j) C.at(i, j) = A.at(i, j) / nrm;
    // zero row stays zero
  }
  return push(std::move(C), [a, norms](Tape& t, Node& n) {
    Tensor& dA = t.grad_buf(a);
    for (int i = 0; i < n.val.rows; ++i) {
      double nrm = norms[i];
      if (nrm <= 1e-12) continue;
      double dot = 0.0;
      for (int j = 0; j < n.val.cols; ++j) dot += n.grad.at(i, j) * n.val.at(i, j);
      for (int j = 0; j < n.val.cols; ++j)
        dA.at(i, j) += (n.grad.at(i, j) - n.val.at(i, j) * dot) / nrm;
    }
  });
}

NodeId Tape::squared_error(NodeId a, NodeId b) {
  const Tensor& A = nodes_[a].val;
  const Tensor& B = nodes_[b].val;
  if (!A.same_shape(B)) dim_error("squared_error", A, B);
  Tensor C(1, 1);
  for (std::size_t i = 0; i < A.v.size(); ++i) {
    double d = A.v[i] - B.v[i];
    C.v[0] += d * d;
  }
  return push(std::move(C), [a, b](Tape& t, Node& n) {
    const Tensor& A = t.nodes_[a].val;
    const Tensor& B = t.nodes_[b].val;
    Tensor& dA = t.grad_buf(a);
    Tensor& dB = t.grad_buf(b);
    for (std::size_t i = 0; i < A.v.size(); ++i) {
      double d = 2.0 * (A.v[i] - B.v[i]) * n.grad.v[0];
      dA.v[i] += d;
      dB.v[i] -= d;
    }
  });
}

NodeId Tape::gather_rows(NodeId a, std::vector<int> idx) {
  const Tensor& A = nodes_[a].val;
  for (int i : idx)
    if (i < 0 || i >= A.rows) dim_error("gather_rows", A);
  Tensor C(static_cast<int>(idx.size()), A.cols);
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (int j = 0; j < A.cols; ++j) C.at(static_cast<int>(r), j) = A.at(idx[r], j);
  return push(std::move(C), [a, idx = std::move(idx)](Tape& t, Node& n) {
    Tensor& dA = t.grad_buf(a);
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (int j = 0; j < dA.cols; ++j) dA.at(idx[r], j) += n.grad.at(static_cast<int>(r), j);
  });
}

NodeId Tape::scatter_add_rows(NodeId a, std::vector<int> idx, int out_rows) {
  const Tensor& A = nodes_[a].val;
  if (static_cast<int>(idx.size()) != A.rows) dim_error("scatter_add_rows", A);
  for (int i : idx)
    if (i < 0 || i >= out_rows) throw DimensionError("scatter_add_rows: index out of range");
  Tensor C(out_rows, A.cols);
  for (int r = 0; r < A.rows; ++r)
    for (int j = 0; j < A.cols; ++j) C.at(idx[r], j) += A.at(r, j);
  return push(std::move(C), [a, idx = std::move(idx)](Tape& t, Node& n) {
    Tensor& dA = t.grad_buf(a);
    for (int r = 0; r < dA.rows; ++r)
      for (int j = 0; j < dA.cols; ++j) dA.at(r, j) += n.grad.at(idx[r], j);
  });
}

NodeId Tape::spmm(const SparseRowMatrix& m, NodeId b) {
  const Tensor& B = nodes_[b].val;
  if (m.cols != B.rows) throw DimensionError("spmm: sparse cols != dense rows");
  sparse_.push_back(m);
  std::size_t mi = sparse_.size() - 1;
  Tensor C(m.rows, B.cols);
  for (int i = 0; i < m.rows; ++i)
    for (const auto& e : m.row[i])
      for (int j = 0; j < B.cols; ++j) C.at(i, j) += e.w * B.at(e.col, j);
  return push(std::move(C), [b, mi](Tape& t, Node& n) {
    const SparseRowMatrix& m = t.sparse_[mi];
    Tensor& dB = t.grad_buf(b);
    for (int i = 0; i < m.rows; ++i)
      for (const auto& e : m.row[i])
        for (int j = 0; j < dB.cols; ++j) dB.at(e.col, j) += e.w * n.grad.at(i, j);
  });
}

NodeId Tape::attention(NodeId q, NodeId k, NodeId v, bool causal, double scale_factor) {
  NodeId scores = scale(matmul(q, transpose(k)), scale_factor);
  if (causal) {
    const Tensor& S = nodes_[scores].val;
    Tensor mask(S.rows, S.cols);
    for (int i = 0; i < S.rows; ++i)
      for (int j = i + 1; j < S.cols; ++j) mask.at(i, j) = -1e30;
    scores = add(scores, constant(std::move(mask)));
  }
  return matmul(softmax_rows(scores), v);
}

void Tape::backward(NodeId loss) {
  const Tensor& L = nodes_[loss].val;
  if (L.rows != 1 || L.cols != 1)
    throw ContractError("backward: loss must be a scalar, got " + shape_str(L));
  // node buffers are scratch per pass; only param grads accumulate across calls
  for (Node& n : nodes_) n.grad.fill(0.0);
  grad_buf(loss).v[0] = 1.0;
  for (NodeId id = loss; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad.v.empty()) continue;  // not on any path to the loss
    if (n.vjp) n.vjp(*this, n);
    if (n.param) {
      for (std::size_t i = 0; i < n.grad.v.size(); ++i) n.param->grad.v[i] += n.grad.v[i];
    }
  }
}

void Adam::register_params(const std::vector<Param*>& ps) {
  for (Param* p : ps) {
    params_.push_back(p);
    m_.emplace_back(p->value.rows, p->value.cols);
    v_.emplace_back(p->value.rows, p->value.cols);
  }
}

void Adam::step() {
  // Refuse the whole step if any gradient is non-finite; report per-parameter counts.
  std::string report;
  for (Param* p : params_) {
    std::size_t bad = 0;
    for (double g : p->grad.v)
      if (!std::isfinite(g)) ++bad;
    if (bad) report += p->name + ": " + std::to_string(bad) + " non-finite; ";
  }
  if (!report.empty()) throw NumericError("optimizer_step: non-finite gradients [" + report + "]");

  ++t_;
  double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t pi = 0; pi < params_.size(); ++pi) {
    Param& p = *params_[pi];
    for (std::size_t i = 0; i < p.value.v.size(); ++i) {
      double g = p.grad.v[i];
      m_[pi].v[i] = cfg_.beta1 * m_[pi].v[i] + (1.0 - cfg_.beta1) * g;
      v_[pi].v[i] = cfg_.beta2 * v_[pi].v[i] + (1.0 - cfg_.beta2) * g * g;
      double mhat = m_[pi].v[i] / bc1;
      double vhat = v_[pi].v[i] / bc2;
      p.value.v[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
    p.zero_grad();
  }
}

void init_gaussian(Param& p, Rng& rng, double stddev) {
  for (auto& e : p.value.v) e = stddev * rng.normal();
}

}  // namespace tgode
