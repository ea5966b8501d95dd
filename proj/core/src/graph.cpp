#include "uniseq/graph.hpp"

#include <cmath>
#include <numbers>

#include "uniseq/errors.hpp"

namespace uniseq {

const char* op_name(Op op) {
  switch (op) {
    case Op::Leaf: return "leaf";
    case Op::MatMul: return "matmul";
    case Op::Add: return "add";
    case Op::AddRow: return "add_row";
    case Op::Mul: return "mul";
    case Op::MulRow: return "mul_row";
    case Op::Scale: return "scale";
    case Op::Gelu: return "gelu";
    case Op::SoftmaxRows: return "softmax_rows";
    case Op::LayerNormRows: return "layer_norm_rows";
    case Op::Transpose: return "transpose";
    case Op::Reshape: return "reshape";
    case Op::GatherRows: return "gather_rows";
    case Op::SliceCols: return "slice_cols";
    case Op::ConcatCols: return "concat_cols";
    case Op::SumAll: return "sum_all";
    case Op::MeanAll: return "mean_all";
    case Op::CrossEntropyLS: return "cross_entropy_ls";
  }
  return "?";
}

namespace kernels {

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2)
    throw ShapeError(std::string("matmul: need rank-2 operands, got ") + a.shape_str() + " and " +
                     b.shape_str());
  if (a.cols() != b.rows())
    throw ShapeError("matmul: inner dimensions disagree, " + a.shape_str() + " * " + b.shape_str());
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor c = Tensor::matrix(m, n);
  // i-k-j order: for each output element the k-sum still runs ascending.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = a.data[i * k + kk];
      const double* brow = &b.data[kk * n];
      double* crow = &c.data[i * n];
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

Tensor softmax_rows(const Tensor& x) {
  if (x.rank() != 2) throw ShapeError("softmax_rows: need rank-2, got " + x.shape_str());
  const std::size_t n = x.rows(), m = x.cols();
  Tensor y = Tensor::matrix(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = &x.data[i * m];
    double mx = row[0];
    for (std::size_t j = 1; j < m; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double e = std::exp(row[j] - mx);
      y.data[i * m + j] = e;
      sum += e;
    }
    for (std::size_t j = 0; j < m; ++j) y.data[i * m + j] /= sum;
  }
  return y;
}

Tensor layer_norm_rows(const Tensor& x, double eps) {
  if (x.rank() != 2) throw ShapeError("layer_norm_rows: need rank-2, got " + x.shape_str());
  const std::size_t n = x.rows(), m = x.cols();
  Tensor y = Tensor::matrix(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = &x.data[i * m];
    double mean = 0.0;
    for (std::size_t j = 0; j < m; ++j) mean += row[j];
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double d = row[j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(m);
    double inv = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < m; ++j) y.data[i * m + j] = (row[j] - mean) * inv;
  }
  return y;
}

Tensor transpose(const Tensor& x) {
  if (x.rank() != 2) throw ShapeError("transpose: need rank-2, got " + x.shape_str());
  Tensor y = Tensor::matrix(x.cols(), x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) y.at(j, i) = x.at(i, j);
  return y;
}

// tanh-approximation GELU
static constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
static constexpr double kGeluA = 0.044715;

double gelu(double x) {
  double t = std::tanh(kGeluC * (x + kGeluA * x * x * x));
  return 0.5 * x * (1.0 + t);
}

double gelu_grad(double x) {
  double inner = kGeluC * (x + kGeluA * x * x * x);
  double t = std::tanh(inner);
  double dinner = kGeluC * (1.0 + 3.0 * kGeluA * x * x);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * dinner;
}

}  // namespace kernels

NodeId Graph::push(Node node) {
  if (!node.value.all_finite())
    throw NumericFault(std::string("non-finite value produced by ") + op_name(node.op));
  nodes_.push_back(std::move(node));
  return static_cast<NodeId>(nodes_.size() - 1);
}

const Graph::Node& Graph::at(NodeId id) const {
  if (id >= nodes_.size()) throw ContractError("invalid node id");
  return nodes_[id];
}

NodeId Graph::input(Tensor value) {
  Node n;
  n.op = Op::Leaf;
  n.value = std::move(value);
  n.requires_grad = false;
  return push(std::move(n));
}

NodeId Graph::param(Tensor value) {
  Node n;
  n.op = Op::Leaf;
  n.value = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  Node n;
  n.op = Op::MatMul;
  n.parents = {a, b};
  n.value = kernels::matmul(at(a).value, at(b).value);
  n.requires_grad = at(a).requires_grad || at(b).requires_grad;
  return push(std::move(n));
}

NodeId Graph::add(NodeId a, NodeId b) {
  const Tensor& va = at(a).value;
  const Tensor& vb = at(b).value;
  if (!va.same_shape(vb))
    throw ShapeError("add: shape mismatch " + va.shape_str() + " vs " + vb.shape_str());
  Node n;
  n.op = Op::Add;
  n.parents = {a, b};
  n.value = va;
  for (std::size_t i = 0; i < vb.numel(); ++i) n.value.data[i] += vb.data[i];
  n.requires_grad = at(a).requires_grad || at(b).requires_grad;
  return push(std::move(n));
}

NodeId Graph::add_row(NodeId x, NodeId r) {
  const Tensor& vx = at(x).value;
  const Tensor& vr = at(r).value;
  if (vx.rank() != 2 || vr.rank() != 1 || vr.shape[0] != vx.cols())
    throw ShapeError("add_row: " + vx.shape_str() + " + " + vr.shape_str());
  Node n;
  n.op = Op::AddRow;
  n.parents = {x, r};
  n.value = vx;
  for (std::size_t i = 0; i < vx.rows(); ++i)
    for (std::size_t j = 0; j < vx.cols(); ++j) n.value.data[i * vx.cols() + j] += vr.data[j];
  n.requires_grad = at(x).requires_grad || at(r).requires_grad;
  return push(std::move(n));
}

NodeId Graph::mul(NodeId a, NodeId b) {
  const Tensor& va = at(a).value;
  const Tensor& vb = at(b).value;
  if (!va.same_shape(vb))
    throw ShapeError("mul: shape mismatch " + va.shape_str() + " vs " + vb.shape_str());
  Node n;
  n.op = Op::Mul;
  n.parents = {a, b};
  n.value = va;
  for (std::size_t i = 0; i < vb.numel(); ++i) n.value.data[i] *= vb.data[i];
  n.requires_grad = at(a).requires_grad || at(b).requires_grad;
  return push(std::move(n));
}

NodeId Graph::mul_row(NodeId x, NodeId r) {
  const Tensor& vx = at(x).value;
  const Tensor& vr = at(r).value;
  if (vx.rank() != 2 || vr.rank() != 1 || vr.shape[0] != vx.cols())
    throw ShapeError("mul_row: " + vx.shape_str() + " * " + vr.shape_str());
  Node n;
  n.op = Op::MulRow;
  n.parents = {x, r};
  n.value = vx;
  for (std::size_t i = 0; i < vx.rows(); ++i)
    for (std::size_t j = 0; j < vx.cols(); ++j) n.value.data[i * vx.cols() + j] *= vr.data[j];
  n.requires_grad = at(x).requires_grad || at(r).requires_grad;
  return push(std::move(n));
}

NodeId Graph::scale(NodeId a, double factor) {
  Node n;
  n.op = Op::Scale;
  n.parents = {a};
  n.value = at(a).value;
  for (double& v : n.value.data) v *= factor;
  n.requires_grad = at(a).requires_grad;
  n.xarg = factor;
  return push(std::move(n));
}

NodeId Graph::gelu(NodeId a) {
  Node n;
  n.op = Op::Gelu;
  n.parents = {a};
  n.value = at(a).value;
  for (double& v : n.value.data) v = kernels::gelu(v);
  n.requires_grad = at(a).requires_grad;
  return push(std::move(n));
}

NodeId Graph::softmax_rows(NodeId x) {
  Node n;
  n.op = Op::SoftmaxRows;
  n.parents = {x};
  n.value = kernels::softmax_rows(at(x).value);
  n.requires_grad = at(x).requires_grad;
  return push(std::move(n));
}

NodeId Graph::layer_norm_rows(NodeId x, double eps) {
  Node n;
  n.op = Op::LayerNormRows;
  n.parents = {x};
  n.value = kernels::layer_norm_rows(at(x).value, eps);
  n.requires_grad = at(x).requires_grad;
  n.xarg = eps;
  return push(std::move(n));
}

NodeId Graph::transpose(NodeId x) {
  Node n;
  n.op = Op::Transpose;
  n.parents = {x};
  n.value = kernels::transpose(at(x).value);
  n.requires_grad = at(x).requires_grad;
  return push(std::move(n));
}

NodeId Graph::reshape(NodeId x, std::vector<std::size_t> shape) {
  std::size_t count = 1;
  for (std::size_t d : shape) count *= d;
  const Tensor& vx = at(x).value;
  if (count != vx.numel())
    throw ShapeError("reshape: element count mismatch, " + vx.shape_str());
  Node n;
  n.op = Op::Reshape;
  n.parents = {x};
  n.value = vx;
  n.value.shape = std::move(shape);
  n.requires_grad = at(x).requires_grad;
  return push(std::move(n));
}

NodeId Graph::gather_rows(NodeId x, std::vector<std::int64_t> idx) {
  const Tensor& vx = at(x).value;
  if (vx.rank() != 2) throw ShapeError("gather_rows: need rank-2, got " + vx.shape_str());
  const std::size_t m = vx.cols();
  Node n;
  n.op = Op::GatherRows;
  n.parents = {x};
  n.value = Tensor::matrix(idx.size(), m);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    std::int64_t src = idx[r];
    if (src < 0) continue;  // zero row
    if (static_cast<std::size_t>(src) >= vx.rows())
      throw RangeError("gather_rows: index " + std::to_string(src) + " out of " +
                       std::to_string(vx.rows()) + " rows");
    for (std::size_t j = 0; j < m; ++j) n.value.data[r * m + j] = vx.data[src * m + j];
  }
  n.requires_grad = at(x).requires_grad;
  n.idx = std::move(idx);
  return push(std::move(n));
}

NodeId Graph::slice_cols(NodeId x, std::size_t c0, std::size_t c1) {
  const Tensor& vx = at(x).value;
  if (vx.rank() != 2 || c0 >= c1 || c1 > vx.cols())
    throw ShapeError("slice_cols: bad bounds for " + vx.shape_str());
  Node n;
  n.op = Op::SliceCols;
  n.parents = {x};
  n.value = Tensor::matrix(vx.rows(), c1 - c0);
  for (std::size_t i = 0; i < vx.rows(); ++i)
    for (std::size_t j = c0; j < c1; ++j) n.value.data[i * (c1 - c0) + (j - c0)] = vx.at(i, j);
  n.requires_grad = at(x).requires_grad;
  n.idx = {static_cast<std::int64_t>(c0), static_cast<std::int64_t>(c1)};
  return push(std::move(n));
}

NodeId Graph::concat_cols(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no parts");
  std::size_t rows = at(parts[0]).value.rows();
  std::size_t cols = 0;
  for (NodeId p : parts) {
    const Tensor& v = at(p).value;
    if (v.rank() != 2 || v.rows() != rows) throw ShapeError("concat_cols: row mismatch");
    cols += v.cols();
  }
  Node n;
  n.op = Op::ConcatCols;
  n.parents = parts;
  n.value = Tensor::matrix(rows, cols);
  std::size_t off = 0;
  for (NodeId p : parts) {
    const Tensor& v = at(p).value;
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < v.cols(); ++j) n.value.data[i * cols + off + j] = v.at(i, j);
    off += v.cols();
    n.requires_grad = n.requires_grad || at(p).requires_grad;
  }
  return push(std::move(n));
}

NodeId Graph::sum_all(NodeId x) {
  Node n;
  n.op = Op::SumAll;
  n.parents = {x};
  double s = 0.0;
  for (double v : at(x).value.data) s += v;
  n.value = Tensor::scalar(s);
  n.requires_grad = at(x).requires_grad;
  return push(std::move(n));
}

NodeId Graph::mean_all(NodeId x) {
  Node n;
  n.op = Op::MeanAll;
  n.parents = {x};
  double s = 0.0;
  for (double v : at(x).value.data) s += v;
  n.value = Tensor::scalar(s / static_cast<double>(at(x).value.numel()));
  n.requires_grad = at(x).requires_grad;
  return push(std::move(n));
}

// Row-wise log-softmax pieces used by cross-entropy forward and backward.
static void log_softmax_row(const double* row, std::size_t m, std::vector<double>& out) {
  double mx = row[0];
  for (std::size_t j = 1; j < m; ++j) mx = std::max(mx, row[j]);
  double sum = 0.0;
  for (std::size_t j = 0; j < m; ++j) sum += std::exp(row[j] - mx);
  double lse = mx + std::log(sum);
  out.resize(m);
  for (std::size_t j = 0; j < m; ++j) out[j] = row[j] - lse;
}

NodeId Graph::cross_entropy_label_smoothed(NodeId logits, std::vector<std::int64_t> targets,
                                           double smoothing, std::int64_t ignore_id) {
  const Tensor& vx = at(logits).value;
  if (vx.rank() != 2) throw ShapeError("cross_entropy: logits must be rank-2");
  if (targets.size() != vx.rows())
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                     std::to_string(vx.rows()) + " logit rows");
  if (smoothing < 0.0 || smoothing >= 1.0) throw ContractError("cross_entropy: smoothing out of [0,1)");
  const std::size_t m = vx.cols();
  std::size_t valid = 0;
  double total = 0.0;
  std::vector<double> lsm;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    std::int64_t t = targets[i];
    if (t == ignore_id) continue;
    if (t < 0 || static_cast<std::size_t>(t) >= m)
      throw RangeError("cross_entropy: target id " + std::to_string(t) + " out of vocabulary");
    log_softmax_row(&vx.data[i * m], m, lsm);
    double mean_lsm = 0.0;
    for (std::size_t j = 0; j < m; ++j) mean_lsm += lsm[j];
    mean_lsm /= static_cast<double>(m);
    total += -((1.0 - smoothing) * lsm[static_cast<std::size_t>(t)] + smoothing * mean_lsm);
    ++valid;
  }
  if (valid == 0) throw ContractError("cross_entropy: every target position is ignored");
  Node n;
  n.op = Op::CrossEntropyLS;
  n.parents = {logits};
  n.value = Tensor::scalar(total / static_cast<double>(valid));
  n.requires_grad = at(logits).requires_grad;
  n.xarg = smoothing;
  n.iarg = ignore_id;
  n.idx = std::move(targets);
  return push(std::move(n));
}

const Tensor& Graph::grad(NodeId id) const {
  const Node& n = at(id);
  if (n.grad.numel() == 0) throw ContractError("grad() before backward(), or non-grad node");
  return n.grad;
}

void Graph::backward(NodeId loss) {
  if (loss >= nodes_.size()) throw ContractError("backward: invalid loss node");
  if (nodes_[loss].value.numel() != 1)
    throw ContractError("backward: loss must be scalar, got " + nodes_[loss].value.shape_str());
  // Zero every gradient slot so disconnected nodes report zero gradients.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    if (n.requires_grad)
      n.grad = Tensor::zeros(n.value.shape);
    else
      n.grad = Tensor();
  }
  if (!nodes_[loss].requires_grad) return;  // loss depends on no parameter
  nodes_[loss].grad.data[0] = 1.0;
  for (std::size_t i = loss + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    if (!n.requires_grad || n.op == Op::Leaf) continue;
    accumulate(n);
  }
  for (Node& n : nodes_)
    if (n.requires_grad && !n.grad.all_finite())
      throw NumericFault(std::string("non-finite gradient out of ") + op_name(n.op));
}

void Graph::accumulate(const Node& n) {
  const Tensor& g = n.grad;
  auto want = [&](std::size_t slot) { return nodes_[n.parents[slot]].requires_grad; };
  auto pgrad = [&](std::size_t slot) -> Tensor& { return nodes_[n.parents[slot]].grad; };
  auto pval = [&](std::size_t slot) -> const Tensor& { return nodes_[n.parents[slot]].value; };

  switch (n.op) {
    case Op::Leaf:
      break;
    case Op::MatMul: {
      const Tensor& a = pval(0);
      const Tensor& b = pval(1);
      if (want(0)) {
        // dA += dC * B^T
        Tensor& da = pgrad(0);
        for (std::size_t i = 0; i < a.rows(); ++i)
          for (std::size_t j = 0; j < b.cols(); ++j) {
            const double gv = g.data[i * b.cols() + j];
            for (std::size_t kk = 0; kk < a.cols(); ++kk)
              da.data[i * a.cols() + kk] += gv * b.data[kk * b.cols() + j];
          }
      }
      if (want(1)) {
        // dB += A^T * dC
        Tensor& db = pgrad(1);
        for (std::size_t i = 0; i < a.rows(); ++i)
          for (std::size_t kk = 0; kk < a.cols(); ++kk) {
            const double av = a.data[i * a.cols() + kk];
            for (std::size_t j = 0; j < b.cols(); ++j)
              db.data[kk * b.cols() + j] += av * g.data[i * b.cols() + j];
          }
      }
      break;
    }
    case Op::Add: {
      for (std::size_t slot = 0; slot < 2; ++slot)
        if (want(slot)) {
          Tensor& d = pgrad(slot);
          for (std::size_t i = 0; i < g.numel(); ++i) d.data[i] += g.data[i];
        }
      break;
    }
    case Op::AddRow: {
      if (want(0)) {
        Tensor& d = pgrad(0);
        for (std::size_t i = 0; i < g.numel(); ++i) d.data[i] += g.data[i];
      }
      if (want(1)) {
        Tensor& d = pgrad(1);
        const std::size_t m = g.cols();
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < m; ++j) d.data[j] += g.data[i * m + j];
      }
      break;
    }
    case Op::Mul: {
      for (std::size_t slot = 0; slot < 2; ++slot)
        if (want(slot)) {
          Tensor& d = pgrad(slot);
          const Tensor& other = pval(1 - slot);
          for (std::size_t i = 0; i < g.numel(); ++i) d.data[i] += g.data[i] * other.data[i];
        }
      break;
    }
    case Op::MulRow: {
      const Tensor& x = pval(0);
      const Tensor& r = pval(1);
      const std::size_t m = x.cols();
      if (want(0)) {
        Tensor& d = pgrad(0);
        for (std::size_t i = 0; i < x.rows(); ++i)
          for (std::size_t j = 0; j < m; ++j) d.data[i * m + j] += g.data[i * m + j] * r.data[j];
      }
      if (want(1)) {
        Tensor& d = pgrad(1);
        for (std::size_t i = 0; i < x.rows(); ++i)
          for (std::size_t j = 0; j < m; ++j) d.data[j] += g.data[i * m + j] * x.data[i * m + j];
      }
      break;
    }
    case Op::Scale: {
      if (want(0)) {
        Tensor& d = pgrad(0);
        for (std::size_t i = 0; i < g.numel(); ++i) d.data[i] += g.data[i] * n.xarg;
      }
      break;
    }
    case Op::Gelu: {
      if (want(0)) {
        Tensor& d = pgrad(0);
        const Tensor& x = pval(0);
        for (std::size_t i = 0; i < g.numel(); ++i)
          d.data[i] += g.data[i] * kernels::gelu_grad(x.data[i]);
      }
      break;
    }
    case Op::SoftmaxRows: {
      if (want(0)) {
        Tensor& d = pgrad(0);
        const Tensor& y = n.value;
        const std::size_t m = y.cols();
        for (std::size_t i = 0; i < y.rows(); ++i) {
          double dot = 0.0;
          for (std::size_t j = 0; j < m; ++j) dot += g.data[i * m + j] * y.data[i * m + j];
          for (std::size_t j = 0; j < m; ++j)
            d.data[i * m + j] += y.data[i * m + j] * (g.data[i * m + j] - dot);
        }
      }
      break;
    }
    case Op::LayerNormRows: {
      if (want(0)) {
        Tensor& d = pgrad(0);
        const Tensor& x = pval(0);
        const Tensor& y = n.value;
        const std::size_t m = x.cols();
        for (std::size_t i = 0; i < x.rows(); ++i) {
          double mean = 0.0;
          for (std::size_t j = 0; j < m; ++j) mean += x.data[i * m + j];
          mean /= static_cast<double>(m);
          double var = 0.0;
          for (std::size_t j = 0; j < m; ++j) {
            double dv = x.data[i * m + j] - mean;
            var += dv * dv;
          }
          var /= static_cast<double>(m);
          double inv = 1.0 / std::sqrt(var + n.xarg);
          double gmean = 0.0, gymean = 0.0;
          for (std::size_t j = 0; j < m; ++j) {
            gmean += g.data[i * m + j];
            gymean += g.data[i * m + j] * y.data[i * m + j];
          }
          gmean /= static_cast<double>(m);
          gymean /= static_cast<double>(m);
          for (std::size_t j = 0; j < m; ++j)
            d.data[i * m + j] += inv * (g.data[i * m + j] - gmean - y.data[i * m + j] * gymean);
        }
      }
      break;
    }
    case Op::Transpose: {
      if (want(0)) {
        Tensor& d = pgrad(0);
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < g.cols(); ++j) d.data[j * g.rows() + i] += g.data[i * g.cols() + j];
      }
      break;
    }
    case Op::Reshape: {
      if (want(0)) {
        Tensor& d = pgrad(0);
        for (std::size_t i = 0; i < g.numel(); ++i) d.data[i] += g.data[i];
      }
      break;
    }
    case Op::GatherRows: {
      if (want(0)) {
        Tensor& d = pgrad(0);
        const std::size_t m = g.cols();
        for (std::size_t r = 0; r < n.idx.size(); ++r) {
          std::int64_t src = n.idx[r];
          if (src < 0) continue;
          for (std::size_t j = 0; j < m; ++j) d.data[src * m + j] += g.data[r * m + j];
        }
      }
      break;
    }
    case Op::SliceCols: {
      if (want(0)) {
        Tensor& d = pgrad(0);
        const std::size_t c0 = static_cast<std::size_t>(n.idx[0]);
        const std::size_t width = g.cols();
        const std::size_t m = pval(0).cols();
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < width; ++j) d.data[i * m + c0 + j] += g.data[i * width + j];
      }
      break;
    }
    case Op::ConcatCols: {
      std::size_t off = 0;
      const std::size_t cols = g.cols();
      for (std::size_t slot = 0; slot < n.parents.size(); ++slot) {
        const std::size_t w = pval(slot).cols();
        if (want(slot)) {
          Tensor& d = pgrad(slot);
          for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < w; ++j) d.data[i * w + j] += g.data[i * cols + off + j];
        }
        off += w;
      }
      break;
    }
    case Op::SumAll: {
      if (want(0)) {
        Tensor& d = pgrad(0);
        const double gv = g.data[0];
        for (double& v : d.data) v += gv;
      }
      break;
    }
    case Op::MeanAll: {
      if (want(0)) {
        Tensor& d = pgrad(0);
        const double gv = g.data[0] / static_cast<double>(pval(0).numel());
        for (double& v : d.data) v += gv;
      }
      break;
    }
    case Op::CrossEntropyLS: {
      if (want(0)) {
        Tensor& d = pgrad(0);
        const Tensor& x = pval(0);
        const std::size_t m = x.cols();
        std::size_t valid = 0;
        for (std::int64_t t : n.idx)
          if (t != n.iarg) ++valid;
        const double gv = g.data[0] / static_cast<double>(valid);
        const double eps = n.xarg;
        std::vector<double> lsm;
        for (std::size_t i = 0; i < n.idx.size(); ++i) {
          std::int64_t t = n.idx[i];
          if (t == n.iarg) continue;
          log_softmax_row(&x.data[i * m], m, lsm);
          for (std::size_t j = 0; j < m; ++j) {
            double q = eps / static_cast<double>(m) +
                       (static_cast<std::int64_t>(j) == t ? 1.0 - eps : 0.0);
            d.data[i * m + j] += gv * (std::exp(lsm[j]) - q);
          }
        }
      }
      break;
    }
  }
}

}  // namespace uniseq
