#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uniseq/tensor.hpp"

namespace uniseq {

using NodeId = std::uint32_t;

enum class Op : std::uint8_t {
  Leaf,
  MatMul,
  Add,
  AddRow,
  Mul,
  MulRow,
  Scale,
  Gelu,
  SoftmaxRows,
  LayerNormRows,
  Transpose,
  Reshape,
  GatherRows,
  SliceCols,
  ConcatCols,
  SumAll,
  MeanAll,
  CrossEntropyLS,
};

const char* op_name(Op op);

/// Reverse-mode differentiation record. Nodes are appended in evaluation
/// order, so the tape index is already a topological order; backward()
/// walks it in reverse. Values are immutable once pushed; gradient slots
/// are filled by backward().
class Graph {
 public:
  /// Leaf that does not receive a gradient (inputs, masks, constants).
  NodeId input(Tensor value);
  /// Leaf that participates in backward (parameters).
  NodeId param(Tensor value);

  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  /// Matrix plus a rank-1 row vector broadcast across rows.
  NodeId add_row(NodeId x, NodeId r);
  NodeId mul(NodeId a, NodeId b);
  NodeId mul_row(NodeId x, NodeId r);
  NodeId scale(NodeId a, double factor);
  NodeId gelu(NodeId a);
  NodeId softmax_rows(NodeId x);
  /// Per-row standardization (mean 0, variance 1), no affine part.
  NodeId layer_norm_rows(NodeId x, double eps = 1e-12);
  NodeId transpose(NodeId x);
  NodeId reshape(NodeId x, std::vector<std::size_t> shape);
  /// Rows of x selected by idx; index -1 yields a zero row.
  NodeId gather_rows(NodeId x, std::vector<std::int64_t> idx);
  NodeId slice_cols(NodeId x, std::size_t c0, std::size_t c1);
  NodeId concat_cols(const std::vector<NodeId>& parts);
  NodeId sum_all(NodeId x);
  NodeId mean_all(NodeId x);
  /// Scalar mean over non-ignored rows of label-smoothed cross-entropy.
  NodeId cross_entropy_label_smoothed(NodeId logits, std::vector<std::int64_t> targets,
                                      double smoothing, std::int64_t ignore_id);

  /// Fills gradient slots with d(loss)/d(node) for every grad-requiring
  /// node at or before `loss`; unreachable ones stay zero.
  void backward(NodeId loss);

  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  const Tensor& grad(NodeId id) const;
  bool requires_grad(NodeId id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Op op;
    std::vector<NodeId> parents;
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    double xarg = 0.0;               // Scale factor / LN eps / CE smoothing
    std::int64_t iarg = 0;           // CE ignore id
    std::vector<std::int64_t> idx;   // gather indices / slice bounds / CE targets
  };

  NodeId push(Node node);
  void accumulate(const Node& node);
  const Node& at(NodeId id) const;

  std::vector<Node> nodes_;
};

namespace kernels {
// Plain-tensor forward kernels shared by the graph and by callers that do
// not need gradients. Reduction order is ascending index throughout, so
// results are bitwise reproducible.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor softmax_rows(const Tensor& x);
Tensor layer_norm_rows(const Tensor& x, double eps);
Tensor transpose(const Tensor& x);
double gelu(double x);
double gelu_grad(double x);
}  // namespace kernels

}  // namespace uniseq
