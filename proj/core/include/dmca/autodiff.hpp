#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dmca/params.hpp"
#include "dmca/tensor.hpp"

namespace dmca {

using VarId = int;

// Reverse-mode tape over Tensor values. Ops cover exactly what the model
// graph needs: embedding gathers, affine maps, softmax, the per-class
// bilinear pair scorer, block gather/scatter for grid aggregation, and
// fused softmax cross-entropy. Parameter leaves accumulate into the bound
// ParamStore's gradient buffer on backward().
class Tape {
 public:
  explicit Tape(ParamStore* params = nullptr) : params_(params) {}

  VarId param(int entry_id);
  VarId constant(Tensor t);

  VarId gather_rows(VarId table, std::vector<int> rows);
  VarId matmul(VarId a, VarId b);
  VarId matmul_nt(VarId a, VarId b);  // a * b^T
  VarId add(VarId a, VarId b);
  VarId add_row(VarId a, VarId row);  // broadcast a 1 x m row over rows of a
  VarId scale(VarId a, double c);
  VarId softmax_rows(VarId a);

  // out[i*n+j, k] = dot(head[i, k*w : (k+1)*w], tail[j, k*w : (k+1)*w]) + bias[k]
  VarId pair_bilinear(VarId head, VarId tail, VarId class_bias, int classes,
                      int width);

  // grid is (n*n) x K; pos maps sub-grid coordinates to grid coordinates
  VarId block_gather(VarId grid, int n, std::vector<int> pos);
  VarId block_scatter_add(VarId grid, int n, VarId sub, std::vector<int> pos,
                          double alpha);

  // sum over unmasked cells of -log softmax(row)[label], divided by divisor
  VarId cross_entropy(VarId grid, std::vector<int> labels, double divisor,
                      std::vector<uint8_t> mask = {});

  VarId weighted_sum(const std::vector<VarId>& terms,
                     const std::vector<double>& weights);

  const Tensor& value(VarId v) const;
  void backward(VarId root);  // root must be a 1x1 scalar
  size_t node_count() const { return nodes_.size(); }

  // internal, used by op implementations
  struct Node;
  Tensor& grad_buffer(VarId v);
  ParamStore* params() { return params_; }
  Node& node(VarId v) { return *nodes_[v]; }

 private:
  VarId push(std::unique_ptr<Node> n);
  ParamStore* params_ = nullptr;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::vector<VarId> param_cache_;  // one leaf per store entry
};

struct Tape::Node {
  Tensor val;
  Tensor grad;  // empty until touched by backward
  virtual ~Node() = default;
  virtual void backward(Tape&) {}
};

}  // namespace dmca
