#include "dmca/autodiff.hpp"

#include <cmath>
#include <utility>

#include "dmca/error.hpp"

namespace dmca {

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw Error(ErrorKind::invalid_argument, what);
}

}  // namespace

Tensor& Tape::grad_buffer(VarId v) {
  Node& n = *nodes_[v];
  if (n.grad.empty()) n.grad = Tensor(n.val.rows, n.val.cols, 0.0);
  return n.grad;
}

VarId Tape::push(std::unique_ptr<Node> n) {
  nodes_.push_back(std::move(n));
  return static_cast<VarId>(nodes_.size()) - 1;
}

const Tensor& Tape::value(VarId v) const { return nodes_[v]->val; }

// ---------------------------------------------------------------------------
// leaves
// ---------------------------------------------------------------------------

namespace {

struct ParamLeaf final : Tape::Node {
  int entry = 0;
  void backward(Tape& t) override {
    double* g = t.params()->grads(entry);
    for (size_t i = 0; i < grad.size(); ++i) g[i] += grad.data[i];
  }
};

struct ConstLeaf final : Tape::Node {};

}  // namespace

VarId Tape::param(int entry_id) {
  require(params_ != nullptr, "tape has no parameter store");
  if (param_cache_.size() <= static_cast<size_t>(entry_id))
    param_cache_.resize(entry_id + 1, -1);
  if (param_cache_[entry_id] >= 0) return param_cache_[entry_id];
  auto n = std::make_unique<ParamLeaf>();
  n->entry = entry_id;
  ConstMat v = params_->view(entry_id);
  n->val = Tensor(v.rows, v.cols);
  std::copy(v.ptr, v.ptr + n->val.size(), n->val.data.begin());
  VarId id = push(std::move(n));
  param_cache_[entry_id] = id;
  return id;
}

VarId Tape::constant(Tensor t) {
  auto n = std::make_unique<ConstLeaf>();
  n->val = std::move(t);
  return push(std::move(n));
}

// ---------------------------------------------------------------------------
// ops
// ---------------------------------------------------------------------------

namespace {

struct GatherRows final : Tape::Node {
  VarId table;
  std::vector<int> rows;
  void backward(Tape& t) override {
    Tensor& gt = t.grad_buffer(table);
    for (size_t r = 0; r < rows.size(); ++r)
      for (int c = 0; c < grad.cols; ++c)
        gt.at(rows[r], c) += grad.at(static_cast<int>(r), c);
  }
};

struct MatMul final : Tape::Node {
  VarId a, b;
  void backward(Tape& t) override {
    const Tensor& av = t.value(a);
    const Tensor& bv = t.value(b);
    add_inplace(t.grad_buffer(a), matmul_nt(grad, bv));
    add_inplace(t.grad_buffer(b), matmul_tn(av, grad));
  }
};

struct MatMulNT final : Tape::Node {
  VarId a, b;
  void backward(Tape& t) override {
    const Tensor& av = t.value(a);
    const Tensor& bv = t.value(b);
    add_inplace(t.grad_buffer(a), matmul(grad, bv));
    add_inplace(t.grad_buffer(b), matmul_tn(grad, av));
  }
};

struct AddEW final : Tape::Node {
  VarId a, b;
  void backward(Tape& t) override {
    add_inplace(t.grad_buffer(a), grad);
    add_inplace(t.grad_buffer(b), grad);
  }
};

struct AddRow final : Tape::Node {
  VarId a, row;
  void backward(Tape& t) override {
    add_inplace(t.grad_buffer(a), grad);
    Tensor& gr = t.grad_buffer(row);
    for (int i = 0; i < grad.rows; ++i)
      for (int j = 0; j < grad.cols; ++j) gr.at(0, j) += grad.at(i, j);
  }
};

struct Scale final : Tape::Node {
  VarId a;
  double c = 1.0;
  void backward(Tape& t) override {
    add_inplace(t.grad_buffer(a), grad, c);
  }
};

struct SoftmaxRows final : Tape::Node {
  VarId a;
  void backward(Tape& t) override {
    // dX = Y * (dY - rowsum(dY * Y))
    Tensor& ga = t.grad_buffer(a);
    for (int i = 0; i < val.rows; ++i) {
      double dot = 0.0;
      for (int j = 0; j < val.cols; ++j) dot += grad.at(i, j) * val.at(i, j);
      for (int j = 0; j < val.cols; ++j)
        ga.at(i, j) += val.at(i, j) * (grad.at(i, j) - dot);
    }
  }
};

struct PairBilinear final : Tape::Node {
  VarId head, tail, bias;
  int classes = 0, width = 0;
  void backward(Tape& t) override {
    const Tensor& hv = t.value(head);
    const Tensor& tv = t.value(tail);
    Tensor& gh = t.grad_buffer(head);
    Tensor& gt = t.grad_buffer(tail);
    Tensor& gb = t.grad_buffer(bias);
    int n = hv.rows;
    for (int k = 0; k < classes; ++k) {
      int base = k * width;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          double g = grad.at(i * n + j, k);
          if (g == 0.0) continue;
          gb.at(0, k) += g;
          for (int d = 0; d < width; ++d) {
            gh.at(i, base + d) += g * tv.at(j, base + d);
            gt.at(j, base + d) += g * hv.at(i, base + d);
          }
        }
      }
    }
  }
};

struct BlockGather final : Tape::Node {
  VarId grid;
  int n = 0;
  std::vector<int> pos;
  void backward(Tape& t) override {
    Tensor& gg = t.grad_buffer(grid);
    int m = static_cast<int>(pos.size());
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int k = 0; k < grad.cols; ++k)
          gg.at(pos[a] * n + pos[b], k) += grad.at(a * m + b, k);
  }
};

struct BlockScatterAdd final : Tape::Node {
  VarId grid, sub;
  int n = 0;
  std::vector<int> pos;
  double alpha = 1.0;
  void backward(Tape& t) override {
    add_inplace(t.grad_buffer(grid), grad);
    Tensor& gs = t.grad_buffer(sub);
    int m = static_cast<int>(pos.size());
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int k = 0; k < grad.cols; ++k)
          gs.at(a * m + b, k) += alpha * grad.at(pos[a] * n + pos[b], k);
  }
};

struct CrossEntropyOp final : Tape::Node {
  VarId grid;
  std::vector<int> labels;
  std::vector<uint8_t> mask;  // empty = all cells
  double divisor = 1.0;
  Tensor probs;  // softmax rows saved for backward
  void backward(Tape& t) override {
    double g = grad.at(0, 0) / divisor;
    Tensor& gg = t.grad_buffer(grid);
    for (int r = 0; r < probs.rows; ++r) {
      if (!mask.empty() && !mask[r]) continue;
      for (int k = 0; k < probs.cols; ++k)
        gg.at(r, k) += g * (probs.at(r, k) - (k == labels[r] ? 1.0 : 0.0));
    }
  }
};

struct WeightedSum final : Tape::Node {
  std::vector<VarId> terms;
  std::vector<double> weights;
  void backward(Tape& t) override {
    double g = grad.at(0, 0);
    for (size_t i = 0; i < terms.size(); ++i)
      t.grad_buffer(terms[i]).at(0, 0) += g * weights[i];
  }
};

}  // namespace

VarId Tape::gather_rows(VarId table, std::vector<int> rows) {
  auto n = std::make_unique<GatherRows>();
  const Tensor& t = value(table);
  n->table = table;
  n->rows = std::move(rows);
  n->val = Tensor(static_cast<int>(n->rows.size()), t.cols);
  for (size_t r = 0; r < n->rows.size(); ++r) {
    require(n->rows[r] >= 0 && n->rows[r] < t.rows, "gather_rows: bad index");
    for (int c = 0; c < t.cols; ++c)
      n->val.at(static_cast<int>(r), c) = t.at(n->rows[r], c);
  }
  return push(std::move(n));
}

VarId Tape::matmul(VarId a, VarId b) {
  auto n = std::make_unique<MatMul>();
  n->a = a;
  n->b = b;
  n->val = dmca::matmul(value(a), value(b));
  return push(std::move(n));
}

VarId Tape::matmul_nt(VarId a, VarId b) {
  auto n = std::make_unique<MatMulNT>();
  n->a = a;
  n->b = b;
  n->val = dmca::matmul_nt(value(a), value(b));
  return push(std::move(n));
}

VarId Tape::add(VarId a, VarId b) {
  auto n = std::make_unique<AddEW>();
  n->a = a;
  n->b = b;
  n->val = dmca::add(value(a), value(b));
  return push(std::move(n));
}

VarId Tape::add_row(VarId a, VarId row) {
  auto n = std::make_unique<AddRow>();
  n->a = a;
  n->row = row;
  n->val = dmca::add_row_broadcast(value(a), value(row));
  return push(std::move(n));
}

VarId Tape::scale(VarId a, double c) {
  auto n = std::make_unique<Scale>();
  n->a = a;
  n->c = c;
  n->val = dmca::scale(value(a), c);
  return push(std::move(n));
}

VarId Tape::softmax_rows(VarId a) {
  auto n = std::make_unique<SoftmaxRows>();
  n->a = a;
  n->val = dmca::softmax_rows(value(a));
  return push(std::move(n));
}

VarId Tape::pair_bilinear(VarId head, VarId tail, VarId class_bias,
                          int classes, int width) {
  const Tensor& hv = value(head);
  const Tensor& tv = value(tail);
  const Tensor& bv = value(class_bias);
  require(hv.cols == classes * width && tv.cols == classes * width,
          "pair_bilinear: projection width mismatch");
  require(hv.rows == tv.rows, "pair_bilinear: row count mismatch");
  require(bv.rows == 1 && bv.cols == classes, "pair_bilinear: bias shape");
  auto n = std::make_unique<PairBilinear>();
  n->head = head;
  n->tail = tail;
  n->bias = class_bias;
  n->classes = classes;
  n->width = width;
  int rows = hv.rows;
  n->val = Tensor(rows * rows, classes);
  for (int k = 0; k < classes; ++k) {
    int base = k * width;
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < rows; ++j) {
        double s = bv.at(0, k);
        for (int d = 0; d < width; ++d)
          s += hv.at(i, base + d) * tv.at(j, base + d);
        n->val.at(i * rows + j, k) = s;
      }
    }
  }
  return push(std::move(n));
}

VarId Tape::block_gather(VarId grid, int gn, std::vector<int> pos) {
  const Tensor& g = value(grid);
  require(g.rows == gn * gn, "block_gather: grid shape mismatch");
  auto n = std::make_unique<BlockGather>();
  n->grid = grid;
  n->n = gn;
  n->pos = std::move(pos);
  int m = static_cast<int>(n->pos.size());
  n->val = Tensor(m * m, g.cols);
  for (int a = 0; a < m; ++a) {
    require(n->pos[a] >= 0 && n->pos[a] < gn, "block_gather: bad position");
    for (int b = 0; b < m; ++b)
      for (int k = 0; k < g.cols; ++k)
        n->val.at(a * m + b, k) = g.at(n->pos[a] * gn + n->pos[b], k);
  }
  return push(std::move(n));
}

VarId Tape::block_scatter_add(VarId grid, int gn, VarId sub,
                              std::vector<int> pos, double alpha) {
  const Tensor& g = value(grid);
  const Tensor& s = value(sub);
  int m = static_cast<int>(pos.size());
  require(g.rows == gn * gn, "block_scatter_add: grid shape mismatch");
  require(s.rows == m * m && s.cols == g.cols,
          "block_scatter_add: sub shape mismatch");
  auto n = std::make_unique<BlockScatterAdd>();
  n->grid = grid;
  n->sub = sub;
  n->n = gn;
  n->pos = std::move(pos);
  n->alpha = alpha;
  n->val = g;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int k = 0; k < g.cols; ++k)
        n->val.at(n->pos[a] * gn + n->pos[b], k) +=
            alpha * s.at(a * m + b, k);
  return push(std::move(n));
}

VarId Tape::cross_entropy(VarId grid, std::vector<int> labels, double divisor,
                          std::vector<uint8_t> mask) {
  const Tensor& g = value(grid);
  require(static_cast<int>(labels.size()) == g.rows,
          "cross_entropy: label count mismatch");
  require(mask.empty() || mask.size() == labels.size(),
          "cross_entropy: mask size mismatch");
  auto n = std::make_unique<CrossEntropyOp>();
  n->grid = grid;
  n->labels = std::move(labels);
  n->mask = std::move(mask);
  n->divisor = divisor;
  n->probs = dmca::softmax_rows(g);
  double total = 0.0;
  for (int r = 0; r < g.rows; ++r) {
    if (!n->mask.empty() && !n->mask[r]) continue;
    int y = n->labels[r];
    require(y >= 0 && y < g.cols, "cross_entropy: label out of range");
    // stable log softmax via max subtraction
    double mx = g.at(r, 0);
    for (int k = 1; k < g.cols; ++k) mx = std::max(mx, g.at(r, k));
    double lse = 0.0;
    for (int k = 0; k < g.cols; ++k) lse += std::exp(g.at(r, k) - mx);
    total += std::log(lse) + mx - g.at(r, y);
  }
  n->val = Tensor(1, 1, total / divisor);
  return push(std::move(n));
}

VarId Tape::weighted_sum(const std::vector<VarId>& terms,
                         const std::vector<double>& weights) {
  require(terms.size() == weights.size(), "weighted_sum: size mismatch");
  auto n = std::make_unique<WeightedSum>();
  n->terms = terms;
  n->weights = weights;
  double total = 0.0;
  for (size_t i = 0; i < terms.size(); ++i) {
    const Tensor& t = value(terms[i]);
    require(t.rows == 1 && t.cols == 1, "weighted_sum: non-scalar term");
    total += weights[i] * t.at(0, 0);
  }
  n->val = Tensor(1, 1, total);
  return push(std::move(n));
}

void Tape::backward(VarId root) {
  require(root >= 0 && root < static_cast<int>(nodes_.size()),
          "backward: bad root");
  Node& r = *nodes_[root];
  require(r.val.rows == 1 && r.val.cols == 1, "backward: root not scalar");
  grad_buffer(root).at(0, 0) = 1.0;
  for (int i = root; i >= 0; --i) {
    Node& n = *nodes_[i];
    if (n.grad.empty()) continue;  // not on any path to the root
    n.backward(*this);
  }
}

}  // namespace dmca
