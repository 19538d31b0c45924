#pragma once

#include <cstddef>
#include <vector>

namespace dmca {

// Dense row-major matrix of doubles. Word-pair grids over n tokens with K
// classes are stored as (n*n) x K, cell (i,j) living at row i*n + j.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const {
    return data[static_cast<size_t>(r) * cols + c];
  }
  size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }
  bool same_shape(const Tensor& o) const {
    return rows == o.rows && cols == o.cols;
  }
};

// Non-owning view over row-major storage (tensors or parameter-store slices).
struct ConstMat {
  const double* ptr = nullptr;
  int rows = 0;
  int cols = 0;

  ConstMat() = default;
  ConstMat(const double* p, int r, int c) : ptr(p), rows(r), cols(c) {}
  ConstMat(const Tensor& t) : ptr(t.data.data()), rows(t.rows), cols(t.cols) {}

  double at(int r, int c) const {
    return ptr[static_cast<size_t>(r) * cols + c];
  }
};

// Eigen-backed kernels; everything double precision.
Tensor matmul(ConstMat a, ConstMat b);     // a * b
Tensor matmul_nt(ConstMat a, ConstMat b);  // a * b^T
Tensor matmul_tn(ConstMat a, ConstMat b);  // a^T * b
Tensor add(ConstMat a, ConstMat b);
Tensor add_row_broadcast(ConstMat a, ConstMat row);  // a[i,:] + row
Tensor scale(ConstMat a, double c);
Tensor softmax_rows(ConstMat a);  // numerically stable (max subtraction)
void add_inplace(Tensor& dst, ConstMat src, double factor = 1.0);
bool all_finite(ConstMat a);

}  // namespace dmca
