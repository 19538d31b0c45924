#include "dmca/tensor.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "dmca/error.hpp"

namespace dmca {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const EMat>;
using MapM = Eigen::Map<EMat>;

MapC map_of(ConstMat m) { return MapC(m.ptr, m.rows, m.cols); }

void require(bool cond, const char* what) {
  if (!cond) throw Error(ErrorKind::invalid_argument, what);
}

}  // namespace

Tensor matmul(ConstMat a, ConstMat b) {
  require(a.cols == b.rows, "matmul: inner dimensions differ");
  Tensor out(a.rows, b.cols);
  MapM(out.data.data(), out.rows, out.cols).noalias() = map_of(a) * map_of(b);
  return out;
}

Tensor matmul_nt(ConstMat a, ConstMat b) {
  require(a.cols == b.cols, "matmul_nt: inner dimensions differ");
  Tensor out(a.rows, b.rows);
  MapM(out.data.data(), out.rows, out.cols).noalias() =
      map_of(a) * map_of(b).transpose();
  return out;
}

Tensor matmul_tn(ConstMat a, ConstMat b) {
  require(a.rows == b.rows, "matmul_tn: inner dimensions differ");
  Tensor out(a.cols, b.cols);
  MapM(out.data.data(), out.rows, out.cols).noalias() =
      map_of(a).transpose() * map_of(b);
  return out;
}

Tensor add(ConstMat a, ConstMat b) {
  require(a.rows == b.rows && a.cols == b.cols, "add: shape mismatch");
  Tensor out(a.rows, a.cols);
  for (size_t i = 0; i < out.size(); ++i) out.data[i] = a.ptr[i] + b.ptr[i];
  return out;
}

Tensor add_row_broadcast(ConstMat a, ConstMat row) {
  require(row.rows == 1 && row.cols == a.cols,
          "add_row_broadcast: row shape mismatch");
  Tensor out(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) out.at(i, j) = a.at(i, j) + row.ptr[j];
  return out;
}

Tensor scale(ConstMat a, double c) {
  Tensor out(a.rows, a.cols);
  for (size_t i = 0; i < out.size(); ++i) out.data[i] = a.ptr[i] * c;
  return out;
}

Tensor softmax_rows(ConstMat a) {
  Tensor out(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i) {
    double mx = a.at(i, 0);
    for (int j = 1; j < a.cols; ++j) mx = std::max(mx, a.at(i, j));
    double sum = 0.0;
    for (int j = 0; j < a.cols; ++j) {
      double e = std::exp(a.at(i, j) - mx);
      out.at(i, j) = e;
      sum += e;
    }
    double inv = 1.0 / sum;
    for (int j = 0; j < a.cols; ++j) out.at(i, j) *= inv;
  }
  return out;
}

void add_inplace(Tensor& dst, ConstMat src, double factor) {
  require(dst.rows == src.rows && dst.cols == src.cols,
          "add_inplace: shape mismatch");
  for (size_t i = 0; i < dst.size(); ++i) dst.data[i] += factor * src.ptr[i];
}

bool all_finite(ConstMat a) {
  size_t n = static_cast<size_t>(a.rows) * a.cols;
  for (size_t i = 0; i < n; ++i)
    if (!std::isfinite(a.ptr[i])) return false;
  return true;
}

}  // namespace dmca
