#include "dmca/params.hpp"

#include <algorithm>

#include "dmca/error.hpp"

namespace dmca {

int ParamStore::add(const std::string& name, int rows, int cols) {
  if (find(name) >= 0)
    throw Error(ErrorKind::invalid_argument,
                "duplicate parameter name " + name);
  Entry e;
  e.name = name;
  e.offset = value_.size();
  e.rows = rows;
  e.cols = cols;
  value_.resize(value_.size() + e.count(), 0.0);
  grad_.resize(value_.size(), 0.0);
  entries_.push_back(e);
  return static_cast<int>(entries_.size()) - 1;
}

int ParamStore::find(const std::string& name) const {
  for (size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].name == name) return static_cast<int>(i);
  return -1;
}

ConstMat ParamStore::view(int id) const {
  const Entry& e = entries_[id];
  return ConstMat(value_.data() + e.offset, e.rows, e.cols);
}

double* ParamStore::values(int id) { return value_.data() + entries_[id].offset; }
double* ParamStore::grads(int id) { return grad_.data() + entries_[id].offset; }

void ParamStore::zero_grad() {
  std::fill(grad_.begin(), grad_.end(), 0.0);
}

}  // namespace dmca
