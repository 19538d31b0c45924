#pragma once

#include <string>
#include <vector>

#include "dmca/tensor.hpp"

namespace dmca {

// Flat parameter/gradient storage. Every tensor is a named slice so the
// optimizer and the finite-difference checker can treat the model as one
// vector of scalars.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    size_t offset = 0;
    int rows = 0;
    int cols = 0;
    size_t count() const { return static_cast<size_t>(rows) * cols; }
  };

  int add(const std::string& name, int rows, int cols);
  int find(const std::string& name) const;  // -1 when absent

  ConstMat view(int id) const;
  double* values(int id);
  double* grads(int id);
  const Entry& entry(int id) const { return entries_[id]; }
  int entry_count() const { return static_cast<int>(entries_.size()); }

  size_t size() const { return value_.size(); }
  std::vector<double>& value() { return value_; }
  const std::vector<double>& value() const { return value_; }
  std::vector<double>& grad() { return grad_; }
  const std::vector<double>& grad() const { return grad_; }
  void zero_grad();

 private:
  std::vector<Entry> entries_;
  std::vector<double> value_;
  std::vector<double> grad_;
};

}  // namespace dmca
