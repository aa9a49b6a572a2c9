#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "wordrec/errors.hpp"

namespace wordrec {

// Dense row-major tensor of doubles. Rank is small (<= 4 in practice).
struct Tensor {
  std::vector<int> shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    v.assign(static_cast<size_t>(numel_of(shape)), 0.0);
  }
  Tensor(std::initializer_list<int> s) : Tensor(std::vector<int>(s)) {}

  static long numel_of(const std::vector<int>& s) {
    long n = 1;
    for (int d : s) n *= d;
    return n;
  }

  long numel() const { return static_cast<long>(v.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }

  double* data() { return v.data(); }
  const double* data() const { return v.data(); }

  double& at(int i) { return v[static_cast<size_t>(i)]; }
  double at(int i) const { return v[static_cast<size_t>(i)]; }
  double& at(int i, int j) { return v[static_cast<size_t>(i) * shape[1] + j]; }
  double at(int i, int j) const { return v[static_cast<size_t>(i) * shape[1] + j]; }
  double& at(int i, int j, int k) {
    return v[(static_cast<size_t>(i) * shape[1] + j) * shape[2] + k];
  }
  double at(int i, int j, int k) const {
    return v[(static_cast<size_t>(i) * shape[1] + j) * shape[2] + k];
  }

  void fill(double x) { std::fill(v.begin(), v.end(), x); }

  // Reinterprets the buffer with a new shape of equal element count.
  Tensor reshaped(std::vector<int> s) const {
    if (numel_of(s) != numel()) throw ShapeMismatch("reshape: element count mismatch");
    Tensor t;
    t.shape = std::move(s);
    t.v = v;
    return t;
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

inline void check_shape(bool ok, const char* what) {
  if (!ok) throw ShapeMismatch(what);
}

}  // namespace wordrec
