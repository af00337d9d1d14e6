// tensor.hpp - minimal dense row-major tensor. Shape conventions:
// image batches are [N,C,H,W], feature matrices are [N,D].
#pragma once

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace viprom::core {

template <class T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)), v(static_cast<std::size_t>(numel(shape)), T(0)) {}
  Tensor(std::initializer_list<int> s) : Tensor(std::vector<int>(s)) {}

  static std::int64_t numel(const std::vector<int>& s) {
    std::int64_t n = 1;
    for (int d : s) {
      if (d < 0) throw std::invalid_argument("tensor: negative dim");
      n *= d;
    }
    return s.empty() ? 0 : n;
  }

  std::int64_t size() const { return static_cast<std::int64_t>(v.size()); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
  int rank() const { return static_cast<int>(shape.size()); }
  T* data() { return v.data(); }
  const T* data() const { return v.data(); }

  T& at(std::int64_t i) { return v[static_cast<std::size_t>(i)]; }
  const T& at(std::int64_t i) const { return v[static_cast<std::size_t>(i)]; }

  // [N,D] access
  T& at2(int n, int d) { return v[static_cast<std::size_t>(n) * dim(1) + d]; }
  const T& at2(int n, int d) const { return v[static_cast<std::size_t>(n) * dim(1) + d]; }

  std::string shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(shape[i]);
    }
    return s + "]";
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace viprom::core
