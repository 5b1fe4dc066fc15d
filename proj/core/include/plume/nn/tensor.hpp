#pragma once

#include "plume/common.hpp"

#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

namespace plume::nn {

inline std::size_t shape_size(const std::vector<int>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t a, int d) { return a * static_cast<std::size_t>(d); });
}

std::string shape_string(const std::vector<int>& shape);

/// Dense row-major array.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)), data(shape_size(shape), T{0}) {}
  Tensor(std::vector<int> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != shape_size(shape)) throw ShapeError("tensor data does not match shape " + shape_string(shape));
  }

  std::size_t size() const { return data.size(); }
  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }
  bool operator==(const Tensor&) const = default;
};

}  // namespace plume::nn
