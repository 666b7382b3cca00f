#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mvap::nn {

// (batch, channels, height, width). Flattened feature vectors keep h = w = 1.
struct Shape {
  int n = 0, c = 0, h = 0, w = 0;

  std::size_t numel() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  bool operator==(const Shape&) const = default;
  std::string str() const {
    return std::to_string(n) + "x" + std::to_string(c) + "x" +
           std::to_string(h) + "x" + std::to_string(w);
  }
};

// Dense row-major tensor. float for training/inference, double for the
// finite-difference gradient checks.
template <typename T>
struct Tensor {
  Shape shape{};
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(Shape s) : shape(s), data(s.numel(), T{0}) {}

  T& at(int n, int c, int h, int w) {
    return data[((static_cast<std::size_t>(n) * shape.c + c) * shape.h + h) *
                    shape.w + w];
  }
  const T& at(int n, int c, int h, int w) const {
    return const_cast<Tensor*>(this)->at(n, c, h, w);
  }

  // Pointer to the (n, c) spatial plane.
  T* plane(int n, int c) {
    return data.data() +
           (static_cast<std::size_t>(n) * shape.c + c) *
               (static_cast<std::size_t>(shape.h) * shape.w);
  }
  const T* plane(int n, int c) const {
    return const_cast<Tensor*>(this)->plane(n, c);
  }

  void zero() { std::fill(data.begin(), data.end(), T{0}); }
};

}  // namespace mvap::nn
