#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crobust/errors.hpp"

namespace crobust {

// Dense row-major float32 tensor. Plain value type; gradients live on the
// tape (or in ParameterSet slots), not here.
struct Tensor {
  std::vector<int64_t> shape;
  std::vector<float> data;
  bool requires_grad = false;

  Tensor() = default;
  explicit Tensor(std::vector<int64_t> s) : shape(std::move(s)), data(checked_numel(shape), 0.0f) {}
  Tensor(std::vector<int64_t> s, std::vector<float> d) : shape(std::move(s)), data(std::move(d)) {
    if (static_cast<int64_t>(data.size()) != checked_numel(shape)) {
      throw DimensionError("tensor data length " + std::to_string(data.size()) +
                           " does not match shape " + shape_str(shape));
    }
  }

  static Tensor zeros(std::vector<int64_t> s) { return Tensor(std::move(s)); }
  static Tensor full(std::vector<int64_t> s, float v) {
    Tensor t(std::move(s));
    for (auto& x : t.data) x = v;
    return t;
  }
  static Tensor scalar(float v) { return Tensor({1}, {v}); }

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  int64_t rank() const { return static_cast<int64_t>(shape.size()); }
  bool is_scalar() const { return numel() == 1; }

  float& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
  float operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  static int64_t checked_numel(const std::vector<int64_t>& s);
  static std::string shape_str(const std::vector<int64_t>& s);
};

// True when every element is finite (no NaN/Inf).
bool all_finite(const Tensor& t);

// Max over elements of |a - b|. Shapes must match.
float max_abs_diff(const Tensor& a, const Tensor& b);

bool bit_equal(const Tensor& a, const Tensor& b);

}  // namespace crobust
