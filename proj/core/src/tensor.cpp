#include "crobust/tensor.hpp"

#include <cmath>
#include <cstring>

namespace crobust {

int64_t Tensor::checked_numel(const std::vector<int64_t>& s) {
  int64_t n = 1;
  for (int64_t d : s) {
    if (d < 0) throw DimensionError("negative dimension in shape " + shape_str(s));
    n *= d;
  }
  return n;
}

std::string Tensor::shape_str(const std::vector<int64_t>& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

bool all_finite(const Tensor& t) {
  for (float v : t.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

float max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw DimensionError("max_abs_diff shape mismatch: " + Tensor::shape_str(a.shape) + " vs " +
                         Tensor::shape_str(b.shape));
  }
  float m = 0.0f;
  for (size_t i = 0; i < a.data.size(); ++i) {
    m = std::max(m, std::fabs(a.data[i] - b.data[i]));
  }
  return m;
}

bool bit_equal(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) return false;
  return a.data.empty() ||
         std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0;
}

}  // namespace crobust
