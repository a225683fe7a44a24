#include "crobust/optimizer.hpp"

#include <algorithm>

#include "crobust/errors.hpp"

namespace crobust {

ParamEntry& ParameterSet::add(const std::string& name, Tensor weights, Tensor bias) {
  if (find(name) != nullptr) throw ConfigError("duplicate parameter entry: " + name);
  ParamEntry e;
  e.weights_grad = Tensor::zeros(weights.shape);
  e.bias_grad = Tensor::zeros(bias.shape);
  e.weights_vel = Tensor::zeros(weights.shape);
  e.bias_vel = Tensor::zeros(bias.shape);
  e.weights = std::move(weights);
  e.bias = std::move(bias);
  entries.emplace_back(name, std::move(e));
  return entries.back().second;
}

ParamEntry* ParameterSet::find(const std::string& name) {
  for (auto& [n, e] : entries) {
    if (n == name) return &e;
  }
  return nullptr;
}

const ParamEntry* ParameterSet::find(const std::string& name) const {
  for (const auto& [n, e] : entries) {
    if (n == name) return &e;
  }
  return nullptr;
}

void ParameterSet::zero_grads() {
  for (auto& [n, e] : entries) {
    std::fill(e.weights_grad.data.begin(), e.weights_grad.data.end(), 0.0f);
    std::fill(e.bias_grad.data.begin(), e.bias_grad.data.end(), 0.0f);
  }
}

int64_t ParameterSet::parameter_count() const {
  int64_t n = 0;
  for (const auto& [name, e] : entries) n += e.weights.numel() + e.bias.numel();
  return n;
}

namespace {

void momentum_update(Tensor& p, Tensor& v, const Tensor& g, float lr, float mu) {
  if (!p.same_shape(g)) {
    throw DimensionError("gradient shape " + Tensor::shape_str(g.shape) +
                         " does not match parameter " + Tensor::shape_str(p.shape));
  }
  for (size_t i = 0; i < p.data.size(); ++i) {
    v.data[i] = mu * v.data[i] + g.data[i];
    p.data[i] -= lr * v.data[i];
  }
}

}  // namespace

void sgd_step(ParameterSet& params, double lr, double momentum) {
  if (lr < 0.0) throw ConfigError("learning rate must be >= 0, got " + std::to_string(lr));
  if (momentum < 0.0 || momentum >= 1.0) {
    throw ConfigError("momentum must be in [0,1), got " + std::to_string(momentum));
  }
  const float flr = static_cast<float>(lr);
  const float fmu = static_cast<float>(momentum);
  for (auto& [name, e] : params.entries) {
    momentum_update(e.weights, e.weights_vel, e.weights_grad, flr, fmu);
    momentum_update(e.bias, e.bias_vel, e.bias_grad, flr, fmu);
  }
}

bool bit_equal(const ParameterSet& a, const ParameterSet& b) {
  if (a.entries.size() != b.entries.size()) return false;
  for (size_t i = 0; i < a.entries.size(); ++i) {
    if (a.entries[i].first != b.entries[i].first) return false;
    const ParamEntry& x = a.entries[i].second;
    const ParamEntry& y = b.entries[i].second;
    if (!bit_equal(x.weights, y.weights) || !bit_equal(x.bias, y.bias)) return false;
    if (!bit_equal(x.weights_vel, y.weights_vel) || !bit_equal(x.bias_vel, y.bias_vel)) {
      return false;
    }
  }
  return true;
}

}  // namespace crobust
