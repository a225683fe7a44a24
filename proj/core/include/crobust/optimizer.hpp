#pragma once

#include <string>
#include <utility>
#include <vector>

#include "crobust/tensor.hpp"

namespace crobust {

// One named layer: weights+bias, their gradient slots, and the momentum
// velocity buffers that persist across steps (and through checkpoints).
struct ParamEntry {
  Tensor weights;
  Tensor bias;
  Tensor weights_grad;
  Tensor bias_grad;
  Tensor weights_vel;
  Tensor bias_vel;
};

// Ordered name -> ParamEntry map. Order is insertion order; it fixes both
// the update sequence and the checkpoint record layout.
struct ParameterSet {
  std::vector<std::pair<std::string, ParamEntry>> entries;

  ParamEntry& add(const std::string& name, Tensor weights, Tensor bias);
  ParamEntry* find(const std::string& name);
  const ParamEntry* find(const std::string& name) const;

  void zero_grads();
  int64_t parameter_count() const;
};

// Classic momentum step: v = mu*v + g; p -= lr*v. Gradients are read from
// the entries' grad slots. lr == 0 is an explicit no-op on the parameters.
void sgd_step(ParameterSet& params, double lr, double momentum);

bool bit_equal(const ParameterSet& a, const ParameterSet& b);

}  // namespace crobust
