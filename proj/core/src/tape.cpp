#include "crobust/tape.hpp"

namespace crobust {

Tape::Node& Tape::node(NodeId id) {
  if (!id.valid() || static_cast<size_t>(id.index) >= nodes_.size()) {
    throw ContractError("invalid tape node id " + std::to_string(id.index));
  }
  return nodes_[static_cast<size_t>(id.index)];
}

const Tape::Node& Tape::node(NodeId id) const {
  if (!id.valid() || static_cast<size_t>(id.index) >= nodes_.size()) {
    throw ContractError("invalid tape node id " + std::to_string(id.index));
  }
  return nodes_[static_cast<size_t>(id.index)];
}

NodeId Tape::leaf(Tensor value) {
  const bool rg = value.requires_grad;
  return emit(std::move(value), rg, nullptr);
}

NodeId Tape::constant(Tensor value) {
  value.requires_grad = false;
  return emit(std::move(value), false, nullptr);
}

NodeId Tape::emit(Tensor value, bool requires_grad, std::function<void(Tape&)> backward_fn) {
  if (consumed_) throw ContractError("tape already consumed by backward");
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward_fn = std::move(backward_fn);
  nodes_.push_back(std::move(n));
  return NodeId{static_cast<int32_t>(nodes_.size() - 1)};
}

Tensor& Tape::grad_ref(NodeId id) {
  Node& n = node(id);
  if (n.grad.shape != n.value.shape) {
    n.grad = Tensor::zeros(n.value.shape);
  }
  return n.grad;
}

const Tensor& Tape::grad(NodeId id) const {
  const Node& n = node(id);
  if (n.grad.shape == n.value.shape) return n.grad;
  zero_grad_scratch_ = Tensor::zeros(n.value.shape);
  return zero_grad_scratch_;
}

void Tape::backward(NodeId loss) {
  if (consumed_) throw ContractError("tape already consumed by backward");
  Node& root = node(loss);
  if (!root.value.is_scalar()) {
    throw ContractError("backward requires a scalar loss, got shape " +
                        Tensor::shape_str(root.value.shape));
  }
  consumed_ = true;
  if (!root.requires_grad) {
    // No differentiable path; leaf grads stay zero.
    grad_ref(loss)[0] = 1.0f;
    return;
  }
  grad_ref(loss)[0] = 1.0f;
  for (int64_t i = loss.index; i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (n.requires_grad && n.backward_fn && n.grad.shape == n.value.shape) {
      n.backward_fn(*this);
    }
  }
}

}  // namespace crobust
