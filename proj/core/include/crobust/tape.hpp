#pragma once

#include <functional>
#include <vector>

#include "crobust/tensor.hpp"

namespace crobust {

class Tape;

struct NodeId {
  int32_t index = -1;
  bool valid() const { return index >= 0; }
};

// Reverse-mode tape. Ops execute eagerly: each emits a node holding the
// computed value and a closure that routes the node's gradient to its
// inputs. backward() replays the closures in reverse emission order, which
// reaches every requires-grad leaf exactly once. Single use: a tape is
// consumed by backward and confined to the thread that built it.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  // Leaf whose gradient participation follows value.requires_grad.
  NodeId leaf(Tensor value);
  // Leaf that never receives a gradient.
  NodeId constant(Tensor value);

  const Tensor& value(NodeId id) const { return node(id).value; }
  bool requires_grad(NodeId id) const { return node(id).requires_grad; }

  // Gradient of the most recent backward() w.r.t. this node. Zero tensor if
  // the node never received a contribution.
  const Tensor& grad(NodeId id) const;

  // Seeds d(loss)/d(loss) = 1 and propagates. loss must be a scalar node.
  // Throws ContractError on a non-scalar or when the tape is already consumed.
  void backward(NodeId loss);

  bool consumed() const { return consumed_; }
  size_t node_count() const { return nodes_.size(); }

  // --- op-author surface ---
  // requires_grad must be the OR over the op's differentiable inputs;
  // backward_fn may be empty when it is false.
  NodeId emit(Tensor value, bool requires_grad, std::function<void(Tape&)> backward_fn);
  // Mutable gradient accumulator, allocated (zeroed) on first access.
  Tensor& grad_ref(NodeId id);

 private:
  struct Node {
    Tensor value;
    Tensor grad;  // empty until touched
    bool requires_grad = false;
    std::function<void(Tape&)> backward_fn;
  };

  Node& node(NodeId id);
  const Node& node(NodeId id) const;

  std::vector<Node> nodes_;
  bool consumed_ = false;
  mutable Tensor zero_grad_scratch_;
};

}  // namespace crobust
