#pragma once

#include <array>
#include <cstdint>

#include "crobust/ops.hpp"
#include "crobust/optimizer.hpp"

namespace crobust {

// Desk-scale topology: three 3x3 convs (stride 1,2,2) + global average pool
// into a feature vector, a single dense classifier head, and a two-layer
// projector head. Small enough to train in CPU minutes while keeping
// iterative attacks meaningful.
struct ArchConfig {
  uint32_t input_size = 32;  // square inputs, 3 channels
  uint32_t class_count = 4;
  std::array<uint32_t, 3> conv_channels{16, 32, 64};
  uint32_t projector_hidden = 64;
  uint32_t projection_dim = 32;

  uint32_t feature_dim() const { return conv_channels[2]; }
  void validate() const;
  bool operator==(const ArchConfig&) const = default;
};

// Encoder, classifier, and projector parameters are disjoint sets so each
// head can be optimized (or frozen) independently.
struct ModelBundle {
  ArchConfig arch;
  uint64_t init_seed = 0;
  ParameterSet encoder;
  ParameterSet classifier;
  ParameterSet projector;
};

// Kaiming-uniform fan-in init (zero biases), all streams derived from seed.
ModelBundle init_model(const ArchConfig& arch, uint64_t seed);

// Parameters bound onto a tape for one forward/backward pass.
struct BoundHead {
  std::vector<std::pair<NodeId, NodeId>> layers;  // (weights, bias) per entry
};

BoundHead bind_head(Tape& tape, const ParameterSet& params, bool with_grad);

// image: [3,H,W] or [batch,3,H,W] with H = W = arch.input_size.
NodeId encode(Tape& tape, const BoundHead& encoder, NodeId image, const ArchConfig& arch);
NodeId classify(Tape& tape, const BoundHead& classifier, NodeId features);
NodeId project(Tape& tape, const BoundHead& projector, NodeId features);

// Copies tape gradients back into the ParameterSet grad slots (assignment,
// not accumulation). Call after tape.backward().
void collect_grads(const Tape& tape, const BoundHead& head, ParameterSet& params);

// Tape-free conveniences for evaluation paths.
Tensor encode(const ModelBundle& bundle, const Tensor& image);
Tensor classify(const ModelBundle& bundle, const Tensor& features);
Tensor project(const ModelBundle& bundle, const Tensor& features);

// Batched logits for [batch,3,H,W] input.
Tensor forward_logits(const ModelBundle& bundle, const Tensor& images);

int argmax(const Tensor& v);

}  // namespace crobust
