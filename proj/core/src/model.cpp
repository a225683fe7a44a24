#include "crobust/model.hpp"

#include <cmath>

#include "crobust/errors.hpp"
#include "crobust/rng.hpp"

namespace crobust {

void ArchConfig::validate() const {
  if (input_size < 8) {
    throw ConfigError("input size must be >= 8, got " + std::to_string(input_size));
  }
  if (class_count < 2) {
    throw ConfigError("class count must be >= 2, got " + std::to_string(class_count));
  }
  if (projection_dim < 1 || projector_hidden < 1) {
    throw ConfigError("projector dims must be >= 1");
  }
  for (uint32_t c : conv_channels) {
    if (c < 1) throw ConfigError("conv channel counts must be >= 1");
  }
}

namespace {

Tensor kaiming_uniform(std::vector<int64_t> shape, int64_t fan_in, uint64_t key) {
  Tensor t(std::move(shape));
  CounterRng rng(key);
  const float bound = std::sqrt(6.0f / static_cast<float>(fan_in));
  for (auto& v : t.data) v = rng.uniform(-bound, bound);
  return t;
}

void add_conv(ParameterSet& set, const std::string& name, int64_t oc, int64_t ic, int64_t k,
              uint64_t seed) {
  const uint64_t key = CounterRng::derive(seed, fnv1a64(name));
  set.add(name, kaiming_uniform({oc, ic, k, k}, ic * k * k, key), Tensor::zeros({oc}));
}

void add_dense(ParameterSet& set, const std::string& name, int64_t out, int64_t in,
               uint64_t seed) {
  const uint64_t key = CounterRng::derive(seed, fnv1a64(name));
  set.add(name, kaiming_uniform({out, in}, in, key), Tensor::zeros({out}));
}

}  // namespace

ModelBundle init_model(const ArchConfig& arch, uint64_t seed) {
  arch.validate();
  ModelBundle b;
  b.arch = arch;
  b.init_seed = seed;
  const auto& ch = arch.conv_channels;
  add_conv(b.encoder, "conv1", ch[0], 3, 3, seed);
  add_conv(b.encoder, "conv2", ch[1], ch[0], 3, seed);
  add_conv(b.encoder, "conv3", ch[2], ch[1], 3, seed);
  add_dense(b.classifier, "fc", arch.class_count, arch.feature_dim(), seed);
  add_dense(b.projector, "fc1", arch.projector_hidden, arch.feature_dim(), seed);
  add_dense(b.projector, "fc2", arch.projection_dim, arch.projector_hidden, seed);
  return b;
}

BoundHead bind_head(Tape& tape, const ParameterSet& params, bool with_grad) {
  BoundHead head;
  head.layers.reserve(params.entries.size());
  for (const auto& [name, e] : params.entries) {
    Tensor w = e.weights;
    Tensor b = e.bias;
    w.requires_grad = with_grad;
    b.requires_grad = with_grad;
    head.layers.emplace_back(tape.leaf(std::move(w)), tape.leaf(std::move(b)));
  }
  return head;
}

NodeId encode(Tape& tape, const BoundHead& encoder, NodeId image, const ArchConfig& arch) {
  const Tensor& x = tape.value(image);
  const bool batched = x.rank() == 4;
  if (!(x.rank() == 3 || batched)) {
    throw DimensionError("encode input must be rank 3 or 4, got " + Tensor::shape_str(x.shape));
  }
  const int64_t side = static_cast<int64_t>(arch.input_size);
  const int64_t c = x.shape[batched ? 1 : 0];
  const int64_t h = x.shape[batched ? 2 : 1];
  const int64_t w = x.shape[batched ? 3 : 2];
  if (c != 3 || h != side || w != side) {
    throw DimensionError("encode input " + Tensor::shape_str(x.shape) +
                         " does not match architecture input [3," + std::to_string(side) + "," +
                         std::to_string(side) + "]");
  }
  if (encoder.layers.size() != 3) throw ContractError("encoder binding must have 3 conv layers");

  NodeId h1 = relu_forward(tape, conv2d_forward(tape, encoder.layers[0].first,
                                                encoder.layers[0].second, image, 1, 1));
  NodeId h2 = relu_forward(
      tape, conv2d_forward(tape, encoder.layers[1].first, encoder.layers[1].second, h1, 2, 1));
  NodeId h3 = relu_forward(
      tape, conv2d_forward(tape, encoder.layers[2].first, encoder.layers[2].second, h2, 2, 1));
  return global_avg_pool(tape, h3);
}

NodeId classify(Tape& tape, const BoundHead& classifier, NodeId features) {
  if (classifier.layers.size() != 1) throw ContractError("classifier binding must have 1 layer");
  return dense_forward(tape, classifier.layers[0].first, classifier.layers[0].second, features);
}

NodeId project(Tape& tape, const BoundHead& projector, NodeId features) {
  if (projector.layers.size() != 2) throw ContractError("projector binding must have 2 layers");
  NodeId h1 = relu_forward(
      tape, dense_forward(tape, projector.layers[0].first, projector.layers[0].second, features));
  return dense_forward(tape, projector.layers[1].first, projector.layers[1].second, h1);
}

void collect_grads(const Tape& tape, const BoundHead& head, ParameterSet& params) {
  if (head.layers.size() != params.entries.size()) {
    throw ContractError("bound head does not match parameter set");
  }
  for (size_t i = 0; i < head.layers.size(); ++i) {
    params.entries[i].second.weights_grad = tape.grad(head.layers[i].first);
    params.entries[i].second.bias_grad = tape.grad(head.layers[i].second);
  }
}

Tensor encode(const ModelBundle& bundle, const Tensor& image) {
  Tape tape;
  BoundHead enc = bind_head(tape, bundle.encoder, false);
  NodeId out = encode(tape, enc, tape.constant(image), bundle.arch);
  return tape.value(out);
}

Tensor classify(const ModelBundle& bundle, const Tensor& features) {
  Tape tape;
  BoundHead cls = bind_head(tape, bundle.classifier, false);
  NodeId out = classify(tape, cls, tape.constant(features));
  return tape.value(out);
}

Tensor project(const ModelBundle& bundle, const Tensor& features) {
  Tape tape;
  BoundHead proj = bind_head(tape, bundle.projector, false);
  NodeId out = project(tape, proj, tape.constant(features));
  return tape.value(out);
}

Tensor forward_logits(const ModelBundle& bundle, const Tensor& images) {
  Tape tape;
  BoundHead enc = bind_head(tape, bundle.encoder, false);
  BoundHead cls = bind_head(tape, bundle.classifier, false);
  NodeId feats = encode(tape, enc, tape.constant(images), bundle.arch);
  NodeId logits = classify(tape, cls, feats);
  return tape.value(logits);
}

int argmax(const Tensor& v) {
  if (v.numel() == 0) throw ContractError("argmax of empty tensor");
  int best = 0;
  for (int64_t i = 1; i < v.numel(); ++i) {
    if (v.data[static_cast<size_t>(i)] > v.data[static_cast<size_t>(best)]) {
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace crobust
