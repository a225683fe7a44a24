#include <benchmark/benchmark.h>

#include "crobust/model.hpp"
#include "crobust/ops.hpp"
#include "crobust/rng.hpp"

using namespace crobust;

namespace {

Tensor random_batch(int64_t n, uint64_t seed) {
  Tensor t({n, 3, 32, 32});
  CounterRng rng(seed);
  for (auto& v : t.data) v = rng.next_float();
  return t;
}

void BM_EncoderForward(benchmark::State& state) {
  const int64_t batch = state.range(0);
  ModelBundle bundle = init_model(ArchConfig{}, 7);
  Tensor images = random_batch(batch, 11);
  for (auto _ : state) {
    Tape tape;
    BoundHead enc = bind_head(tape, bundle.encoder, false);
    NodeId out = encode(tape, enc, tape.constant(images), bundle.arch);
    benchmark::DoNotOptimize(tape.value(out).data.data());
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_EncoderForward)->Arg(1)->Arg(64);

void BM_EncoderForwardBackward(benchmark::State& state) {
  const int64_t batch = state.range(0);
  ModelBundle bundle = init_model(ArchConfig{}, 7);
  Tensor images = random_batch(batch, 11);
  images.requires_grad = true;
  std::vector<int> labels(static_cast<size_t>(batch), 1);
  for (auto _ : state) {
    Tape tape;
    BoundHead enc = bind_head(tape, bundle.encoder, true);
    BoundHead cls = bind_head(tape, bundle.classifier, true);
    NodeId img = tape.leaf(images);
    NodeId logits = classify(tape, cls, encode(tape, enc, img, bundle.arch));
    NodeId loss = softmax_cross_entropy_mean(tape, logits, labels);
    tape.backward(loss);
    benchmark::DoNotOptimize(tape.grad(img).data.data());
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_EncoderForwardBackward)->Arg(1)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
