#include <doctest.h>

#include <cmath>

#include "crobust/errors.hpp"
#include "crobust/ops.hpp"
#include "crobust/optimizer.hpp"
#include "fd_check.hpp"

using namespace crobust;
using testutil::fd_max_rel_error;
using testutil::probe_loss;
using testutil::random_tensor;

namespace {
constexpr double kFdTol = 1e-3;
}

TEST_CASE("dense identity and zero-weight cases") {
  Tape tape;
  Tensor w({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  NodeId wi = tape.constant(w);
  NodeId bi = tape.constant(Tensor::zeros({3}));
  NodeId x = tape.constant(Tensor({3}, {1, 2, 3}));
  NodeId y = dense_forward(tape, wi, bi, x);
  CHECK(tape.value(y).data == std::vector<float>{1, 2, 3});

  Tape t2;
  NodeId w0 = t2.constant(Tensor::zeros({1, 3}));
  NodeId b5 = t2.constant(Tensor({1}, {5}));
  NodeId x2 = t2.constant(Tensor({3}, {7, -2, 9}));
  CHECK(t2.value(dense_forward(t2, w0, b5, x2)).data[0] == doctest::Approx(5.0f));
}

TEST_CASE("dense matches brute-force dot products") {
  CounterRng rng(42);
  Tensor w = random_tensor({4, 3}, 1);
  Tensor b = random_tensor({4}, 2);
  Tensor x = random_tensor({3}, 3);
  Tape tape;
  NodeId y = dense_forward(tape, tape.constant(w), tape.constant(b), tape.constant(x));
  for (int o = 0; o < 4; ++o) {
    float expect = b.data[o];
    for (int i = 0; i < 3; ++i) expect += w.data[o * 3 + i] * x.data[i];
    CHECK(tape.value(y).data[o] == doctest::Approx(expect).epsilon(1e-6));
  }
}

TEST_CASE("dense shape mismatch names both shapes") {
  Tape tape;
  NodeId w = tape.constant(Tensor::zeros({4, 3}));
  NodeId b = tape.constant(Tensor::zeros({4}));
  NodeId x = tape.constant(Tensor::zeros({5}));
  try {
    dense_forward(tape, w, b, x);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[5]") != std::string::npos);
    CHECK(msg.find("[4,3]") != std::string::npos);
  }
}

TEST_CASE("conv identity 1x1 kernel") {
  Tape tape;
  Tensor k({1, 1, 1, 1}, {1.0f});
  Tensor x = random_tensor({1, 4, 4}, 7);
  NodeId y = conv2d_forward(tape, tape.constant(k), tape.constant(Tensor::zeros({1})),
                            tape.constant(x), 1, 0);
  CHECK(bit_equal(tape.value(y), x));
}

TEST_CASE("conv all-ones 3x3 on constant image gives 9v in the interior") {
  Tape tape;
  Tensor k = Tensor::full({1, 1, 3, 3}, 1.0f);
  Tensor x = Tensor::full({1, 5, 5}, 0.5f);
  NodeId y = conv2d_forward(tape, tape.constant(k), tape.constant(Tensor::zeros({1})),
                            tape.constant(x), 1, 0);
  const Tensor& out = tape.value(y);
  CHECK(out.shape == std::vector<int64_t>{1, 3, 3});
  for (float v : out.data) CHECK(v == doctest::Approx(4.5f));
}

TEST_CASE("conv matches naive nested-loop oracle") {
  Tensor x = random_tensor({2, 5, 5}, 11);
  Tensor k = random_tensor({3, 2, 3, 3}, 12);
  Tensor b = random_tensor({3}, 13);
  for (int stride : {1, 2}) {
    for (int pad : {0, 1}) {
      Tape tape;
      NodeId y = conv2d_forward(tape, tape.constant(k), tape.constant(b), tape.constant(x),
                                stride, pad);
      const int ho = (5 + 2 * pad - 3) / stride + 1;
      const int wo = ho;
      CHECK(tape.value(y).shape == std::vector<int64_t>{3, ho, wo});
      for (int o = 0; o < 3; ++o) {
        for (int oy = 0; oy < ho; ++oy) {
          for (int ox = 0; ox < wo; ++ox) {
            double acc = b.data[o];
            for (int c = 0; c < 2; ++c) {
              for (int ky = 0; ky < 3; ++ky) {
                for (int kx = 0; kx < 3; ++kx) {
                  const int iy = oy * stride - pad + ky;
                  const int ix = ox * stride - pad + kx;
                  if (iy < 0 || iy >= 5 || ix < 0 || ix >= 5) continue;
                  acc += k.data[((o * 2 + c) * 3 + ky) * 3 + kx] * x.data[(c * 5 + iy) * 5 + ix];
                }
              }
            }
            CHECK(tape.value(y).data[(o * ho + oy) * wo + ox] ==
                  doctest::Approx(acc).epsilon(1e-5));
          }
        }
      }
    }
  }
}

TEST_CASE("conv config errors") {
  Tape tape;
  NodeId k = tape.constant(Tensor::zeros({1, 1, 3, 3}));
  NodeId b = tape.constant(Tensor::zeros({1}));
  NodeId x = tape.constant(Tensor::zeros({1, 5, 5}));
  CHECK_THROWS_AS(conv2d_forward(tape, k, b, x, 0, 0), ConfigError);
  NodeId big = tape.constant(Tensor::zeros({1, 1, 9, 9}));
  CHECK_THROWS_AS(conv2d_forward(tape, big, b, x, 1, 1), ConfigError);
}

TEST_CASE("relu basics and gradient mask") {
  Tape tape;
  NodeId x = tape.constant(Tensor({3}, {-1, 0, 2}));
  CHECK(tape.value(relu_forward(tape, x)).data == std::vector<float>{0, 0, 2});

  Tensor neg = Tensor::full({4}, -0.5f);
  neg.requires_grad = true;
  Tape t2;
  NodeId xn = t2.leaf(neg);
  NodeId loss = sum_all(t2, relu_forward(t2, xn));
  t2.backward(loss);
  CHECK(t2.value(loss).data[0] == 0.0f);
  for (float g : t2.grad(xn).data) CHECK(g == 0.0f);
}

TEST_CASE("softmax cross entropy trivial values") {
  Tape tape;
  NodeId uniform = tape.constant(Tensor::zeros({4}));
  CHECK(tape.value(softmax_cross_entropy(tape, uniform, 1)).data[0] ==
        doctest::Approx(std::log(4.0)).epsilon(1e-6));

  Tape t2;
  NodeId saturated = t2.constant(Tensor({3}, {1000.0f, 0.0f, 0.0f}));
  CHECK(t2.value(softmax_cross_entropy(t2, saturated, 0)).data[0] ==
        doctest::Approx(0.0).epsilon(1e-6));

  Tape t3;
  NodeId l = t3.constant(Tensor::zeros({3}));
  CHECK_THROWS_AS(softmax_cross_entropy(t3, l, 3), IndexError);
  CHECK_THROWS_AS(softmax_cross_entropy(t3, l, -1), IndexError);
}

TEST_CASE("softmax cross entropy matches high-precision oracle") {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Tensor logits = random_tensor({6}, 100 + seed, -8.0f, 8.0f);
    const int label = static_cast<int>(seed % 6);
    Tape tape;
    const float got = tape.value(softmax_cross_entropy(tape, tape.constant(logits), label)).data[0];
    long double denom = 0.0L;
    for (float v : logits.data) denom += std::exp(static_cast<long double>(v));
    const long double expect =
        -(static_cast<long double>(logits.data[label]) - std::log(denom));
    CHECK(std::fabs(got - static_cast<double>(expect)) < 1e-5);
  }
}

TEST_CASE("cosine similarity definition and degenerate input") {
  Tape tape;
  Tensor u = random_tensor({8}, 21);
  NodeId ui = tape.constant(u);
  CHECK(tape.value(cosine_similarity(tape, ui, ui)).data[0] == doctest::Approx(1.0).epsilon(1e-6));

  Tape t2;
  NodeId a = t2.constant(Tensor({2}, {1, 0}));
  NodeId b = t2.constant(Tensor({2}, {0, 1}));
  CHECK(t2.value(cosine_similarity(t2, a, b)).data[0] == doctest::Approx(0.0));

  Tape t3;
  NodeId z = t3.constant(Tensor::zeros({3}));
  NodeId v = t3.constant(Tensor({3}, {1, 2, 3}));
  CHECK_THROWS_AS(cosine_similarity(t3, z, v), DegenerateInputError);

  // independent norm/dot oracle
  Tensor p = random_tensor({5}, 22);
  Tensor q = random_tensor({5}, 23);
  double dot = 0, np = 0, nq = 0;
  for (int i = 0; i < 5; ++i) {
    dot += static_cast<double>(p.data[i]) * q.data[i];
    np += static_cast<double>(p.data[i]) * p.data[i];
    nq += static_cast<double>(q.data[i]) * q.data[i];
  }
  Tape t4;
  CHECK(t4.value(cosine_similarity(t4, t4.constant(p), t4.constant(q))).data[0] ==
        doctest::Approx(dot / std::sqrt(np * nq)).epsilon(1e-6));
}

TEST_CASE("backward trivials") {
  Tensor x = random_tensor({2, 3}, 31);
  x.requires_grad = true;

  Tape tape;
  NodeId xi = tape.leaf(x);
  tape.backward(sum_all(tape, xi));
  for (float g : tape.grad(xi).data) CHECK(g == 1.0f);

  Tape t2;
  NodeId x2 = t2.leaf(x);
  NodeId loss = scale(t2, sum_all(t2, relu_forward(t2, x2)), 0.0f);
  t2.backward(loss);
  for (float g : t2.grad(x2).data) CHECK(g == 0.0f);
}

TEST_CASE("backward contract errors") {
  Tape tape;
  Tensor x = random_tensor({3}, 41);
  x.requires_grad = true;
  NodeId xi = tape.leaf(x);
  CHECK_THROWS_AS(tape.backward(xi), ContractError);  // non-scalar

  Tape t2;
  NodeId x2 = t2.leaf(x);
  NodeId loss = sum_all(t2, x2);
  t2.backward(loss);
  CHECK(t2.consumed());
  CHECK_THROWS_AS(t2.backward(loss), ContractError);  // single use
}

TEST_CASE("finite differences: every differentiable op") {
  namespace ref = testutil::refimpl;
  using testutil::dvec;
  using testutil::FdSpec;
  using testutil::probe_weights;
  using testutil::to_d;

  for (uint64_t seed = 1; seed <= 4; ++seed) {
    CAPTURE(seed);

    // dense (batched input)
    CHECK(fd_max_rel_error(
              {.inputs = {random_tensor({3, 4}, seed), random_tensor({3}, seed + 50),
                          random_tensor({2, 4}, seed + 99)},
               .tape_loss =
                   [&](Tape& t, const std::vector<NodeId>& in) {
                     return probe_loss(t, dense_forward(t, in[0], in[1], in[2]), seed);
                   },
               .ref_loss =
                   [&](const std::vector<Tensor>& in) {
                     return ref::weighted_sum(ref::dense(in[0], in[1], in[2]),
                                              probe_weights(6, seed));
                   }}) < kFdTol);

    // conv stride 2 pad 1
    CHECK(fd_max_rel_error(
              {.inputs = {random_tensor({2, 2, 3, 3}, seed), random_tensor({2}, seed + 1),
                          random_tensor({2, 2, 5, 5}, seed + 2)},
               .tape_loss =
                   [&](Tape& t, const std::vector<NodeId>& in) {
                     return probe_loss(t, conv2d_forward(t, in[0], in[1], in[2], 2, 1), seed);
                   },
               .ref_loss =
                   [&](const std::vector<Tensor>& in) {
                     return ref::weighted_sum(ref::conv2d(in[0], in[1], in[2], 2, 1),
                                              probe_weights(2 * 2 * 3 * 3, seed));
                   }}) < kFdTol);

    // relu (offset away from the kink so FD is valid)
    CHECK(fd_max_rel_error(
              {.inputs = {random_tensor({7}, seed, 0.2f, 1.0f)},
               .tape_loss =
                   [&](Tape& t, const std::vector<NodeId>& in) {
                     return probe_loss(t, relu_forward(t, in[0]), seed);
                   },
               .ref_loss =
                   [&](const std::vector<Tensor>& in) {
                     return ref::weighted_sum(ref::relu(to_d(in[0])), probe_weights(7, seed));
                   }}) < kFdTol);

    // global average pool
    CHECK(fd_max_rel_error(
              {.inputs = {random_tensor({2, 3, 4, 4}, seed)},
               .tape_loss =
                   [&](Tape& t, const std::vector<NodeId>& in) {
                     return probe_loss(t, global_avg_pool(t, in[0]), seed);
                   },
               .ref_loss =
                   [&](const std::vector<Tensor>& in) {
                     return ref::weighted_sum(ref::gap(to_d(in[0]), 2, 3, 16),
                                              probe_weights(6, seed));
                   }}) < kFdTol);

    // softmax cross entropy, single and batched mean
    CHECK(fd_max_rel_error(
              {.inputs = {random_tensor({5}, seed, -2.0f, 2.0f)},
               .tape_loss = [&](Tape& t,
                                const std::vector<NodeId>& in) {
                 return softmax_cross_entropy(t, in[0], 2);
               },
               .ref_loss = [&](const std::vector<Tensor>& in) {
                 return ref::cross_entropy(to_d(in[0]), 2);
               }}) < kFdTol);
    CHECK(fd_max_rel_error(
              {.inputs = {random_tensor({3, 4}, seed, -2.0f, 2.0f)},
               .tape_loss =
                   [&](Tape& t, const std::vector<NodeId>& in) {
                     return softmax_cross_entropy_mean(t, in[0], {0, 3, 1});
                   },
               .ref_loss = [&](const std::vector<Tensor>& in) {
                 return ref::cross_entropy_mean(to_d(in[0]), 4, {0, 3, 1});
               }}) < kFdTol);

    // cosine similarity
    CHECK(fd_max_rel_error(
              {.inputs = {random_tensor({6}, seed, 0.3f, 1.0f),
                          random_tensor({6}, seed + 7, 0.3f, 1.0f)},
               .tape_loss = [&](Tape& t,
                                const std::vector<NodeId>& in) {
                 return cosine_similarity(t, in[0], in[1]);
               },
               .ref_loss = [&](const std::vector<Tensor>& in) {
                 return ref::cosine(to_d(in[0]), to_d(in[1]));
               }}) < kFdTol);

    // log-sum-exp over scalars
    CHECK(fd_max_rel_error(
              {.inputs = {random_tensor({1}, seed), random_tensor({1}, seed + 3),
                          random_tensor({1}, seed + 5)},
               .tape_loss = [&](Tape& t,
                                const std::vector<NodeId>& in) {
                 return log_sum_exp(t, {in[0], in[1], in[2]});
               },
               .ref_loss = [&](const std::vector<Tensor>& in) {
                 return ref::log_sum_exp({in[0].data[0], in[1].data[0], in[2].data[0]});
               }}) < kFdTol);

    // add / scale / add_n composition and row
    CHECK(fd_max_rel_error(
              {.inputs = {random_tensor({4}, seed), random_tensor({4}, seed + 13)},
               .tape_loss =
                   [&](Tape& t, const std::vector<NodeId>& in) {
                     NodeId s = add(t, in[0], scale(t, in[1], 1.7f));
                     NodeId n = add_n(t, {s, in[0]});
                     return probe_loss(t, n, seed);
                   },
               .ref_loss =
                   [&](const std::vector<Tensor>& in) {
                     dvec n(4);
                     for (int i = 0; i < 4; ++i) {
                       n[i] = 2.0 * in[0].data[i] + 1.7 * static_cast<double>(in[1].data[i]);
                     }
                     return ref::weighted_sum(n, probe_weights(4, seed));
                   }}) < kFdTol);
    CHECK(fd_max_rel_error(
              {.inputs = {random_tensor({3, 4}, seed)},
               .tape_loss =
                   [&](Tape& t, const std::vector<NodeId>& in) {
                     return probe_loss(t, row(t, in[0], 1), seed);
                   },
               .ref_loss =
                   [&](const std::vector<Tensor>& in) {
                     dvec r(in[0].data.begin() + 4, in[0].data.begin() + 8);
                     return ref::weighted_sum(r, probe_weights(4, seed));
                   }}) < kFdTol);
  }
}

TEST_CASE("backward linearity") {
  Tensor x = random_tensor({2, 6}, 55);
  x.requires_grad = true;
  const float a = 0.7f, b = -1.3f;

  auto grad_of = [&](float ca, float cb) {
    Tape t;
    NodeId xi = t.leaf(x);
    NodeId l1 = softmax_cross_entropy_mean(t, xi, {1, 4});
    NodeId l2 = probe_loss(t, relu_forward(t, xi), 77);
    t.backward(add(t, scale(t, l1, ca), scale(t, l2, cb)));
    return t.grad(xi);
  };

  Tensor combined = grad_of(a, b);
  Tensor g1 = grad_of(1.0f, 0.0f);
  Tensor g2 = grad_of(0.0f, 1.0f);
  for (int64_t i = 0; i < combined.numel(); ++i) {
    CHECK(combined.data[i] == doctest::Approx(a * g1.data[i] + b * g2.data[i]).epsilon(1e-6));
  }
}

TEST_CASE("forward/backward determinism") {
  auto run = [] {
    Tensor x = random_tensor({2, 3, 6, 6}, 123);
    Tensor k = random_tensor({4, 3, 3, 3}, 124);
    Tensor b = random_tensor({4}, 125);
    x.requires_grad = k.requires_grad = b.requires_grad = true;
    Tape t;
    NodeId xi = t.leaf(x), ki = t.leaf(k), bi = t.leaf(b);
    NodeId y = global_avg_pool(t, relu_forward(t, conv2d_forward(t, ki, bi, xi, 2, 1)));
    NodeId loss = probe_loss(t, y, 9);
    t.backward(loss);
    std::vector<Tensor> out{t.value(loss), t.grad(xi), t.grad(ki), t.grad(bi)};
    return out;
  };
  auto r1 = run();
  auto r2 = run();
  for (size_t i = 0; i < r1.size(); ++i) CHECK(bit_equal(r1[i], r2[i]));
}

TEST_CASE("finite outputs on finite inputs") {
  Tensor x = random_tensor({1, 3, 8, 8}, 200, -5.0f, 5.0f);
  Tensor k = random_tensor({4, 3, 3, 3}, 201, -2.0f, 2.0f);
  Tensor b = random_tensor({4}, 202);
  x.requires_grad = k.requires_grad = true;
  Tape t;
  NodeId xi = t.leaf(x), ki = t.leaf(k), bi = t.constant(b);
  NodeId feat = global_avg_pool(t, relu_forward(t, conv2d_forward(t, ki, bi, xi, 1, 1)));
  NodeId loss = probe_loss(t, feat, 11);
  t.backward(loss);
  CHECK(all_finite(t.value(feat)));
  CHECK(all_finite(t.grad(xi)));
  CHECK(all_finite(t.grad(ki)));
}

TEST_CASE("sgd_step trivial and closed-form cases") {
  auto make = [] {
    ParameterSet p;
    p.add("layer", Tensor({2}, {1.0f, -2.0f}), Tensor({1}, {0.5f}));
    ParamEntry* e = p.find("layer");
    e->weights_grad = Tensor({2}, {0.25f, -0.5f});
    e->bias_grad = Tensor({1}, {1.0f});
    return p;
  };

  ParameterSet frozen = make();
  sgd_step(frozen, 0.0, 0.9);
  CHECK(frozen.find("layer")->weights.data == std::vector<float>{1.0f, -2.0f});

  ParameterSet plain = make();
  sgd_step(plain, 0.1, 0.0);
  CHECK(plain.find("layer")->weights.data[0] == doctest::Approx(1.0f - 0.1f * 0.25f));
  CHECK(plain.find("layer")->weights.data[1] == doctest::Approx(-2.0f + 0.1f * 0.5f));

  // two momentum steps against the closed-form velocity recursion
  ParameterSet mom = make();
  sgd_step(mom, 0.1, 0.9);
  // re-use the same gradient for the second step
  mom.find("layer")->weights_grad = Tensor({2}, {0.25f, -0.5f});
  mom.find("layer")->bias_grad = Tensor({1}, {1.0f});
  sgd_step(mom, 0.1, 0.9);
  // v1 = g, p1 = p0 - lr*g; v2 = 0.9g + g, p2 = p1 - lr*v2
  const float expect0 = 1.0f - 0.1f * 0.25f - 0.1f * (0.9f * 0.25f + 0.25f);
  CHECK(mom.find("layer")->weights.data[0] == doctest::Approx(expect0).epsilon(1e-6));

  ParameterSet bad = make();
  CHECK_THROWS_AS(sgd_step(bad, -0.1, 0.0), ConfigError);
  CHECK_THROWS_AS(sgd_step(bad, 0.1, 1.0), ConfigError);
}
