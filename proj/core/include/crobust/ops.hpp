#pragma once

#include <vector>

#include "crobust/tape.hpp"

namespace crobust {

// Single reduction larger than this accumulates in 64-bit.
inline constexpr int64_t kPromoteReductionThreshold = 4096;

// y = W x + b. weights [out,in], bias [out], x [in] or [batch,in].
NodeId dense_forward(Tape& tape, NodeId weights, NodeId bias, NodeId x);

// Cross-correlation. kernel [oc,ic,kh,kw], bias [oc], x [ic,H,W] or
// [batch,ic,H,W]; zero padding; output spatial = floor((in+2p-k)/stride)+1.
NodeId conv2d_forward(Tape& tape, NodeId kernel, NodeId bias, NodeId x, int stride, int padding);

// Elementwise max(0, x). Subgradient at 0 is 0.
NodeId relu_forward(Tape& tape, NodeId x);

// [batch,C,H,W] -> [batch,C] (or [C,H,W] -> [C]) spatial mean.
NodeId global_avg_pool(Tape& tape, NodeId x);

// -log softmax(logits)[label], log-sum-exp stabilized. logits [K].
NodeId softmax_cross_entropy(Tape& tape, NodeId logits, int64_t label);

// Mean per-sample cross-entropy over a batch. logits [batch,K].
NodeId softmax_cross_entropy_mean(Tape& tape, NodeId logits, const std::vector<int>& labels);

// u.v / (|u||v|), clamped to [-1,1]. Throws DegenerateInputError on a zero vector.
NodeId cosine_similarity(Tape& tape, NodeId u, NodeId v);

// log(sum_i exp(s_i)) over scalar nodes, max-stabilized.
NodeId log_sum_exp(Tape& tape, const std::vector<NodeId>& scalars);

NodeId add(Tape& tape, NodeId a, NodeId b);   // same shape
NodeId scale(Tape& tape, NodeId x, float c);  // c * x
NodeId add_n(Tape& tape, const std::vector<NodeId>& xs);
NodeId sum_all(Tape& tape, NodeId x);  // scalar
// Scalar sum(x * w) with constant weights (FD-harness probe and loss mixing).
NodeId weighted_sum(Tape& tape, NodeId x, Tensor weights);
// View of row r of a [rows,cols] matrix as a [cols] vector node.
NodeId row(Tape& tape, NodeId matrix, int64_t r);

}  // namespace crobust
