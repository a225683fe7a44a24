#include "crobust/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "crobust/errors.hpp"
#include "gemm.hpp"

namespace crobust {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + " shape mismatch: " + Tensor::shape_str(a.shape) +
                         " vs " + Tensor::shape_str(b.shape));
  }
}

// Id the next emit() will return; lets a backward closure capture its own node.
NodeId next_id(const Tape& tape) { return NodeId{static_cast<int32_t>(tape.node_count())}; }

// col[(c*kh+ky)*kw+kx, oy*wo+ox] = x[c, oy*s-p+ky, ox*s-p+kx], zero outside.
void im2col(const float* x, int64_t ic, int64_t h, int64_t w, int64_t kh, int64_t kw,
            int64_t stride, int64_t pad, int64_t ho, int64_t wo, float* col) {
  for (int64_t c = 0; c < ic; ++c) {
    const float* plane = x + c * h * w;
    for (int64_t ky = 0; ky < kh; ++ky) {
      for (int64_t kx = 0; kx < kw; ++kx) {
        float* dst = col + ((c * kh + ky) * kw + kx) * (ho * wo);
        for (int64_t oy = 0; oy < ho; ++oy) {
          const int64_t iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) {
            std::fill(dst + oy * wo, dst + (oy + 1) * wo, 0.0f);
            continue;
          }
          const float* src_row = plane + iy * w;
          for (int64_t ox = 0; ox < wo; ++ox) {
            const int64_t ix = ox * stride - pad + kx;
            dst[oy * wo + ox] = (ix >= 0 && ix < w) ? src_row[ix] : 0.0f;
          }
        }
      }
    }
  }
}

void col2im_acc(const float* col, int64_t ic, int64_t h, int64_t w, int64_t kh, int64_t kw,
                int64_t stride, int64_t pad, int64_t ho, int64_t wo, float* x_grad) {
  for (int64_t c = 0; c < ic; ++c) {
    float* plane = x_grad + c * h * w;
    for (int64_t ky = 0; ky < kh; ++ky) {
      for (int64_t kx = 0; kx < kw; ++kx) {
        const float* src = col + ((c * kh + ky) * kw + kx) * (ho * wo);
        for (int64_t oy = 0; oy < ho; ++oy) {
          const int64_t iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          float* dst_row = plane + iy * w;
          for (int64_t ox = 0; ox < wo; ++ox) {
            const int64_t ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < w) dst_row[ix] += src[oy * wo + ox];
          }
        }
      }
    }
  }
}

double reduce_sum(const float* p, int64_t n) {
  if (n > kPromoteReductionThreshold) {
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i) acc += p[i];
    return acc;
  }
  float acc = 0.0f;
  for (int64_t i = 0; i < n; ++i) acc += p[i];
  return acc;
}

// Per-sample stabilized log-sum-exp over k classes.
double lse_row(const float* logits, int64_t k) {
  double m = logits[0];
  for (int64_t i = 1; i < k; ++i) m = std::max(m, static_cast<double>(logits[i]));
  double s = 0.0;
  for (int64_t i = 0; i < k; ++i) s += std::exp(static_cast<double>(logits[i]) - m);
  return m + std::log(s);
}

}  // namespace

NodeId dense_forward(Tape& tape, NodeId weights, NodeId bias, NodeId x) {
  const Tensor& wt = tape.value(weights);
  const Tensor& bt = tape.value(bias);
  const Tensor& xt = tape.value(x);
  if (wt.rank() != 2) {
    throw DimensionError("dense weights must be rank 2, got " + Tensor::shape_str(wt.shape));
  }
  const int64_t out_dim = wt.shape[0];
  const int64_t in_dim = wt.shape[1];
  if (bt.rank() != 1 || bt.shape[0] != out_dim) {
    throw DimensionError("dense bias " + Tensor::shape_str(bt.shape) + " does not match weights " +
                         Tensor::shape_str(wt.shape));
  }
  const bool batched = xt.rank() == 2;
  if (!(xt.rank() == 1 || batched) || xt.shape[batched ? 1 : 0] != in_dim) {
    throw DimensionError("dense input " + Tensor::shape_str(xt.shape) +
                         " incompatible with weights " + Tensor::shape_str(wt.shape));
  }
  const int64_t batch = batched ? xt.shape[0] : 1;

  Tensor y(batched ? std::vector<int64_t>{batch, out_dim} : std::vector<int64_t>{out_dim});
  for (int64_t b = 0; b < batch; ++b) {
    for (int64_t o = 0; o < out_dim; ++o) y.data[b * out_dim + o] = bt.data[o];
  }
  detail::gemm_abt_acc(batch, out_dim, in_dim, xt.data.data(), wt.data.data(), y.data.data());

  const bool rg = tape.requires_grad(weights) || tape.requires_grad(bias) || tape.requires_grad(x);
  const NodeId self = next_id(tape);
  std::function<void(Tape&)> bw;
  if (rg) {
    bw = [=](Tape& t) {
      const Tensor& gy = t.grad(self);
      const Tensor& w_val = t.value(weights);
      const Tensor& x_val = t.value(x);
      if (t.requires_grad(x)) {
        detail::gemm_acc(batch, in_dim, out_dim, gy.data.data(), w_val.data.data(),
                         t.grad_ref(x).data.data());
      }
      if (t.requires_grad(weights)) {
        detail::gemm_atb_acc(out_dim, in_dim, batch, gy.data.data(), x_val.data.data(),
                             t.grad_ref(weights).data.data());
      }
      if (t.requires_grad(bias)) {
        Tensor& gb = t.grad_ref(bias);
        for (int64_t b = 0; b < batch; ++b) {
          for (int64_t o = 0; o < out_dim; ++o) gb.data[o] += gy.data[b * out_dim + o];
        }
      }
    };
  }
  return tape.emit(std::move(y), rg, std::move(bw));
}

NodeId conv2d_forward(Tape& tape, NodeId kernel, NodeId bias, NodeId x, int stride, int padding) {
  const Tensor& kt = tape.value(kernel);
  const Tensor& bt = tape.value(bias);
  const Tensor& xt = tape.value(x);
  if (stride < 1) throw ConfigError("conv2d stride must be >= 1, got " + std::to_string(stride));
  if (padding < 0) throw ConfigError("conv2d padding must be >= 0, got " + std::to_string(padding));
  if (kt.rank() != 4) {
    throw DimensionError("conv2d kernel must be rank 4, got " + Tensor::shape_str(kt.shape));
  }
  const bool batched = xt.rank() == 4;
  if (!(xt.rank() == 3 || batched)) {
    throw DimensionError("conv2d input must be rank 3 or 4, got " + Tensor::shape_str(xt.shape));
  }
  const int64_t oc = kt.shape[0], ic = kt.shape[1], kh = kt.shape[2], kw = kt.shape[3];
  const int64_t batch = batched ? xt.shape[0] : 1;
  const int64_t xic = xt.shape[batched ? 1 : 0];
  const int64_t h = xt.shape[batched ? 2 : 1];
  const int64_t w = xt.shape[batched ? 3 : 2];
  if (xic != ic) {
    throw DimensionError("conv2d input channels " + Tensor::shape_str(xt.shape) +
                         " do not match kernel " + Tensor::shape_str(kt.shape));
  }
  if (bt.rank() != 1 || bt.shape[0] != oc) {
    throw DimensionError("conv2d bias " + Tensor::shape_str(bt.shape) + " does not match kernel " +
                         Tensor::shape_str(kt.shape));
  }
  if (kh > h + 2 * padding || kw > w + 2 * padding) {
    throw ConfigError("conv2d kernel " + Tensor::shape_str(kt.shape) +
                      " larger than padded input " + Tensor::shape_str(xt.shape) + " with pad " +
                      std::to_string(padding));
  }
  const int64_t ho = (h + 2 * padding - kh) / stride + 1;
  const int64_t wo = (w + 2 * padding - kw) / stride + 1;
  const int64_t col_rows = ic * kh * kw;
  const int64_t col_cols = ho * wo;

  Tensor y(batched ? std::vector<int64_t>{batch, oc, ho, wo} : std::vector<int64_t>{oc, ho, wo});
  std::vector<float> col(static_cast<size_t>(col_rows * col_cols));
  for (int64_t b = 0; b < batch; ++b) {
    im2col(xt.data.data() + b * ic * h * w, ic, h, w, kh, kw, stride, padding, ho, wo, col.data());
    float* out = y.data.data() + b * oc * col_cols;
    for (int64_t o = 0; o < oc; ++o) {
      std::fill(out + o * col_cols, out + (o + 1) * col_cols, bt.data[o]);
    }
    detail::gemm_acc(oc, col_cols, col_rows, kt.data.data(), col.data(), out);
  }

  const bool rg = tape.requires_grad(kernel) || tape.requires_grad(bias) || tape.requires_grad(x);
  const NodeId self = next_id(tape);
  std::function<void(Tape&)> bw;
  if (rg) {
    const int64_t s = stride, p = padding;
    bw = [=](Tape& t) {
      const Tensor& gy = t.grad(self);
      const Tensor& k_val = t.value(kernel);
      const Tensor& x_val = t.value(x);
      const bool need_x = t.requires_grad(x);
      const bool need_k = t.requires_grad(kernel);
      const bool need_b = t.requires_grad(bias);

      std::vector<float> col_buf(static_cast<size_t>(col_rows * col_cols));
      std::vector<float> dcol(need_x ? static_cast<size_t>(col_rows * col_cols) : 0);
      // Weight/bias sums run over batch*spatial terms, which can exceed the
      // promotion bound, so they accumulate in 64-bit.
      std::vector<double> dk64(need_k ? static_cast<size_t>(oc * col_rows) : 0, 0.0);
      std::vector<double> db64(need_b ? static_cast<size_t>(oc) : 0, 0.0);

      for (int64_t b = 0; b < batch; ++b) {
        const float* gout = gy.data.data() + b * oc * col_cols;
        if (need_x) {
          std::fill(dcol.begin(), dcol.end(), 0.0f);
          detail::gemm_atb_acc(col_rows, col_cols, oc, k_val.data.data(), gout, dcol.data());
          col2im_acc(dcol.data(), ic, h, w, kh, kw, s, p, ho, wo,
                     t.grad_ref(x).data.data() + b * ic * h * w);
        }
        if (need_k) {
          im2col(x_val.data.data() + b * ic * h * w, ic, h, w, kh, kw, s, p, ho, wo,
                 col_buf.data());
          detail::gemm_abt_acc_f64(oc, col_rows, col_cols, gout, col_buf.data(), dk64.data());
        }
        if (need_b) {
          for (int64_t o = 0; o < oc; ++o) {
            float acc = 0.0f;
            const float* g_row = gout + o * col_cols;
            for (int64_t n = 0; n < col_cols; ++n) acc += g_row[n];
            db64[static_cast<size_t>(o)] += static_cast<double>(acc);
          }
        }
      }
      if (need_k) {
        Tensor& gk = t.grad_ref(kernel);
        for (size_t i = 0; i < dk64.size(); ++i) gk.data[i] += static_cast<float>(dk64[i]);
      }
      if (need_b) {
        Tensor& gb = t.grad_ref(bias);
        for (size_t i = 0; i < db64.size(); ++i) gb.data[i] += static_cast<float>(db64[i]);
      }
    };
  }
  return tape.emit(std::move(y), rg, std::move(bw));
}

NodeId relu_forward(Tape& tape, NodeId x) {
  const Tensor& xt = tape.value(x);
  Tensor y(xt.shape);
  for (size_t i = 0; i < xt.data.size(); ++i) y.data[i] = xt.data[i] > 0.0f ? xt.data[i] : 0.0f;

  const bool rg = tape.requires_grad(x);
  const NodeId self = next_id(tape);
  std::function<void(Tape&)> bw;
  if (rg) {
    bw = [=](Tape& t) {
      const Tensor& gy = t.grad(self);
      const Tensor& x_val = t.value(x);
      Tensor& gx = t.grad_ref(x);
      for (size_t i = 0; i < gx.data.size(); ++i) {
        if (x_val.data[i] > 0.0f) gx.data[i] += gy.data[i];
      }
    };
  }
  return tape.emit(std::move(y), rg, std::move(bw));
}

NodeId global_avg_pool(Tape& tape, NodeId x) {
  const Tensor& xt = tape.value(x);
  const bool batched = xt.rank() == 4;
  if (!(xt.rank() == 3 || batched)) {
    throw DimensionError("global_avg_pool input must be rank 3 or 4, got " +
                         Tensor::shape_str(xt.shape));
  }
  const int64_t batch = batched ? xt.shape[0] : 1;
  const int64_t c = xt.shape[batched ? 1 : 0];
  const int64_t hw = xt.shape[batched ? 2 : 1] * xt.shape[batched ? 3 : 2];
  if (hw == 0) throw DimensionError("global_avg_pool on empty spatial extent");

  Tensor y(batched ? std::vector<int64_t>{batch, c} : std::vector<int64_t>{c});
  for (int64_t b = 0; b < batch; ++b) {
    for (int64_t ch = 0; ch < c; ++ch) {
      y.data[b * c + ch] = static_cast<float>(
          reduce_sum(xt.data.data() + (b * c + ch) * hw, hw) / static_cast<double>(hw));
    }
  }

  const bool rg = tape.requires_grad(x);
  const NodeId self = next_id(tape);
  std::function<void(Tape&)> bw;
  if (rg) {
    bw = [=](Tape& t) {
      const Tensor& gy = t.grad(self);
      Tensor& gx = t.grad_ref(x);
      const float inv = 1.0f / static_cast<float>(hw);
      for (int64_t b = 0; b < batch; ++b) {
        for (int64_t ch = 0; ch < c; ++ch) {
          const float g = gy.data[b * c + ch] * inv;
          float* dst = gx.data.data() + (b * c + ch) * hw;
          for (int64_t i = 0; i < hw; ++i) dst[i] += g;
        }
      }
    };
  }
  return tape.emit(std::move(y), rg, std::move(bw));
}

NodeId softmax_cross_entropy(Tape& tape, NodeId logits, int64_t label) {
  const Tensor& lt = tape.value(logits);
  if (lt.rank() != 1) {
    throw DimensionError("softmax_cross_entropy expects rank-1 logits, got " +
                         Tensor::shape_str(lt.shape));
  }
  const int64_t k = lt.shape[0];
  if (label < 0 || label >= k) {
    throw IndexError("label " + std::to_string(label) + " out of range for " + std::to_string(k) +
                     " classes");
  }
  const double lse = lse_row(lt.data.data(), k);
  Tensor y = Tensor::scalar(static_cast<float>(lse - static_cast<double>(lt.data[label])));

  const bool rg = tape.requires_grad(logits);
  const NodeId self = next_id(tape);
  std::function<void(Tape&)> bw;
  if (rg) {
    bw = [=](Tape& t) {
      const float g = t.grad(self).data[0];
      const Tensor& l_val = t.value(logits);
      const double lse_b = lse_row(l_val.data.data(), k);
      Tensor& gl = t.grad_ref(logits);
      for (int64_t i = 0; i < k; ++i) {
        const float p = static_cast<float>(std::exp(static_cast<double>(l_val.data[i]) - lse_b));
        gl.data[i] += g * (p - (i == label ? 1.0f : 0.0f));
      }
    };
  }
  return tape.emit(std::move(y), rg, std::move(bw));
}

NodeId softmax_cross_entropy_mean(Tape& tape, NodeId logits, const std::vector<int>& labels) {
  const Tensor& lt = tape.value(logits);
  if (lt.rank() != 2) {
    throw DimensionError("softmax_cross_entropy_mean expects rank-2 logits, got " +
                         Tensor::shape_str(lt.shape));
  }
  const int64_t batch = lt.shape[0];
  const int64_t k = lt.shape[1];
  if (static_cast<int64_t>(labels.size()) != batch) {
    throw DimensionError("label count " + std::to_string(labels.size()) +
                         " does not match batch " + std::to_string(batch));
  }
  for (int lab : labels) {
    if (lab < 0 || lab >= k) {
      throw IndexError("label " + std::to_string(lab) + " out of range for " + std::to_string(k) +
                       " classes");
    }
  }
  float acc = 0.0f;
  for (int64_t b = 0; b < batch; ++b) {
    const float* row_p = lt.data.data() + b * k;
    acc += static_cast<float>(lse_row(row_p, k) - static_cast<double>(row_p[labels[b]]));
  }
  Tensor y = Tensor::scalar(acc / static_cast<float>(batch));

  const bool rg = tape.requires_grad(logits);
  const NodeId self = next_id(tape);
  std::function<void(Tape&)> bw;
  if (rg) {
    const std::vector<int> labs = labels;
    bw = [=](Tape& t) {
      const float g = t.grad(self).data[0] / static_cast<float>(batch);
      const Tensor& l_val = t.value(logits);
      Tensor& gl = t.grad_ref(logits);
      for (int64_t b = 0; b < batch; ++b) {
        const float* row_p = l_val.data.data() + b * k;
        const double lse_b = lse_row(row_p, k);
        for (int64_t i = 0; i < k; ++i) {
          const float p = static_cast<float>(std::exp(static_cast<double>(row_p[i]) - lse_b));
          gl.data[b * k + i] += g * (p - (i == labs[b] ? 1.0f : 0.0f));
        }
      }
    };
  }
  return tape.emit(std::move(y), rg, std::move(bw));
}

NodeId cosine_similarity(Tape& tape, NodeId u, NodeId v) {
  const Tensor& ut = tape.value(u);
  const Tensor& vt = tape.value(v);
  if (ut.rank() != 1 || vt.rank() != 1 || ut.shape != vt.shape) {
    throw DimensionError("cosine_similarity expects equal rank-1 vectors, got " +
                         Tensor::shape_str(ut.shape) + " and " + Tensor::shape_str(vt.shape));
  }
  const int64_t n = ut.shape[0];
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    dot += static_cast<double>(ut.data[i]) * vt.data[i];
    uu += static_cast<double>(ut.data[i]) * ut.data[i];
    vv += static_cast<double>(vt.data[i]) * vt.data[i];
  }
  if (uu == 0.0 || vv == 0.0) {
    throw DegenerateInputError("cosine_similarity on a zero vector");
  }
  const double nu = std::sqrt(uu), nv = std::sqrt(vv);
  const double s = std::clamp(dot / (nu * nv), -1.0, 1.0);
  Tensor y = Tensor::scalar(static_cast<float>(s));

  const bool rg = tape.requires_grad(u) || tape.requires_grad(v);
  const NodeId self = next_id(tape);
  std::function<void(Tape&)> bw;
  if (rg) {
    bw = [=](Tape& t) {
      const double g = t.grad(self).data[0];
      const Tensor& u_val = t.value(u);
      const Tensor& v_val = t.value(v);
      const double inv_nunv = 1.0 / (nu * nv);
      if (t.requires_grad(u)) {
        Tensor& gu = t.grad_ref(u);
        const double su = s / uu;
        for (int64_t i = 0; i < n; ++i) {
          gu.data[i] += static_cast<float>(g * (v_val.data[i] * inv_nunv - su * u_val.data[i]));
        }
      }
      if (t.requires_grad(v)) {
        Tensor& gv = t.grad_ref(v);
        const double sv = s / vv;
        for (int64_t i = 0; i < n; ++i) {
          gv.data[i] += static_cast<float>(g * (u_val.data[i] * inv_nunv - sv * v_val.data[i]));
        }
      }
    };
  }
  return tape.emit(std::move(y), rg, std::move(bw));
}

NodeId log_sum_exp(Tape& tape, const std::vector<NodeId>& scalars) {
  if (scalars.empty()) throw ContractError("log_sum_exp of zero terms");
  bool rg = false;
  double m = -HUGE_VAL;
  for (NodeId id : scalars) {
    const Tensor& t = tape.value(id);
    if (!t.is_scalar()) {
      throw DimensionError("log_sum_exp expects scalar nodes, got " + Tensor::shape_str(t.shape));
    }
    m = std::max(m, static_cast<double>(t.data[0]));
    rg = rg || tape.requires_grad(id);
  }
  double s = 0.0;
  for (NodeId id : scalars) s += std::exp(static_cast<double>(tape.value(id).data[0]) - m);
  const double out = m + std::log(s);
  Tensor y = Tensor::scalar(static_cast<float>(out));

  const NodeId self = next_id(tape);
  std::function<void(Tape&)> bw;
  if (rg) {
    const std::vector<NodeId> ids = scalars;
    bw = [=](Tape& t) {
      const double g = t.grad(self).data[0];
      for (NodeId id : ids) {
        if (!t.requires_grad(id)) continue;
        const double w = std::exp(static_cast<double>(t.value(id).data[0]) - out);
        t.grad_ref(id).data[0] += static_cast<float>(g * w);
      }
    };
  }
  return tape.emit(std::move(y), rg, std::move(bw));
}

NodeId add(Tape& tape, NodeId a, NodeId b) {
  const Tensor& at = tape.value(a);
  const Tensor& bt = tape.value(b);
  require_same_shape(at, bt, "add");
  Tensor y(at.shape);
  for (size_t i = 0; i < y.data.size(); ++i) y.data[i] = at.data[i] + bt.data[i];

  const bool rg = tape.requires_grad(a) || tape.requires_grad(b);
  const NodeId self = next_id(tape);
  std::function<void(Tape&)> bw;
  if (rg) {
    bw = [=](Tape& t) {
      const Tensor& gy = t.grad(self);
      for (NodeId in : {a, b}) {
        if (!t.requires_grad(in)) continue;
        Tensor& gi = t.grad_ref(in);
        for (size_t i = 0; i < gi.data.size(); ++i) gi.data[i] += gy.data[i];
      }
    };
  }
  return tape.emit(std::move(y), rg, std::move(bw));
}

NodeId scale(Tape& tape, NodeId x, float c) {
  const Tensor& xt = tape.value(x);
  Tensor y(xt.shape);
  for (size_t i = 0; i < y.data.size(); ++i) y.data[i] = c * xt.data[i];

  const bool rg = tape.requires_grad(x);
  const NodeId self = next_id(tape);
  std::function<void(Tape&)> bw;
  if (rg) {
    bw = [=](Tape& t) {
      const Tensor& gy = t.grad(self);
      Tensor& gx = t.grad_ref(x);
      for (size_t i = 0; i < gx.data.size(); ++i) gx.data[i] += c * gy.data[i];
    };
  }
  return tape.emit(std::move(y), rg, std::move(bw));
}

NodeId add_n(Tape& tape, const std::vector<NodeId>& xs) {
  if (xs.empty()) throw ContractError("add_n of zero terms");
  const Tensor& first = tape.value(xs[0]);
  Tensor y(first.shape);
  bool rg = false;
  for (NodeId id : xs) {
    const Tensor& t = tape.value(id);
    require_same_shape(first, t, "add_n");
    for (size_t i = 0; i < y.data.size(); ++i) y.data[i] += t.data[i];
    rg = rg || tape.requires_grad(id);
  }

  const NodeId self = next_id(tape);
  std::function<void(Tape&)> bw;
  if (rg) {
    const std::vector<NodeId> ids = xs;
    bw = [=](Tape& t) {
      const Tensor& gy = t.grad(self);
      for (NodeId in : ids) {
        if (!t.requires_grad(in)) continue;
        Tensor& gi = t.grad_ref(in);
        for (size_t i = 0; i < gi.data.size(); ++i) gi.data[i] += gy.data[i];
      }
    };
  }
  return tape.emit(std::move(y), rg, std::move(bw));
}

NodeId sum_all(Tape& tape, NodeId x) {
  const Tensor& xt = tape.value(x);
  Tensor y = Tensor::scalar(static_cast<float>(reduce_sum(xt.data.data(), xt.numel())));

  const bool rg = tape.requires_grad(x);
  const NodeId self = next_id(tape);
  std::function<void(Tape&)> bw;
  if (rg) {
    bw = [=](Tape& t) {
      const float g = t.grad(self).data[0];
      Tensor& gx = t.grad_ref(x);
      for (size_t i = 0; i < gx.data.size(); ++i) gx.data[i] += g;
    };
  }
  return tape.emit(std::move(y), rg, std::move(bw));
}

NodeId weighted_sum(Tape& tape, NodeId x, Tensor weights) {
  const Tensor& xt = tape.value(x);
  require_same_shape(xt, weights, "weighted_sum");
  const int64_t n = xt.numel();
  float out;
  if (n > kPromoteReductionThreshold) {
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i) acc += static_cast<double>(xt.data[i]) * weights.data[i];
    out = static_cast<float>(acc);
  } else {
    float acc = 0.0f;
    for (int64_t i = 0; i < n; ++i) acc += xt.data[i] * weights.data[i];
    out = acc;
  }
  Tensor y = Tensor::scalar(out);

  const bool rg = tape.requires_grad(x);
  const NodeId self = next_id(tape);
  std::function<void(Tape&)> bw;
  if (rg) {
    auto w = std::make_shared<Tensor>(std::move(weights));
    bw = [=](Tape& t) {
      const float g = t.grad(self).data[0];
      Tensor& gx = t.grad_ref(x);
      for (size_t i = 0; i < gx.data.size(); ++i) gx.data[i] += g * w->data[i];
    };
  }
  return tape.emit(std::move(y), rg, std::move(bw));
}

NodeId row(Tape& tape, NodeId matrix, int64_t r) {
  const Tensor& mt = tape.value(matrix);
  if (mt.rank() != 2) {
    throw DimensionError("row expects a rank-2 tensor, got " + Tensor::shape_str(mt.shape));
  }
  if (r < 0 || r >= mt.shape[0]) {
    throw IndexError("row " + std::to_string(r) + " out of range for " +
                     Tensor::shape_str(mt.shape));
  }
  const int64_t cols = mt.shape[1];
  Tensor y({cols});
  std::copy(mt.data.begin() + r * cols, mt.data.begin() + (r + 1) * cols, y.data.begin());

  const bool rg = tape.requires_grad(matrix);
  const NodeId self = next_id(tape);
  std::function<void(Tape&)> bw;
  if (rg) {
    bw = [=](Tape& t) {
      const Tensor& gy = t.grad(self);
      Tensor& gm = t.grad_ref(matrix);
      for (int64_t i = 0; i < cols; ++i) gm.data[r * cols + i] += gy.data[i];
    };
  }
  return tape.emit(std::move(y), rg, std::move(bw));
}

}  // namespace crobust
