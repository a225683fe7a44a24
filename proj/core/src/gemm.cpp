#include "gemm.hpp"

namespace crobust::detail {

void gemm_acc(int64_t M, int64_t N, int64_t K, const float* A, const float* B, float* C) {
  for (int64_t m = 0; m < M; ++m) {
    const float* a_row = A + m * K;
    float* c_row = C + m * N;
    for (int64_t k = 0; k < K; ++k) {
      const float a = a_row[k];
      if (a == 0.0f) continue;
      const float* b_row = B + k * N;
      for (int64_t n = 0; n < N; ++n) {
        c_row[n] += a * b_row[n];
      }
    }
  }
}

void gemm_abt_acc(int64_t M, int64_t K, int64_t N, const float* A, const float* B, float* C) {
  for (int64_t m = 0; m < M; ++m) {
    const float* a_row = A + m * N;
    float* c_row = C + m * K;
    for (int64_t k = 0; k < K; ++k) {
      const float* b_row = B + k * N;
      float acc = 0.0f;
      for (int64_t n = 0; n < N; ++n) {
        acc += a_row[n] * b_row[n];
      }
      c_row[k] += acc;
    }
  }
}

void gemm_abt_acc_f64(int64_t M, int64_t K, int64_t N, const float* A, const float* B, double* C) {
  for (int64_t m = 0; m < M; ++m) {
    const float* a_row = A + m * N;
    double* c_row = C + m * K;
    for (int64_t k = 0; k < K; ++k) {
      const float* b_row = B + k * N;
      float acc = 0.0f;  // per-call partial stays under the promotion bound
      for (int64_t n = 0; n < N; ++n) {
        acc += a_row[n] * b_row[n];
      }
      c_row[k] += static_cast<double>(acc);
    }
  }
}

void gemm_atb_acc(int64_t K, int64_t N, int64_t M, const float* A, const float* B, float* C) {
  for (int64_t m = 0; m < M; ++m) {
    const float* a_row = A + m * K;
    const float* b_row = B + m * N;
    for (int64_t k = 0; k < K; ++k) {
      const float a = a_row[k];
      if (a == 0.0f) continue;
      float* c_row = C + k * N;
      for (int64_t n = 0; n < N; ++n) {
        c_row[n] += a * b_row[n];
      }
    }
  }
}

}  // namespace crobust::detail
