#pragma once

#include <cstdint>

// Small row-major float GEMM kernels sized for desk-scale conv/dense layers.
// Loop orders keep the innermost index contiguous in both operands so the
// compiler can vectorize; no blocking is needed at these sizes.

namespace crobust::detail {

// C[M,N] += A[M,K] * B[K,N]
void gemm_acc(int64_t M, int64_t N, int64_t K, const float* A, const float* B, float* C);

// C[M,K] += sum_n A[m,n] * B[k,n]   (A [M,N], B [K,N])
void gemm_abt_acc(int64_t M, int64_t K, int64_t N, const float* A, const float* B, float* C);

// Same contraction with a 64-bit accumulator target.
void gemm_abt_acc_f64(int64_t M, int64_t K, int64_t N, const float* A, const float* B, double* C);

// C[K,N] += sum_m A[m,k] * B[m,n]   (A [M,K], B [M,N])
void gemm_atb_acc(int64_t K, int64_t N, int64_t M, const float* A, const float* B, float* C);

}  // namespace crobust::detail
