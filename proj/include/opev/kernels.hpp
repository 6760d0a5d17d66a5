#pragma once

#include "opev/tensor.hpp"

namespace opev::kernels {

// Dense kernels behind the network forward/backward passes. Each has a
// serial reference (used by tests and the benchmark) and an OpenMP variant
// parallelized over output rows. Both walk identical i-k-j loops, so every
// output element is produced by exactly one thread with the same serial
// accumulation order: results are bit-identical for any thread count.

/// C = A * B. A is (m x k), B is (k x n), C is (m x n).
void matmul_serial(const Tensor2& a, const Tensor2& b, Tensor2& c);
void matmul(const Tensor2& a, const Tensor2& b, Tensor2& c);

/// C = A^T (serial transpose; O(rows*cols), never the hot loop).
Tensor2 transpose(const Tensor2& a);

/// C += A * B.
void matmul_acc_serial(const Tensor2& a, const Tensor2& b, Tensor2& c);
void matmul_acc(const Tensor2& a, const Tensor2& b, Tensor2& c);

/// out(r, :) = in(r, :) + bias(0, :) for every row.
void add_bias_serial(const Tensor2& in, const Tensor2& bias, Tensor2& out);
void add_bias(const Tensor2& in, const Tensor2& bias, Tensor2& out);

}  // namespace opev::kernels
