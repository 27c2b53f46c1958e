#pragma once

#include "steerlab/tensor.hpp"

namespace steerlab::ref {

// Serial counterparts of the OpenMP kernels. Summation order per output
// element is identical to the parallel versions, so results must match
// bitwise; tests assert that and the benchmark tool compares throughput.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matmul_tn(const Tensor& a, const Tensor& b);
Tensor softmax(const Tensor& x, int axis = -1);
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  float eps = 1e-5f);
Tensor gelu(const Tensor& x);

}  // namespace steerlab::ref
