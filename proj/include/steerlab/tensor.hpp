#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace steerlab {

// Dense row-major float32 tensor. Shape product always equals data length;
// checked construction additionally rejects non-finite values.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape);
  Tensor(std::vector<int64_t> shape, std::vector<float> data, bool checked = false);

  static Tensor zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int64_t> shape, float value);

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t dim(size_t i) const { return shape_[i]; }
  size_t rank() const { return shape_.size(); }
  int64_t numel() const { return static_cast<int64_t>(data_.size()); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::vector<float>& vec() { return data_; }
  const std::vector<float>& vec() const { return data_; }

  float& at(int64_t i) { return data_[static_cast<size_t>(i)]; }
  float at(int64_t i) const { return data_[static_cast<size_t>(i)]; }
  // 2-D accessors (row-major).
  float& at(int64_t r, int64_t c) { return data_[static_cast<size_t>(r * shape_[1] + c)]; }
  float at(int64_t r, int64_t c) const { return data_[static_cast<size_t>(r * shape_[1] + c)]; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;
  void require_finite(const std::string& what) const;

 private:
  std::vector<int64_t> shape_;
  std::vector<float> data_;
};

struct Parameter {
  Tensor value;
  Tensor grad;  // same shape as value, zero-initialized
  std::string name;

  Parameter() = default;
  Parameter(std::string name, Tensor value);
  void zero_grad();
};

// --- kernels -------------------------------------------------------------
//
// All matmul variants accumulate each output element sequentially over the
// contraction index, so results are independent of thread count.

// c[m,n] = a[m,k] * b[k,n]
Tensor matmul(const Tensor& a, const Tensor& b);
// c[m,n] = a[s,m]^T * b[s,n]
Tensor matmul_tn(const Tensor& a, const Tensor& b);
// c[m,n] = a[m,s] * b[n,s]^T
Tensor matmul_nt(const Tensor& a, const Tensor& b);

Tensor transpose2d(const Tensor& a);

// Max-subtracted softmax along `axis` (negative axis counts from the back).
Tensor softmax(const Tensor& x, int axis = -1);

// Per-row normalization over the last dimension, then affine by gain/bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  float eps = 1e-5f);

// tanh-approximation GELU.
Tensor gelu(const Tensor& x);
float gelu_scalar(float x);
float gelu_grad_scalar(float x);

// Mean negative log-likelihood over unmasked positions. `mask[i]` nonzero
// means position i contributes to the loss. Throws if every position is
// masked out.
float cross_entropy(const Tensor& logits, std::span<const int32_t> targets,
                    std::span<const uint8_t> mask);
// d(loss)/d(logits); same masking convention.
Tensor cross_entropy_grad(const Tensor& logits, std::span<const int32_t> targets,
                          std::span<const uint8_t> mask);

// Elementwise helpers.
Tensor add(const Tensor& a, const Tensor& b);
void add_inplace(Tensor& a, const Tensor& b);
void axpy_inplace(Tensor& a, float alpha, const Tensor& b);  // a += alpha * b
Tensor scale(const Tensor& a, float alpha);

}  // namespace steerlab
