#include "steerlab/reference.hpp"

#include <cmath>
#include <stdexcept>

namespace steerlab::ref {

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw std::invalid_argument("ref::matmul: bad shapes");
  }
  const int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor c({m, n});
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      float acc = 0.0f;
      for (int64_t kk = 0; kk < k; ++kk) {
        acc += a.at(i, kk) * b.at(kk, j);
      }
      c.at(i, j) = acc;
    }
  }
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(0) != b.dim(0)) {
    throw std::invalid_argument("ref::matmul_tn: bad shapes");
  }
  const int64_t s = a.dim(0), m = a.dim(1), n = b.dim(1);
  Tensor c({m, n});
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      float acc = 0.0f;
      for (int64_t ss = 0; ss < s; ++ss) {
        acc += a.at(ss, i) * b.at(ss, j);
      }
      c.at(i, j) = acc;
    }
  }
  return c;
}

Tensor softmax(const Tensor& x, int axis) {
  const int rank = static_cast<int>(x.rank());
  if (axis < 0) axis += rank;
  const int64_t n = x.dim(static_cast<size_t>(axis));
  int64_t inner = 1;
  for (int i = axis + 1; i < rank; ++i) inner *= x.dim(static_cast<size_t>(i));
  const int64_t outer = x.numel() / (n * inner);
  Tensor y(x.shape());
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t in = 0; in < inner; ++in) {
      const float* src = x.data() + o * n * inner + in;
      float* dst = y.data() + o * n * inner + in;
      float mx = src[0];
      for (int64_t i = 1; i < n; ++i) mx = std::max(mx, src[i * inner]);
      float sum = 0.0f;
      for (int64_t i = 0; i < n; ++i) {
        const float e = std::exp(src[i * inner] - mx);
        dst[i * inner] = e;
        sum += e;
      }
      const float inv = 1.0f / sum;
      for (int64_t i = 0; i < n; ++i) dst[i * inner] *= inv;
    }
  }
  return y;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, float eps) {
  const int64_t d = x.dim(x.rank() - 1);
  const int64_t rows = x.numel() / d;
  Tensor y(x.shape());
  for (int64_t r = 0; r < rows; ++r) {
    const float* row = x.data() + r * d;
    float* out = y.data() + r * d;
    float mean = 0.0f;
    for (int64_t i = 0; i < d; ++i) mean += row[i];
    mean /= static_cast<float>(d);
    float var = 0.0f;
    for (int64_t i = 0; i < d; ++i) {
      const float c = row[i] - mean;
      var += c * c;
    }
    var /= static_cast<float>(d);
    const float inv = 1.0f / std::sqrt(var + eps);
    for (int64_t i = 0; i < d; ++i) {
      out[i] = (row[i] - mean) * inv * gain.at(i) + bias.at(i);
    }
  }
  return y;
}

Tensor gelu(const Tensor& x) {
  Tensor y(x.shape());
  for (int64_t i = 0; i < x.numel(); ++i) y.at(i) = gelu_scalar(x.at(i));
  return y;
}

}  // namespace steerlab::ref
