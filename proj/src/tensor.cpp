#include "steerlab/tensor.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace steerlab {

namespace {

int64_t shape_numel(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d < 0) throw std::invalid_argument("tensor: negative dimension");
    n *= d;
  }
  return n;
}

void require_2d(const Tensor& t, const char* name) {
  if (t.rank() != 2) {
    throw std::invalid_argument(std::string("matmul: ") + name + " must be 2-D");
  }
}

// Work threshold below which the OpenMP parallel-for is not worth spawning.
constexpr int64_t kParallelCutoff = 1 << 15;

}  // namespace

Tensor::Tensor(std::vector<int64_t> shape)
    : shape_(std::move(shape)), data_(static_cast<size_t>(shape_numel(shape_)), 0.0f) {}

Tensor::Tensor(std::vector<int64_t> shape, std::vector<float> data, bool checked)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_numel(shape_) != static_cast<int64_t>(data_.size())) {
    throw std::invalid_argument("tensor: shape does not match data length");
  }
  if (checked && !all_finite()) {
    throw std::invalid_argument("tensor: non-finite value rejected");
  }
}

Tensor Tensor::full(std::vector<int64_t> shape, float value) {
  Tensor t(std::move(shape));
  std::fill(t.data_.begin(), t.data_.end(), value);
  return t;
}

bool Tensor::all_finite() const {
  for (float v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::require_finite(const std::string& what) const {
  if (!all_finite()) {
    throw std::runtime_error("non-finite value in " + what);
  }
}

Parameter::Parameter(std::string name_, Tensor value_)
    : value(std::move(value_)), grad(value.shape()), name(std::move(name_)) {}

void Parameter::zero_grad() {
  std::fill(grad.vec().begin(), grad.vec().end(), 0.0f);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_2d(a, "a");
  require_2d(b, "b");
  const int64_t m = a.dim(0), k = a.dim(1), k2 = b.dim(0), n = b.dim(1);
  if (k != k2) throw std::invalid_argument("matmul: inner dimensions mismatch");
  Tensor c({m, n});
  const float* ap = a.data();
  const float* bp = b.data();
  float* cp = c.data();
#pragma omp parallel for schedule(static) if (m * n * k > kParallelCutoff)
  for (int64_t i = 0; i < m; ++i) {
    float* crow = cp + i * n;
    const float* arow = ap + i * k;
    for (int64_t kk = 0; kk < k; ++kk) {
      const float av = arow[kk];
      const float* brow = bp + kk * n;
      for (int64_t j = 0; j < n; ++j) {
        crow[j] += av * brow[j];
      }
    }
  }
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  require_2d(a, "a");
  require_2d(b, "b");
  const int64_t s = a.dim(0), m = a.dim(1), s2 = b.dim(0), n = b.dim(1);
  if (s != s2) throw std::invalid_argument("matmul_tn: leading dimensions mismatch");
  Tensor c({m, n});
  const float* ap = a.data();
  const float* bp = b.data();
  float* cp = c.data();
#pragma omp parallel for schedule(static) if (m * n * s > kParallelCutoff)
  for (int64_t i = 0; i < m; ++i) {
    float* crow = cp + i * n;
    for (int64_t ss = 0; ss < s; ++ss) {
      const float av = ap[ss * m + i];
      const float* brow = bp + ss * n;
      for (int64_t j = 0; j < n; ++j) {
        crow[j] += av * brow[j];
      }
    }
  }
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_2d(a, "a");
  require_2d(b, "b");
  if (a.dim(1) != b.dim(1)) {
    throw std::invalid_argument("matmul_nt: trailing dimensions mismatch");
  }
  // b is small in every call site; transposing it keeps the hot loop
  // j-contiguous while each output element still sums over s in order.
  return matmul(a, transpose2d(b));
}

Tensor transpose2d(const Tensor& a) {
  require_2d(a, "a");
  const int64_t m = a.dim(0), n = a.dim(1);
  Tensor t({n, m});
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      t.at(j, i) = a.at(i, j);
    }
  }
  return t;
}

Tensor softmax(const Tensor& x, int axis) {
  const int rank = static_cast<int>(x.rank());
  if (rank == 0) throw std::invalid_argument("softmax: scalar input");
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) throw std::invalid_argument("softmax: axis out of range");
  const int64_t n = x.dim(static_cast<size_t>(axis));
  if (n < 1) throw std::invalid_argument("softmax: empty axis");

  int64_t inner = 1;
  for (int i = axis + 1; i < rank; ++i) inner *= x.dim(static_cast<size_t>(i));
  int64_t outer = x.numel() / (n * inner);

  Tensor y(x.shape());
  const float* xp = x.data();
  float* yp = y.data();
#pragma omp parallel for schedule(static) if (outer * inner * n > kParallelCutoff)
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t in = 0; in < inner; ++in) {
      const float* src = xp + o * n * inner + in;
      float* dst = yp + o * n * inner + in;
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
  if (x.rank() < 1) throw std::invalid_argument("layer_norm: rank-0 input");
  const int64_t d = x.dim(x.rank() - 1);
  if (gain.numel() != d || bias.numel() != d) {
    throw std::invalid_argument("layer_norm: gain/bias length mismatch");
  }
  if (eps <= 0.0f) throw std::invalid_argument("layer_norm: eps must be positive");
  const int64_t rows = x.numel() / d;
  Tensor y(x.shape());
  const float* xp = x.data();
  const float* gp = gain.data();
  const float* bp = bias.data();
  float* yp = y.data();
#pragma omp parallel for schedule(static) if (rows * d > kParallelCutoff)
  for (int64_t r = 0; r < rows; ++r) {
    const float* row = xp + r * d;
    float* out = yp + r * d;
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
      out[i] = (row[i] - mean) * inv * gp[i] + bp[i];
    }
  }
  return y;
}

float gelu_scalar(float x) {
  constexpr float kC = 0.7978845608028654f;  // sqrt(2/pi)
  const float u = kC * (x + 0.044715f * x * x * x);
  return 0.5f * x * (1.0f + std::tanh(u));
}

float gelu_grad_scalar(float x) {
  constexpr float kC = 0.7978845608028654f;
  const float x3 = x * x * x;
  const float u = kC * (x + 0.044715f * x3);
  const float t = std::tanh(u);
  const float du = kC * (1.0f + 3.0f * 0.044715f * x * x);
  return 0.5f * (1.0f + t) + 0.5f * x * (1.0f - t * t) * du;
}

Tensor gelu(const Tensor& x) {
  Tensor y(x.shape());
  const float* xp = x.data();
  float* yp = y.data();
  const int64_t n = x.numel();
#pragma omp parallel for schedule(static) if (n > kParallelCutoff)
  for (int64_t i = 0; i < n; ++i) yp[i] = gelu_scalar(xp[i]);
  return y;
}

float cross_entropy(const Tensor& logits, std::span<const int32_t> targets,
                    std::span<const uint8_t> mask) {
  require_2d(logits, "logits");
  const int64_t t = logits.dim(0), v = logits.dim(1);
  if (static_cast<int64_t>(targets.size()) != t || static_cast<int64_t>(mask.size()) != t) {
    throw std::invalid_argument("cross_entropy: targets/mask length mismatch");
  }
  // Per-position terms in f32; the reduction runs at 64-bit so the scalar is
  // usable by finite-difference checks.
  double total = 0.0;
  int64_t count = 0;
  const float* lp = logits.data();
  for (int64_t i = 0; i < t; ++i) {
    if (!mask[static_cast<size_t>(i)]) continue;
    const int32_t tgt = targets[static_cast<size_t>(i)];
    if (tgt < 0 || tgt >= v) throw std::invalid_argument("cross_entropy: target out of range");
    const float* row = lp + i * v;
    float mx = row[0];
    for (int64_t j = 1; j < v; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (int64_t j = 0; j < v; ++j) sum += std::exp(static_cast<double>(row[j] - mx));
    total += std::log(sum) - static_cast<double>(row[tgt] - mx);
    ++count;
  }
  if (count == 0) throw std::invalid_argument("cross_entropy: all positions masked");
  return static_cast<float>(total / static_cast<double>(count));
}

Tensor cross_entropy_grad(const Tensor& logits, std::span<const int32_t> targets,
                          std::span<const uint8_t> mask) {
  require_2d(logits, "logits");
  const int64_t t = logits.dim(0), v = logits.dim(1);
  int64_t count = 0;
  for (int64_t i = 0; i < t; ++i) {
    if (mask[static_cast<size_t>(i)]) ++count;
  }
  if (count == 0) throw std::invalid_argument("cross_entropy: all positions masked");
  Tensor g({t, v});
  const float* lp = logits.data();
  float* gp = g.data();
  const float inv = 1.0f / static_cast<float>(count);
#pragma omp parallel for schedule(static) if (t * v > kParallelCutoff)
  for (int64_t i = 0; i < t; ++i) {
    if (!mask[static_cast<size_t>(i)]) continue;
    const float* row = lp + i * v;
    float* grow = gp + i * v;
    float mx = row[0];
    for (int64_t j = 1; j < v; ++j) mx = std::max(mx, row[j]);
    float sum = 0.0f;
    for (int64_t j = 0; j < v; ++j) {
      const float e = std::exp(row[j] - mx);
      grow[j] = e;
      sum += e;
    }
    const float norm = inv / sum;
    for (int64_t j = 0; j < v; ++j) grow[j] *= norm;
    grow[targets[static_cast<size_t>(i)]] -= inv;
  }
  return g;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("add: shape mismatch");
  Tensor c(a.shape());
  const int64_t n = a.numel();
  for (int64_t i = 0; i < n; ++i) c.at(i) = a.at(i) + b.at(i);
  return c;
}

void add_inplace(Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("add: shape mismatch");
  const int64_t n = a.numel();
  float* ap = a.data();
  const float* bp = b.data();
  for (int64_t i = 0; i < n; ++i) ap[i] += bp[i];
}

void axpy_inplace(Tensor& a, float alpha, const Tensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("axpy: shape mismatch");
  const int64_t n = a.numel();
  float* ap = a.data();
  const float* bp = b.data();
  for (int64_t i = 0; i < n; ++i) ap[i] += alpha * bp[i];
}

Tensor scale(const Tensor& a, float alpha) {
  Tensor c(a.shape());
  const int64_t n = a.numel();
  for (int64_t i = 0; i < n; ++i) c.at(i) = alpha * a.at(i);
  return c;
}

}  // namespace steerlab
