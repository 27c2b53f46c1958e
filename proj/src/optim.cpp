#include "steerlab/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace steerlab {

void Adam::step(std::span<Parameter> params) { step(params, config_.lr); }

void Adam::step(std::span<Parameter> params, float lr) {
  if (m_.empty()) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const Parameter& p : params) {
      m_.emplace_back(p.value.shape());
      v_.emplace_back(p.value.shape());
    }
  }
  if (m_.size() != params.size()) {
    throw std::invalid_argument("adam: parameter count changed between steps");
  }
  ++t_;
  const float b1 = config_.beta1, b2 = config_.beta2;
  const float bc1 = 1.0f - std::pow(b1, static_cast<float>(t_));
  const float bc2 = 1.0f - std::pow(b2, static_cast<float>(t_));
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = params[pi];
    if (!p.grad.same_shape(p.value)) {
      throw std::invalid_argument("adam: grad/value shape mismatch for " + p.name);
    }
    float* w = p.value.data();
    const float* g = p.grad.data();
    float* m = m_[pi].data();
    float* v = v_[pi].data();
    const int64_t n = p.value.numel();
    for (int64_t i = 0; i < n; ++i) {
      m[i] = b1 * m[i] + (1.0f - b1) * g[i];
      v[i] = b2 * v[i] + (1.0f - b2) * g[i] * g[i];
      const float mhat = m[i] / bc1;
      const float vhat = v[i] / bc2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
  }
}

}  // namespace steerlab
