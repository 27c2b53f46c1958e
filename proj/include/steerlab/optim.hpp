#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "steerlab/tensor.hpp"

namespace steerlab {

struct AdamConfig {
  float lr = 3e-4f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
};

// Bias-corrected Adam. State is allocated lazily on the first step and is
// keyed by parameter order, which must not change between steps.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  void step(std::span<Parameter> params);
  void step(std::span<Parameter> params, float lr_override);

  int64_t steps_taken() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  int64_t t_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

}  // namespace steerlab
