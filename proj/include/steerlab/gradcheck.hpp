#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "steerlab/tensor.hpp"

namespace steerlab {

struct GradCheckBlock {
  std::string name;
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckBlock> blocks;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  bool passed() const { return max_rel_err < tolerance; }
};

// Compares reverse-mode gradients against central finite differences.
//
// `loss_fn(with_grad)` evaluates the loss at the current parameter values;
// when `with_grad` is true it must also leave d(loss)/d(param) in each
// Parameter::grad (grads are zeroed here beforehand). Differencing runs at
// h = 1e-3 with 64-bit arithmetic. The per-block relative error is the
// largest element deviation scaled by the block's gradient magnitude.
GradCheckReport check_gradients(const std::function<double(bool)>& loss_fn,
                                std::span<Parameter> params, double tolerance,
                                double h = 1e-3);

}  // namespace steerlab
