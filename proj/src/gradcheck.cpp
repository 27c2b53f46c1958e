#include "steerlab/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace steerlab {

GradCheckReport check_gradients(const std::function<double(bool)>& loss_fn,
                                std::span<Parameter> params, double tolerance,
                                double h) {
  GradCheckReport report;
  report.tolerance = tolerance;

  for (Parameter& p : params) p.zero_grad();
  const double base = loss_fn(true);
  if (!std::isfinite(base)) throw std::runtime_error("gradcheck: non-finite loss");

  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const Parameter& p : params) analytic.push_back(p.grad);

  for (size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = params[pi];
    GradCheckBlock block;
    block.name = p.name;
    double scale = 0.0;
    std::vector<double> fd(static_cast<size_t>(p.value.numel()));
    for (int64_t i = 0; i < p.value.numel(); ++i) {
      const float saved = p.value.at(i);
      p.value.at(i) = saved + static_cast<float>(h);
      const double lp = loss_fn(false);
      p.value.at(i) = saved - static_cast<float>(h);
      const double lm = loss_fn(false);
      p.value.at(i) = saved;
      if (!std::isfinite(lp) || !std::isfinite(lm)) {
        throw std::runtime_error("gradcheck: non-finite loss during differencing");
      }
      fd[static_cast<size_t>(i)] = (lp - lm) / (2.0 * h);
    }
    for (int64_t i = 0; i < p.value.numel(); ++i) {
      const double a = static_cast<double>(analytic[pi].at(i));
      const double f = fd[static_cast<size_t>(i)];
      scale = std::max({scale, std::fabs(a), std::fabs(f)});
      block.max_abs_err = std::max(block.max_abs_err, std::fabs(a - f));
    }
    block.max_rel_err = block.max_abs_err / (scale + 1e-12);
    report.max_rel_err = std::max(report.max_rel_err, block.max_rel_err);
    report.blocks.push_back(std::move(block));
  }
  return report;
}

}  // namespace steerlab
