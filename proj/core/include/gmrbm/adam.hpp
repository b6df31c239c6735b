#pragma once

#include <cstddef>

#include "gmrbm/model.hpp"

namespace gmrbm {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam moment estimates for the (b, c, W) blocks of one model. Steps are
// ascent steps: the gradient is a log-likelihood gradient.
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(const ModelParams& params);

  void ascend(ModelParams& params, const GradientRecord& grad,
              const AdamConfig& config);

  std::size_t step_count() const { return steps_; }

 private:
  GradientRecord first_;
  GradientRecord second_;
  std::size_t steps_ = 0;
};

}  // namespace gmrbm
