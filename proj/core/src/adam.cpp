#include "gmrbm/adam.hpp"

#include <cmath>
#include <span>

#include "gmrbm/errors.hpp"

namespace gmrbm {

namespace {

void ascend_block(std::span<double> theta, std::span<const double> g,
                  std::span<double> m, std::span<double> v,
                  const AdamConfig& config, double bias1, double bias2) {
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
    v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
    const double m_hat = m[i] / bias1;
    const double v_hat = v[i] / bias2;
    const double step =
        config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    if (step != 0.0) theta[i] += step;
  }
}

}  // namespace

AdamState::AdamState(const ModelParams& params)
    : first_(params), second_(params) {}

void AdamState::ascend(ModelParams& params, const GradientRecord& grad,
                       const AdamConfig& config) {
  if (grad.db.size() != first_.db.size() || grad.dc.size() != first_.dc.size() ||
      grad.dw.size() != first_.dw.size()) {
    throw UsageError("gradient shape does not match the optimizer state");
  }
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double bias1 = 1.0 - std::pow(config.beta1, t);
  const double bias2 = 1.0 - std::pow(config.beta2, t);
  ascend_block(params.visible_bias(), grad.db, first_.db, second_.db, config,
               bias1, bias2);
  ascend_block(params.hidden_bias(), grad.dc, first_.dc, second_.dc, config,
               bias1, bias2);
  ascend_block(params.weights(), grad.dw, first_.dw, second_.dw, config, bias1,
               bias2);
}

}  // namespace gmrbm
