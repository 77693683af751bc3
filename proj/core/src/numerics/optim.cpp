#include "lcr/numerics/optim.hpp"

#include <cmath>

#include "lcr/errors.hpp"

namespace lcr::numerics {

Optimizer::Optimizer(ParameterList params, OptimizerOptions options)
    : params_(std::move(params)), options_(options) {
  if (!(options_.learning_rate > 0.0)) {
    throw ConfigError("learning rate must be positive, got " + std::to_string(options_.learning_rate));
  }
  if (options_.kind == OptimizerKind::adam) {
    if (options_.beta1 < 0.0 || options_.beta1 >= 1.0 || options_.beta2 < 0.0 || options_.beta2 >= 1.0) {
      throw ConfigError("adam betas must lie in [0, 1)");
    }
    if (!(options_.epsilon > 0.0)) throw ConfigError("adam epsilon must be positive");
  }
  reset();
}

void Optimizer::reset() {
  steps_ = 0;
  first_moment_.clear();
  second_moment_.clear();
  if (options_.kind != OptimizerKind::adam) return;
  for (const Parameter* p : params_) {
    first_moment_.emplace_back(p->value.shape());
    second_moment_.emplace_back(p->value.shape());
  }
}

void Optimizer::zero_grad() { numerics::zero_grad(params_); }

void Optimizer::step() {
  ++steps_;
  const double lr = options_.learning_rate;
  if (options_.kind == OptimizerKind::sgd) {
    for (Parameter* p : params_) {
      for (std::size_t i = 0; i < p->value.size(); ++i) p->value[i] -= lr * p->grad[i];
    }
    return;
  }
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter& p = *params_[k];
    double* m = first_moment_[k].raw();
    double* v = second_moment_[k].raw();
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p.value[i] -= lr * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
}

}  // namespace lcr::numerics
