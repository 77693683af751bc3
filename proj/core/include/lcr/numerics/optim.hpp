#pragma once

#include <string>
#include <vector>

#include "lcr/numerics/parameter.hpp"

namespace lcr::numerics {

enum class OptimizerKind { sgd, adam };

struct OptimizerOptions {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First-order optimizer over a fixed parameter list. Moment buffers live here rather
// than on the Parameter so two optimizers can drive overlapping parameter sets
// (the TD learner and the representation constraint both update the encoder).
class Optimizer {
 public:
  Optimizer(ParameterList params, OptimizerOptions options);

  // sgd: p -= lr * g.  adam: bias-corrected first/second moment update.
  void step();
  void zero_grad();
  // Drops accumulated moments and the step counter.
  void reset();

  const OptimizerOptions& options() const noexcept { return options_; }
  const ParameterList& parameters() const noexcept { return params_; }
  long steps_taken() const noexcept { return steps_; }

 private:
  ParameterList params_;
  OptimizerOptions options_;
  std::vector<Tensor> first_moment_;
  std::vector<Tensor> second_moment_;
  long steps_ = 0;
};

}  // namespace lcr::numerics
