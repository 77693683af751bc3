#pragma once

#include <string>
#include <vector>

#include "lcr/numerics/tensor.hpp"

namespace lcr::numerics {

// A trainable tensor with its accumulated gradient. Gradients are summed across
// backward passes until zero_grad().
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor value) : name(std::move(name)), value(std::move(value)), grad(this->value.shape()) {}

  void zero_grad() { grad.fill(0.0); }

  std::string name;
  Tensor value;
  Tensor grad;
};

using ParameterList = std::vector<Parameter*>;

double grad_squared_norm(const ParameterList& params);
void zero_grad(const ParameterList& params);

}  // namespace lcr::numerics
