#include "lcr/numerics/graph.hpp"

#include "lcr/errors.hpp"

namespace lcr::numerics {

double grad_squared_norm(const ParameterList& params) {
  double s = 0.0;
  for (const auto* p : params) s += p->grad.squared_norm();
  return s;
}

void zero_grad(const ParameterList& params) {
  for (auto* p : params) p->zero_grad();
}

const Tensor& Var::value() const {
  if (!graph_) throw UsageError("value() on an unbound Var");
  return graph_->value(*this);
}

Var Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Graph::check_owned(Var v) const {
  if (v.graph() != this || v.id() >= nodes_.size()) throw UsageError("Var does not belong to this graph");
}

Var Graph::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  return push(std::move(node));
}

Var Graph::parameter(Parameter& param) {
  Node node;
  node.value = param.value;
  if (recording()) {
    node.param = &param;
    node.requires_grad = true;
  }
  return push(std::move(node));
}

Var Graph::record(Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  if (recording()) {
    node.inputs.reserve(inputs.size());
    for (const Var& in : inputs) {
      check_owned(in);
      node.inputs.push_back(in.id());
      node.requires_grad = node.requires_grad || nodes_[in.id()].requires_grad;
    }
    if (node.requires_grad) node.backward = std::move(backward);
  }
  return push(std::move(node));
}

const Tensor& Graph::value(Var v) const {
  check_owned(v);
  return nodes_[v.id()].value;
}

void Graph::backward(Var loss) {
  if (!recording()) throw UsageError("backward on a graph recorded in inference mode");
  if (loss.graph() != this || loss.id() >= nodes_.size()) {
    throw UsageError("backward on a tensor that was not produced by this graph");
  }
  if (nodes_[loss.id()].value.size() != 1) throw UsageError("backward requires a scalar loss");

  for (auto& node : nodes_) node.grad = Tensor{};
  nodes_[loss.id()].grad = Tensor(nodes_[loss.id()].value.shape(), 1.0);

  std::vector<const Tensor*> inputs;
  std::vector<Tensor*> input_grads;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (node.grad.empty() || !node.requires_grad) continue;
    if (node.param) {
      double* dst = node.param->grad.raw();
      const double* src = node.grad.raw();
      for (std::size_t k = 0; k < node.grad.size(); ++k) dst[k] += src[k];
    }
    if (!node.backward) continue;

    inputs.clear();
    input_grads.clear();
    for (std::size_t in : node.inputs) {
      Node& parent = nodes_[in];
      inputs.push_back(&parent.value);
      if (parent.requires_grad) {
        if (parent.grad.empty()) parent.grad = Tensor(parent.value.shape());
        input_grads.push_back(&parent.grad);
      } else {
        input_grads.push_back(nullptr);
      }
    }
    node.backward(BackwardContext{node.value, node.grad, inputs, input_grads});
  }
}

void backward(Var loss) {
  if (!loss.valid()) throw UsageError("backward on a tensor that was not produced by a recorded graph");
  loss.graph()->backward(loss);
}

}  // namespace lcr::numerics
