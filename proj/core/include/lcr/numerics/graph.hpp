#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "lcr/numerics/parameter.hpp"
#include "lcr/numerics/tensor.hpp"

namespace lcr::numerics {

class Graph;

// Handle to a value recorded on a Graph. Cheap to copy; valid while its Graph lives.
class Var {
 public:
  Var() = default;

  bool valid() const noexcept { return graph_ != nullptr; }
  Graph* graph() const noexcept { return graph_; }
  std::size_t id() const noexcept { return id_; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  friend class Graph;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph* graph_ = nullptr;
  std::size_t id_ = std::numeric_limits<std::size_t>::max();
};

// What a recorded op sees when its gradient is propagated. Entries of input_grads
// are null for inputs that do not need a gradient; ops should skip that work.
struct BackwardContext {
  const Tensor& output;
  const Tensor& output_grad;
  std::span<const Tensor* const> inputs;
  std::span<Tensor* const> input_grads;
};

using BackwardFn = std::function<void(const BackwardContext&)>;

// Tape for one forward computation. Nodes are appended in evaluation order, so
// reverse insertion order is a valid topological order for backward. In inference
// mode only values are kept and backward is rejected.
class Graph {
 public:
  enum class Mode { record, inference };

  explicit Graph(Mode mode = Mode::record) : mode_(mode) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool recording() const noexcept { return mode_ == Mode::record; }

  Var constant(Tensor value);
  Var parameter(Parameter& param);
  Var record(Tensor value, std::vector<Var> inputs, BackwardFn backward);

  const Tensor& value(Var v) const;
  std::size_t size() const noexcept { return nodes_.size(); }

  // Adds d(loss)/d(param) into every reachable Parameter's grad. The loss must be a
  // single-element tensor recorded on this graph. May be called more than once.
  void backward(Var loss);

 private:
  struct Node {
    Tensor value;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
    Tensor grad;
  };

  Var push(Node node);
  void check_owned(Var v) const;

  Mode mode_;
  std::deque<Node> nodes_;
};

// Free-function form of Graph::backward for a loss handle.
void backward(Var loss);

}  // namespace lcr::numerics
