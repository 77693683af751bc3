#pragma once

#include <vector>

#include "lcr/numerics/layers.hpp"

namespace lcr::agent {

using numerics::Graph;
using numerics::LayerSpec;
using numerics::ParameterList;
using numerics::Shape;
using numerics::Tensor;
using numerics::Var;

// Layer stacks for the encoder f (observation -> representation) and the value head
// (representation -> Q-values), plus the per-sample observation shape they accept.
struct NetworkSpec {
  Shape input_shape;
  std::vector<LayerSpec> encoder;
  std::vector<LayerSpec> head;
};

// Three valid 3x3 convolutions with ReLU, the first two followed by 2x2 max-pooling,
// flattened into the representation. On small inputs a kernel shrinks to the remaining
// spatial size and pooling is dropped once that size reaches 1.
NetworkSpec conv_network_spec(const Shape& observation, const std::vector<std::size_t>& conv_channels,
                              const std::vector<std::size_t>& head_hidden, std::size_t num_actions);

// Dense+ReLU encoder over flat observations; the last hidden activation is the
// representation.
NetworkSpec mlp_network_spec(std::size_t observation_dim, const std::vector<std::size_t>& encoder_hidden,
                             const std::vector<std::size_t>& head_hidden, std::size_t num_actions);

class QNetwork {
 public:
  QNetwork(const NetworkSpec& spec, Rng& rng);

  // Batched forward passes; inputs are [B, input_shape...].
  Var encode(Graph& graph, Var observations);
  Var head(Graph& graph, Var representation);
  Var q_values(Graph& graph, Var observations) { return head(graph, encode(graph, observations)); }

  Tensor predict(const Tensor& observations);
  Tensor represent(const Tensor& observations);

  ParameterList encoder_parameters() { return encoder_.parameters(); }
  ParameterList head_parameters() { return head_.parameters(); }
  ParameterList parameters();

  numerics::Sequential& encoder_network() noexcept { return encoder_; }
  numerics::Sequential& head_network() noexcept { return head_; }

  std::size_t representation_dim() const { return encoder_.output_shape().at(0); }
  std::size_t num_actions() const { return head_.output_shape().at(0); }
  const Shape& input_shape() const noexcept { return encoder_.input_shape(); }
  const NetworkSpec& spec() const noexcept { return spec_; }

  // Copies every parameter value bit for bit; the architectures must match.
  void copy_from(QNetwork& other);

 private:
  NetworkSpec spec_;
  numerics::Sequential encoder_;
  numerics::Sequential head_;
};

// Prepends a batch axis: [1, shape...].
Tensor as_batch(const Tensor& observation);

}  // namespace lcr::agent
