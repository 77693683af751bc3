#include "lcr/agent/q_network.hpp"

#include <algorithm>

#include "lcr/errors.hpp"

namespace lcr::agent {

NetworkSpec conv_network_spec(const Shape& observation, const std::vector<std::size_t>& conv_channels,
                              const std::vector<std::size_t>& head_hidden, std::size_t num_actions) {
  if (observation.size() != 3) throw DimensionError("conv encoder expects [C,H,W] observations");
  if (conv_channels.size() != 3) throw ConfigError("conv encoder needs exactly three channel widths");
  NetworkSpec spec;
  spec.input_shape = observation;
  Shape shape = observation;
  std::size_t channels = observation[0];
  auto push = [&](const LayerSpec& layer) {
    shape = numerics::layer_output_shape(layer, shape);
    spec.encoder.push_back(layer);
  };
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t kernel = std::min<std::size_t>(3, std::min(shape[1], shape[2]));
    push(LayerSpec::conv2d(channels, conv_channels[i], kernel));
    push(LayerSpec::relu());
    if (i < 2 && std::min(shape[1], shape[2]) >= 2) push(LayerSpec::maxpool2d());
    channels = conv_channels[i];
  }
  push(LayerSpec::flatten());

  std::size_t width = shape[0];
  for (std::size_t hidden : head_hidden) {
    spec.head.push_back(LayerSpec::dense(width, hidden));
    spec.head.push_back(LayerSpec::relu());
    width = hidden;
  }
  spec.head.push_back(LayerSpec::dense(width, num_actions));
  return spec;
}

NetworkSpec mlp_network_spec(std::size_t observation_dim, const std::vector<std::size_t>& encoder_hidden,
                             const std::vector<std::size_t>& head_hidden, std::size_t num_actions) {
  if (encoder_hidden.empty()) throw ConfigError("mlp encoder needs at least one hidden layer");
  NetworkSpec spec;
  spec.input_shape = {observation_dim};
  std::size_t width = observation_dim;
  for (std::size_t hidden : encoder_hidden) {
    spec.encoder.push_back(LayerSpec::dense(width, hidden));
    spec.encoder.push_back(LayerSpec::relu());
    width = hidden;
  }
  for (std::size_t hidden : head_hidden) {
    spec.head.push_back(LayerSpec::dense(width, hidden));
    spec.head.push_back(LayerSpec::relu());
    width = hidden;
  }
  spec.head.push_back(LayerSpec::dense(width, num_actions));
  return spec;
}

namespace {
numerics::Sequential build_head(const NetworkSpec& spec, const numerics::Sequential& encoder, Rng& rng) {
  const Shape& phi = encoder.output_shape();
  if (phi.size() != 1) throw DimensionError("encoder must end in a flat representation, got " + numerics::to_string(phi));
  return numerics::Sequential(spec.head, phi, rng);
}
}  // namespace

QNetwork::QNetwork(const NetworkSpec& spec, Rng& rng)
    : spec_(spec), encoder_(spec.encoder, spec.input_shape, rng), head_(build_head(spec, encoder_, rng)) {}

Var QNetwork::encode(Graph& graph, Var observations) { return encoder_.forward(graph, observations); }

Var QNetwork::head(Graph& graph, Var representation) { return head_.forward(graph, representation); }

Tensor QNetwork::predict(const Tensor& observations) {
  Graph graph(Graph::Mode::inference);
  return q_values(graph, graph.constant(observations)).value();
}

Tensor QNetwork::represent(const Tensor& observations) {
  Graph graph(Graph::Mode::inference);
  return encode(graph, graph.constant(observations)).value();
}

ParameterList QNetwork::parameters() {
  ParameterList all = encoder_parameters();
  for (auto* p : head_parameters()) all.push_back(p);
  return all;
}

void QNetwork::copy_from(QNetwork& other) {
  ParameterList dst = parameters();
  ParameterList src = other.parameters();
  if (dst.size() != src.size()) throw DimensionError("copy_from: architectures differ");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i]->value.shape() != src[i]->value.shape()) throw DimensionError("copy_from: parameter shapes differ");
    dst[i]->value = src[i]->value;
  }
}

Tensor as_batch(const Tensor& observation) {
  Shape shape{1};
  shape.insert(shape.end(), observation.shape().begin(), observation.shape().end());
  return observation.reshaped(std::move(shape));
}

}  // namespace lcr::agent
