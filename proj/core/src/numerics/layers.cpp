#include "lcr/numerics/layers.hpp"

#include <cmath>

#include "lcr/errors.hpp"

namespace lcr::numerics {

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::maxpool2d: return "maxpool2d";
    case LayerKind::relu: return "relu";
    case LayerKind::flatten: return "flatten";
  }
  return "unknown";
}

void glorot_uniform(Tensor& weights, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  for (double& w : weights.data()) w = dist(rng);
}

Dense::Dense(const LayerSpec& spec, Rng& rng)
    : weights("weights", Tensor({spec.in_features, spec.out_features})), bias("bias", Tensor({spec.out_features})) {
  glorot_uniform(weights.value, spec.in_features, spec.out_features, rng);
}

Var Dense::forward(Graph& graph, Var x) { return dense(x, graph.parameter(weights), graph.parameter(bias)); }

Conv2d::Conv2d(const LayerSpec& spec, Rng& rng)
    : kernel("kernel", Tensor({spec.out_channels, spec.in_channels, spec.kernel, spec.kernel})),
      bias("bias", Tensor({spec.out_channels})) {
  const std::size_t area = spec.kernel * spec.kernel;
  glorot_uniform(kernel.value, spec.in_channels * area, spec.out_channels * area, rng);
}

Var Conv2d::forward(Graph& graph, Var x) { return conv2d(x, graph.parameter(kernel), graph.parameter(bias)); }

Shape layer_output_shape(const LayerSpec& spec, const Shape& in) {
  auto fail = [&](const std::string& why) -> DimensionError {
    return DimensionError(to_string(spec.kind) + " layer on input " + to_string(in) + ": " + why);
  };
  switch (spec.kind) {
    case LayerKind::dense:
      if (spec.in_features == 0 || spec.out_features == 0) throw fail("features must be positive");
      if (in.size() != 1 || in[0] != spec.in_features) {
        throw fail("expects [" + std::to_string(spec.in_features) + "]");
      }
      return {spec.out_features};
    case LayerKind::conv2d: {
      if (spec.in_channels == 0 || spec.out_channels == 0 || spec.kernel == 0) {
        throw fail("channels and kernel must be positive");
      }
      if (spec.stride != 1) throw fail("only stride 1 is supported");
      if (in.size() != 3 || in[0] != spec.in_channels) {
        throw fail("expects [" + std::to_string(spec.in_channels) + ",H,W]");
      }
      if (spec.kernel > in[1] || spec.kernel > in[2]) throw fail("kernel larger than input");
      return {spec.out_channels, in[1] - spec.kernel + 1, in[2] - spec.kernel + 1};
    }
    case LayerKind::maxpool2d:
      if (in.size() != 3) throw fail("expects [C,H,W]");
      if (in[1] < 2 || in[2] < 2) throw fail("spatial size below 2x2");
      return {in[0], in[1] / 2, in[2] / 2};
    case LayerKind::relu:
      return in;
    case LayerKind::flatten:
      return {element_count(in)};
  }
  throw fail("unknown layer kind");
}

Sequential::Sequential(std::vector<LayerSpec> specs, Shape input_shape, Rng& rng)
    : specs_(std::move(specs)), input_shape_(std::move(input_shape)) {
  Shape shape = input_shape_;
  layers_.reserve(specs_.size());
  for (const LayerSpec& spec : specs_) {
    shape = layer_output_shape(spec, shape);
    switch (spec.kind) {
      case LayerKind::dense: layers_.emplace_back(Dense(spec, rng)); break;
      case LayerKind::conv2d: layers_.emplace_back(Conv2d(spec, rng)); break;
      case LayerKind::maxpool2d: layers_.emplace_back(MaxPool2d{}); break;
      case LayerKind::relu: layers_.emplace_back(Relu{}); break;
      case LayerKind::flatten: layers_.emplace_back(Flatten{}); break;
    }
  }
  output_shape_ = shape;
}

Var Sequential::forward(Graph& graph, Var x) {
  for (Layer& layer : layers_) {
    x = std::visit([&](auto& l) { return l.forward(graph, x); }, layer);
  }
  return x;
}

Tensor Sequential::predict(const Tensor& batch) {
  Graph graph(Graph::Mode::inference);
  return forward(graph, graph.constant(batch)).value();
}

ParameterList Sequential::parameters() {
  ParameterList out;
  for (Layer& layer : layers_) {
    for (Parameter* p : std::visit([](auto& l) { return l.parameters(); }, layer)) out.push_back(p);
  }
  return out;
}

}  // namespace lcr::numerics
