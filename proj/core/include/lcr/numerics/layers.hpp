#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "lcr/numerics/graph.hpp"
#include "lcr/numerics/ops.hpp"
#include "lcr/numerics/random.hpp"

namespace lcr::numerics {

enum class LayerKind { dense, conv2d, maxpool2d, relu, flatten };

std::string to_string(LayerKind kind);

// Declarative description of one layer. Only the fields relevant to `kind` are read.
struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::size_t in_features = 0;
  std::size_t out_features = 0;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 0;
  std::size_t stride = 1;

  static LayerSpec dense(std::size_t in, std::size_t out) { return {LayerKind::dense, in, out}; }
  static LayerSpec conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel) {
    return {LayerKind::conv2d, 0, 0, in_channels, out_channels, kernel, 1};
  }
  static LayerSpec maxpool2d() { return {LayerKind::maxpool2d, 0, 0, 0, 0, 2, 2}; }
  static LayerSpec relu() { return {LayerKind::relu}; }
  static LayerSpec flatten() { return {LayerKind::flatten}; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Glorot-uniform weights, U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Tensor& weights, std::size_t fan_in, std::size_t fan_out, Rng& rng);

class Dense {
 public:
  Dense(const LayerSpec& spec, Rng& rng);
  Var forward(Graph& graph, Var x);
  ParameterList parameters() { return {&weights, &bias}; }
  Parameter weights;
  Parameter bias;
};

class Conv2d {
 public:
  Conv2d(const LayerSpec& spec, Rng& rng);
  Var forward(Graph& graph, Var x);
  ParameterList parameters() { return {&kernel, &bias}; }
  Parameter kernel;
  Parameter bias;
};

struct MaxPool2d {
  Var forward(Graph&, Var x) { return maxpool2d(x); }
  ParameterList parameters() { return {}; }
};

struct Relu {
  Var forward(Graph&, Var x) { return relu(x); }
  ParameterList parameters() { return {}; }
};

struct Flatten {
  Var forward(Graph&, Var x) { return flatten(x); }
  ParameterList parameters() { return {}; }
};

using Layer = std::variant<Dense, Conv2d, MaxPool2d, Relu, Flatten>;

// Per-sample output shape of `spec` applied to per-sample input `in` (no batch axis).
// Throws DimensionError when the two are inconsistent.
Shape layer_output_shape(const LayerSpec& spec, const Shape& in);

// Ordered stack of layers with value semantics: copying a Sequential copies its weights.
class Sequential {
 public:
  Sequential() = default;
  Sequential(std::vector<LayerSpec> specs, Shape input_shape, Rng& rng);

  Var forward(Graph& graph, Var x);
  Tensor predict(const Tensor& batch);

  ParameterList parameters();
  const std::vector<LayerSpec>& specs() const noexcept { return specs_; }
  const Shape& input_shape() const noexcept { return input_shape_; }
  const Shape& output_shape() const noexcept { return output_shape_; }
  std::vector<Layer>& layers() noexcept { return layers_; }

 private:
  std::vector<LayerSpec> specs_;
  std::vector<Layer> layers_;
  Shape input_shape_;
  Shape output_shape_;
};

}  // namespace lcr::numerics
