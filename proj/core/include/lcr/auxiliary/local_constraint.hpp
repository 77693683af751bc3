#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "lcr/agent/q_network.hpp"
#include "lcr/numerics/optim.hpp"
#include "lcr/replay/replay_buffer.hpp"

namespace lcr::auxiliary {

using numerics::Graph;
using numerics::Parameter;
using numerics::Tensor;
using numerics::Var;

struct LcrConfig {
  std::size_t k = 10;             // neighbors per window; the sequence length is k + 1
  std::size_t batch_size = 5000;  // trailing transitions considered per invocation
  int gradient_steps = 100;
  double learning_rate = 1e-4;
  // Keep W between invocations instead of redrawing it from U(0,1) each time.
  bool reuse_w = false;
  // When false only W is optimized and the encoder stays fixed.
  bool train_encoder = true;

  void validate() const;
  friend bool operator==(const LcrConfig&, const LcrConfig&) = default;
};

// Windows over a deduplicated state table. Row r of `states` is one observation;
// window i predicts states[centers[i]] from the rows neighbors[i*k .. i*k+k-1],
// which are in temporal order with the center removed.
struct WindowBatch {
  Tensor states;
  std::size_t k = 0;
  std::vector<std::size_t> centers;
  std::vector<std::size_t> neighbors;
  std::vector<std::size_t> center_positions;  // replay positions of the centers

  std::size_t size() const noexcept { return centers.size(); }
  bool empty() const noexcept { return centers.empty(); }
  std::size_t neighbor(std::size_t window, std::size_t j) const { return neighbors[window * k + j]; }
};

// Windows for every center among the last `batch_size` transitions whose K neighbors
// lie in that same trailing slice and in the same episode.
WindowBatch build_windows(const replay::ReplayBuffer& buffer, std::size_t batch_size, std::size_t k);

// W ~ U(0,1)^{1 x K}.
Parameter init_w(std::size_t k, Rng& rng);

// mean over windows of || W * phi_nearest(T) - phi_T ||^2, with phi: [N, D] holding one
// representation per state-table row and w: [1, K].
Var reconstruction_loss(Var phi, Var w, const WindowBatch& windows);

// Encodes the window states with `network`'s encoder and applies reconstruction_loss.
Var lcr_loss(agent::QNetwork& network, Graph& graph, Var w, const WindowBatch& windows);

// True when total_env_steps is a positive multiple of batch_size.
bool should_trigger(std::uint64_t total_env_steps, std::size_t batch_size);

struct LcrUpdateResult {
  double first_loss = 0.0;
  double last_loss = 0.0;
  std::size_t windows = 0;
};

// Snapshot handed to an observer after each gradient step (post-clip).
struct LcrStepEvent {
  int step;
  double loss;
  const Parameter& w;
  agent::QNetwork& network;
};

// Owns W and runs the interleaved representation-constraint optimization.
class LocalConstraint {
 public:
  explicit LocalConstraint(LcrConfig config);

  // Redraws W (unless reuse_w), then takes gradient_steps Adam steps on lcr_loss over
  // W and the encoder, clipping negative W entries to zero after every step. Value-head
  // parameters are never touched. nullopt when the buffer yields no complete window.
  std::optional<LcrUpdateResult> update(agent::QNetwork& network, const replay::ReplayBuffer& buffer, Rng& rng);

  void set_observer(std::function<void(const LcrStepEvent&)> observer) { observer_ = std::move(observer); }

  const LcrConfig& config() const noexcept { return config_; }
  const Parameter& w() const noexcept { return w_; }
  long invocations() const noexcept { return invocations_; }
  long skipped() const noexcept { return skipped_; }

 private:
  LcrConfig config_;
  Parameter w_;
  bool has_w_ = false;
  long invocations_ = 0;
  long skipped_ = 0;
  std::function<void(const LcrStepEvent&)> observer_;
};

}  // namespace lcr::auxiliary
