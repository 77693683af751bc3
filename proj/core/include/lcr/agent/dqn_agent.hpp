#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lcr/agent/q_network.hpp"
#include "lcr/numerics/optim.hpp"
#include "lcr/replay/replay_buffer.hpp"

namespace lcr::agent {

enum class ScheduleUnit { episodes, steps };

std::string to_string(ScheduleUnit unit);
ScheduleUnit parse_schedule_unit(const std::string& text);

struct AgentConfig {
  double gamma = 0.99;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  double start_epsilon = 1.0;
  double stop_epsilon = 1e-3;
  double epsilon_decay = 1e-3;
  // Counter the exponential epsilon decay runs on.
  ScheduleUnit epsilon_unit = ScheduleUnit::episodes;
  int copy_step = 5;
  ScheduleUnit copy_unit = ScheduleUnit::episodes;
  std::size_t max_buffer_size = 10000;
  std::size_t min_buffer_size = 1000;
  // Convolutional encoders (grid observations).
  std::vector<std::size_t> conv_channels = {16, 32, 32};
  // Dense encoders (flat observations); the last width is the representation size.
  std::vector<std::size_t> encoder_hidden = {32, 32};
  // Hidden layers between the representation and the Q-value output.
  std::vector<std::size_t> head_hidden = {64};

  void validate() const;
  friend bool operator==(const AgentConfig&, const AgentConfig&) = default;

  static AgentConfig grid_defaults();
  static AgentConfig classic_control_defaults();
};

// eps(n) = stop + (start - stop) * exp(-decay * n), where n counts episodes or
// environment steps depending on config.epsilon_unit.
double epsilon_schedule(const AgentConfig& config, long n);

// Index of the largest value; ties go to the lowest index.
int greedy_action(std::span<const double> q_values);

NetworkSpec network_spec_for(const AgentConfig& config, const Shape& observation, std::size_t num_actions);

// DQN with an online and a hard-synced target network, trained by Adam on the mean
// squared one-step TD error.
class DqnAgent {
 public:
  DqnAgent(AgentConfig config, const NetworkSpec& spec, Rng& init_rng);
  DqnAgent(const DqnAgent&) = delete;
  DqnAgent& operator=(const DqnAgent&) = delete;

  int act(const Tensor& observation, double epsilon, Rng& rng);

  // mean_b (r + gamma * (1 - terminated) * max_a Q_target(s', a) - Q_online(s, a))^2;
  // only the online network is on the graph.
  Var td_loss(Graph& graph, std::span<const replay::TransitionRef> batch);

  // One Adam step on a uniform minibatch. nullopt while the buffer is below its minimum.
  std::optional<double> train_step(const replay::ReplayBuffer& buffer, Rng& rng);

  void sync_target();

  QNetwork& online() noexcept { return online_; }
  QNetwork& target() noexcept { return target_; }
  const AgentConfig& config() const noexcept { return config_; }
  long train_steps() const noexcept { return train_steps_; }

 private:
  AgentConfig config_;
  QNetwork online_;
  QNetwork target_;
  numerics::Optimizer optimizer_;
  long train_steps_ = 0;
};

}  // namespace lcr::agent
