#include "lcr/agent/dqn_agent.hpp"

#include <algorithm>
#include <cmath>

#include "lcr/errors.hpp"
#include "lcr/numerics/ops.hpp"

namespace lcr::agent {

std::string to_string(ScheduleUnit unit) { return unit == ScheduleUnit::episodes ? "episodes" : "steps"; }

ScheduleUnit parse_schedule_unit(const std::string& text) {
  if (text == "episodes") return ScheduleUnit::episodes;
  if (text == "steps") return ScheduleUnit::steps;
  throw ConfigError("copy_unit must be 'episodes' or 'steps', got '" + text + "'");
}

void AgentConfig::validate() const {
  if (gamma < 0.0 || gamma > 1.0) throw ConfigError("gamma must lie in [0, 1]");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  for (double eps : {start_epsilon, stop_epsilon}) {
    if (eps < 0.0 || eps > 1.0) throw ConfigError("epsilons must lie in [0, 1]");
  }
  if (epsilon_decay < 0.0) throw ConfigError("epsilon_decay must be non-negative");
  if (copy_step < 1) throw ConfigError("copy_step must be >= 1");
  if (max_buffer_size == 0 || min_buffer_size > max_buffer_size) {
    throw ConfigError("need 0 < min_buffer_size <= max_buffer_size");
  }
}

AgentConfig AgentConfig::grid_defaults() { return AgentConfig{}; }

AgentConfig AgentConfig::classic_control_defaults() {
  AgentConfig c;
  c.batch_size = 64;
  c.copy_step = 25;
  c.copy_unit = ScheduleUnit::steps;
  c.max_buffer_size = 5000;
  c.min_buffer_size = 100;
  c.epsilon_unit = ScheduleUnit::steps;
  c.head_hidden = {};
  return c;
}

double epsilon_schedule(const AgentConfig& config, long n) {
  return config.stop_epsilon +
         (config.start_epsilon - config.stop_epsilon) * std::exp(-config.epsilon_decay * static_cast<double>(n));
}

int greedy_action(std::span<const double> q_values) {
  return static_cast<int>(std::max_element(q_values.begin(), q_values.end()) - q_values.begin());
}

NetworkSpec network_spec_for(const AgentConfig& config, const Shape& observation, std::size_t num_actions) {
  if (observation.size() == 3) return conv_network_spec(observation, config.conv_channels, config.head_hidden, num_actions);
  if (observation.size() == 1) {
    return mlp_network_spec(observation[0], config.encoder_hidden, config.head_hidden, num_actions);
  }
  throw DimensionError("no network family for observation shape " + numerics::to_string(observation));
}

DqnAgent::DqnAgent(AgentConfig config, const NetworkSpec& spec, Rng& init_rng)
    : config_(std::move(config)),
      online_(spec, init_rng),
      target_(online_),
      optimizer_(online_.parameters(), {numerics::OptimizerKind::adam, config_.learning_rate}) {
  config_.validate();
}

int DqnAgent::act(const Tensor& observation, double epsilon, Rng& rng) {
  const int actions = static_cast<int>(online_.num_actions());
  if (uniform01(rng) < epsilon) return uniform_int(rng, 0, actions - 1);
  const Tensor q = online_.predict(as_batch(observation));
  return greedy_action(q.data());
}

Var DqnAgent::td_loss(Graph& graph, std::span<const replay::TransitionRef> batch) {
  if (batch.empty()) throw UsageError("td_loss on an empty minibatch");
  std::vector<const Tensor*> states, next_states;
  std::vector<int> actions;
  states.reserve(batch.size());
  next_states.reserve(batch.size());
  actions.reserve(batch.size());
  for (const replay::Transition& t : batch) {
    states.push_back(&t.state);
    next_states.push_back(&t.next_state);
    actions.push_back(t.action);
  }

  const Tensor next_q = target_.predict(numerics::stack(next_states));
  const std::size_t width = next_q.dim(1);
  Tensor targets({batch.size()});
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const replay::Transition& t = batch[b];
    const double* row = next_q.raw() + b * width;
    const double best = *std::max_element(row, row + width);
    targets[b] = t.reward + (t.terminated ? 0.0 : config_.gamma * best);
  }

  Var q = online_.q_values(graph, graph.constant(numerics::stack(states)));
  Var chosen = numerics::select_columns(q, actions);
  return numerics::mean(numerics::square(numerics::sub(chosen, graph.constant(std::move(targets)))));
}

std::optional<double> DqnAgent::train_step(const replay::ReplayBuffer& buffer, Rng& rng) {
  auto batch = buffer.sample_uniform(rng, config_.batch_size);
  if (!batch) return std::nullopt;
  optimizer_.zero_grad();
  Graph graph;
  Var loss = td_loss(graph, *batch);
  graph.backward(loss);
  optimizer_.step();
  ++train_steps_;
  return loss.value()[0];
}

void DqnAgent::sync_target() { target_.copy_from(online_); }

}  // namespace lcr::agent
