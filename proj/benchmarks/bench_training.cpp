#include <benchmark/benchmark.h>

#include "lcr/agent/dqn_agent.hpp"
#include "lcr/auxiliary/local_constraint.hpp"
#include "lcr/envs/grid_world.hpp"

namespace {

using lcr::Rng;

// Fills a buffer with uniformly random random_goal transitions.
lcr::replay::ReplayBuffer random_grid_buffer(std::size_t transitions, Rng& rng) {
  lcr::envs::GridWorld env({8, lcr::envs::GridLayout::empty});
  lcr::replay::ReplayBuffer buffer(transitions, 1);
  std::uint64_t episode = 0, step = 0;
  auto obs = env.reset(rng);
  while (buffer.size() < transitions) {
    const int action = lcr::uniform_int(rng, 0, 2);
    auto result = env.step(action);
    buffer.push({obs, action, result.reward, result.observation, result.terminated, episode, step++});
    if (result.done()) {
      obs = env.reset(rng);
      ++episode;
      step = 0;
    } else {
      obs = std::move(result.observation);
    }
  }
  return buffer;
}

void BM_GridTrainStep(benchmark::State& state) {
  Rng rng(4);
  const auto buffer = random_grid_buffer(2000, rng);
  const auto config = lcr::agent::AgentConfig::grid_defaults();
  lcr::agent::DqnAgent agent(config, lcr::agent::network_spec_for(config, {4, 10, 10}, 3), rng);
  for (auto _ : state) benchmark::DoNotOptimize(agent.train_step(buffer, rng));
}
BENCHMARK(BM_GridTrainStep)->Unit(benchmark::kMicrosecond);

void BM_GridAct(benchmark::State& state) {
  Rng rng(5);
  lcr::envs::GridWorld env({8, lcr::envs::GridLayout::empty});
  const auto obs = env.reset(rng);
  const auto config = lcr::agent::AgentConfig::grid_defaults();
  lcr::agent::DqnAgent agent(config, lcr::agent::network_spec_for(config, {4, 10, 10}, 3), rng);
  for (auto _ : state) benchmark::DoNotOptimize(agent.act(obs, 0.0, rng));
}
BENCHMARK(BM_GridAct)->Unit(benchmark::kMicrosecond);

// One constraint invocation (window build plus `steps` gradient steps) over B random transitions.
void BM_LcrUpdate(benchmark::State& state) {
  Rng rng(6);
  const auto batch = static_cast<std::size_t>(state.range(0));
  const auto buffer = random_grid_buffer(batch, rng);
  const auto config = lcr::agent::AgentConfig::grid_defaults();
  lcr::agent::QNetwork network(lcr::agent::network_spec_for(config, {4, 10, 10}, 3), rng);
  lcr::auxiliary::LcrConfig lcr_config;
  lcr_config.batch_size = batch;
  lcr_config.gradient_steps = 10;
  lcr::auxiliary::LocalConstraint constraint(lcr_config);
  for (auto _ : state) benchmark::DoNotOptimize(constraint.update(network, buffer, rng));
}
BENCHMARK(BM_LcrUpdate)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace
