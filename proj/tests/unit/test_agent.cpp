#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "lcr/agent/dqn_agent.hpp"
#include "lcr/errors.hpp"
#include "lcr/numerics/graph.hpp"
#include "lcr_test_support.hpp"

namespace {

using lcr::agent::AgentConfig;
using lcr::agent::DqnAgent;
using lcr::numerics::Tensor;
using lcr::replay::Transition;
using lcr::replay::TransitionRef;

lcr::agent::NetworkSpec small_mlp(std::size_t actions = 3) {
  return lcr::agent::mlp_network_spec(2, {5, 4}, {}, actions);
}

// Zeroes every parameter and puts `q` in the output bias, so Q(s, .) == q for all s.
void force_q_values(lcr::agent::QNetwork& net, const std::vector<double>& q) {
  for (auto* p : net.parameters()) p->value.fill(0.0);
  auto* bias = net.head_parameters().back();
  ASSERT_EQ(bias->value.size(), q.size());
  for (std::size_t i = 0; i < q.size(); ++i) bias->value[i] = q[i];
}

Tensor obs(double a, double b) { return Tensor({2}, std::vector<double>{a, b}); }

double td_loss_value(DqnAgent& agent, const std::vector<Transition>& transitions) {
  std::vector<TransitionRef> batch(transitions.begin(), transitions.end());
  lcr::numerics::Graph g;
  return agent.td_loss(g, batch).value()[0];
}

TEST(EpsilonSchedule, ClosedForm) {
  AgentConfig c;
  EXPECT_DOUBLE_EQ(lcr::agent::epsilon_schedule(c, 0), 1.0);
  EXPECT_NEAR(lcr::agent::epsilon_schedule(c, 1000), 0.001 + 0.999 * std::exp(-1.0), 1e-15);
  EXPECT_NEAR(lcr::agent::epsilon_schedule(c, 1000), 0.3685, 1e-4);
  EXPECT_NEAR(lcr::agent::epsilon_schedule(c, 100000), 0.001, 1e-12);
  double previous = 2.0;
  for (long n = 0; n < 10000; n += 250) {
    const double e = lcr::agent::epsilon_schedule(c, n);
    EXPECT_LT(e, previous);
    EXPECT_GE(e, 0.001);
    previous = e;
  }
}

TEST(Defaults, GridAndClassicControl) {
  const auto grid = AgentConfig::grid_defaults();
  EXPECT_EQ(grid.batch_size, 32u);
  EXPECT_EQ(grid.copy_step, 5);
  EXPECT_EQ(grid.copy_unit, lcr::agent::ScheduleUnit::episodes);
  const auto classic = AgentConfig::classic_control_defaults();
  EXPECT_EQ(classic.batch_size, 64u);
  EXPECT_EQ(classic.copy_step, 25);
  EXPECT_EQ(classic.copy_unit, lcr::agent::ScheduleUnit::steps);
  EXPECT_EQ(lcr::agent::parse_schedule_unit("steps"), lcr::agent::ScheduleUnit::steps);
  EXPECT_THROW(lcr::agent::parse_schedule_unit("days"), lcr::ConfigError);
}

TEST(AgentConfig, Validation) {
  AgentConfig c;
  c.gamma = 1.5;
  EXPECT_THROW(c.validate(), lcr::ConfigError);
  c = AgentConfig{};
  c.copy_step = 0;
  EXPECT_THROW(c.validate(), lcr::ConfigError);
  c = AgentConfig{};
  c.stop_epsilon = -0.1;
  EXPECT_THROW(c.validate(), lcr::ConfigError);
  c = AgentConfig{};
  c.min_buffer_size = c.max_buffer_size + 1;
  EXPECT_THROW(c.validate(), lcr::ConfigError);
}

TEST(GreedyAction, ArgmaxAndTies) {
  EXPECT_EQ(lcr::agent::greedy_action(std::vector<double>{0.1, 0.9, 0.3}), 1);
  EXPECT_EQ(lcr::agent::greedy_action(std::vector<double>{0.5, 0.5, 0.5}), 0);
  EXPECT_EQ(lcr::agent::greedy_action(std::vector<double>{-1.0, 2.0, 2.0}), 1);
}

TEST(Act, GreedyUsesNetwork) {
  lcr::Rng rng(1);
  DqnAgent agent(AgentConfig{}, small_mlp(), rng);
  force_q_values(agent.online(), {0.1, 0.9, 0.3});
  EXPECT_EQ(agent.act(obs(0.3, -2.0), 0.0, rng), 1);
  force_q_values(agent.online(), {0.4, 0.4, 0.4});
  EXPECT_EQ(agent.act(obs(0.3, -2.0), 0.0, rng), 0);
}

TEST(Act, ScalingQValuesKeepsGreedyAction) {
  lcr::Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    DqnAgent agent(AgentConfig{}, small_mlp(), rng);
    const Tensor o = lcr::testing::random_tensor({2}, rng, -3.0, 3.0);
    const int before = agent.act(o, 0.0, rng);
    // The head is a single dense layer, so scaling it scales every Q-value.
    const double c = 0.1 + 10.0 * lcr::uniform01(rng);
    for (auto* p : agent.online().head_parameters())
      for (double& v : p->value.data()) v *= c;
    EXPECT_EQ(agent.act(o, 0.0, rng), before);
  }
}

TEST(Act, FullyRandomIsUniform) {
  lcr::Rng rng(3);
  DqnAgent agent(AgentConfig{}, small_mlp(), rng);
  force_q_values(agent.online(), {0.0, 5.0, 0.0});
  std::vector<int> counts(3, 0);
  const int draws = 30000;
  for (int i = 0; i < draws; ++i) ++counts[agent.act(obs(0, 0), 1.0, rng)];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - draws / 3.0) * (c - draws / 3.0) / (draws / 3.0);
  // 2 degrees of freedom; the 0.999 quantile is 13.82.
  EXPECT_LT(chi2, 13.82);
}

TEST(TdLoss, TerminalRewardOnly) {
  lcr::Rng rng(4);
  DqnAgent agent(AgentConfig{}, small_mlp(), rng);
  force_q_values(agent.online(), {0.0, 0.0, 0.0});
  force_q_values(agent.target(), {7.0, 7.0, 7.0});
  Transition t{obs(1, 2), 2, 1.0, obs(3, 4), true, 0, 0};
  EXPECT_DOUBLE_EQ(td_loss_value(agent, {t}), 1.0);
}

TEST(TdLoss, ZeroAtFixedPoint) {
  lcr::Rng rng(5);
  AgentConfig config;
  config.gamma = 0.9;
  DqnAgent agent(config, small_mlp(), rng);
  for (auto* p : agent.online().parameters())
    for (double& v : p->value.data()) v += 0.2;
  std::vector<Transition> batch;
  for (int i = 0; i < 6; ++i) {
    Transition t{lcr::testing::random_tensor({2}, rng), i % 3, 0.0, lcr::testing::random_tensor({2}, rng), false, 0, 0};
    const Tensor q = agent.online().predict(lcr::agent::as_batch(t.state));
    const Tensor next = agent.target().predict(lcr::agent::as_batch(t.next_state));
    t.reward = q[t.action] - 0.9 * *std::max_element(next.data().begin(), next.data().end());
    batch.push_back(std::move(t));
  }
  EXPECT_NEAR(td_loss_value(agent, batch), 0.0, 1e-28);
}

TEST(TdLoss, MatchesPerTransitionOracle) {
  lcr::Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    AgentConfig config;
    config.gamma = lcr::uniform01(rng);
    DqnAgent agent(config, small_mlp(), rng);
    for (auto* p : agent.online().parameters())
      for (double& v : p->value.data()) v += 0.3 * (2.0 * lcr::uniform01(rng) - 1.0);
    std::vector<Transition> batch(lcr::uniform_int(rng, 1, 8));
    double expected = 0.0;
    for (auto& t : batch) {
      t = {lcr::testing::random_tensor({2}, rng), lcr::uniform_int(rng, 0, 2), 2.0 * lcr::uniform01(rng) - 1.0,
           lcr::testing::random_tensor({2}, rng), lcr::uniform01(rng) < 0.3, 0, 0};
      const Tensor q = agent.online().predict(lcr::agent::as_batch(t.state));
      const Tensor next = agent.target().predict(lcr::agent::as_batch(t.next_state));
      const double best = std::max({next[0], next[1], next[2]});
      const double target = t.reward + (t.terminated ? 0.0 : config.gamma * best);
      expected += (target - q[t.action]) * (target - q[t.action]);
    }
    expected /= static_cast<double>(batch.size());
    EXPECT_NEAR(td_loss_value(agent, batch), expected, 1e-12 * std::max(1.0, expected));
  }
}

TEST(TdLoss, GammaZeroAfterSync) {
  lcr::Rng rng(7);
  AgentConfig config;
  config.gamma = 0.0;
  DqnAgent agent(config, small_mlp(), rng);
  agent.sync_target();
  Transition t{obs(0.5, -0.5), 1, 0.75, obs(9, 9), false, 0, 0};
  const double q = agent.online().predict(lcr::agent::as_batch(t.state))[1];
  EXPECT_NEAR(td_loss_value(agent, {t}), (0.75 - q) * (0.75 - q), 1e-15);
}

TEST(TdLoss, EmptyBatchIsUsageError) {
  lcr::Rng rng(8);
  DqnAgent agent(AgentConfig{}, small_mlp(), rng);
  EXPECT_THROW(td_loss_value(agent, {}), lcr::UsageError);
}

TEST(TrainStep, NotReadyBelowMinimum) {
  lcr::Rng rng(9);
  AgentConfig config;
  config.min_buffer_size = 2;
  DqnAgent agent(config, small_mlp(), rng);
  lcr::replay::ReplayBuffer buffer(10, 2);
  buffer.push({obs(0, 0), 0, 0.0, obs(0, 0), false, 0, 0});
  EXPECT_FALSE(agent.train_step(buffer, rng));
  EXPECT_EQ(agent.train_steps(), 0);
}

TEST(TrainStep, LossDecreasesOnFrozenBatch) {
  lcr::Rng rng(10);
  AgentConfig config;
  config.batch_size = 1;
  config.min_buffer_size = 1;
  DqnAgent agent(config, small_mlp(), rng);
  lcr::replay::ReplayBuffer buffer(1, 1);
  buffer.push({obs(0.7, -0.4), 2, 1.5, obs(0.1, 0.2), false, 0, 0});
  double previous = *agent.train_step(buffer, rng);
  for (int step = 1; step < 100; ++step) {
    const double loss = *agent.train_step(buffer, rng);
    EXPECT_LT(loss, previous) << "step " << step;
    previous = loss;
  }
}

TEST(TrainStep, AbsorbingZeroRewardStateDrivesQToZero) {
  lcr::Rng rng(11);
  AgentConfig config;
  config.gamma = 0.9;
  config.batch_size = 1;
  config.min_buffer_size = 1;
  config.learning_rate = 1e-2;
  DqnAgent agent(config, small_mlp(2), rng);
  auto* bias = agent.online().head_parameters().back();
  bias->value.fill(3.0);
  agent.sync_target();
  const Tensor s = obs(0.5, 0.5);
  lcr::replay::ReplayBuffer both(2, 2);
  both.push({s, 0, 0.0, s, false, 0, 0});
  both.push({s, 1, 0.0, s, false, 0, 1});
  for (int step = 1; step <= 3000; ++step) {
    agent.train_step(both, rng);
    if (step % 10 == 0) agent.sync_target();
  }
  const Tensor q = agent.online().predict(lcr::agent::as_batch(s));
  EXPECT_LT(std::abs(q[0]), 0.05);
  EXPECT_LT(std::abs(q[1]), 0.05);
}

TEST(TrainStep, SameSeedSameParameters) {
  auto run = [] {
    lcr::Rng rng(12);
    DqnAgent agent(AgentConfig::classic_control_defaults(), small_mlp(), rng);
    lcr::replay::ReplayBuffer buffer(200, 100);
    for (int i = 0; i < 150; ++i)
      buffer.push({lcr::testing::random_tensor({2}, rng), lcr::uniform_int(rng, 0, 2), lcr::uniform01(rng),
                   lcr::testing::random_tensor({2}, rng), lcr::uniform01(rng) < 0.1, 0, 0});
    for (int step = 0; step < 30; ++step) agent.train_step(buffer, rng);
    std::vector<Tensor> values;
    for (auto* p : agent.online().parameters()) values.push_back(p->value);
    return values;
  };
  EXPECT_EQ(run(), run());
}

TEST(Sync, TargetTracksOnlineOnlyWhenSynced) {
  lcr::Rng rng(13);
  DqnAgent agent(AgentConfig{}, small_mlp(), rng);
  const Tensor probe = lcr::testing::random_tensor({5, 2}, rng);
  EXPECT_EQ(agent.target().predict(probe), agent.online().predict(probe));
  for (auto* p : agent.online().parameters())
    for (double& v : p->value.data()) v += 0.05;
  EXPECT_NE(agent.target().predict(probe), agent.online().predict(probe));
  agent.sync_target();
  EXPECT_EQ(agent.target().predict(probe), agent.online().predict(probe));
}

TEST(QNetwork, GridRepresentationSize) {
  lcr::Rng rng(14);
  const auto config = AgentConfig::grid_defaults();
  lcr::agent::QNetwork net(lcr::agent::network_spec_for(config, {4, 10, 10}, 3), rng);
  EXPECT_EQ(net.representation_dim(), 32u);
  EXPECT_EQ(net.num_actions(), 3u);
  const Tensor phi = net.represent(lcr::testing::random_tensor({2, 4, 10, 10}, rng));
  EXPECT_EQ(phi.shape(), (lcr::numerics::Shape{2, 32}));
  lcr::agent::QNetwork rooms(lcr::agent::network_spec_for(config, {4, 11, 11}, 3), rng);
  EXPECT_EQ(rooms.representation_dim(), 32u);
}

TEST(QNetwork, ClassicControlRepresentationIsLastHiddenLayer) {
  lcr::Rng rng(15);
  const auto config = AgentConfig::classic_control_defaults();
  lcr::agent::QNetwork net(lcr::agent::network_spec_for(config, {4}, 2), rng);
  EXPECT_EQ(net.representation_dim(), 32u);
  EXPECT_EQ(net.head_parameters().size(), 2u);
  EXPECT_THROW(lcr::agent::network_spec_for(config, {2, 2}, 2), lcr::DimensionError);
}

}  // namespace
