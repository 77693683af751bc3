#include "lcr/envs/grid_world.hpp"

#include "lcr/errors.hpp"

namespace lcr::envs {

void GridConfig::validate() const {
  if (size < 5) throw ConfigError("grid size must be at least 5, got " + std::to_string(size));
  if (layout == GridLayout::four_rooms && size % 2 == 0) {
    throw ConfigError("four_rooms needs an odd grid size, got " + std::to_string(size));
  }
}

GridWorld::GridWorld(GridConfig config) : config_(config) {
  config_.validate();
  const int n = side();
  walls_.assign(static_cast<std::size_t>(n * n), false);
  for (int i = 0; i < n; ++i) {
    walls_[index({i, 0})] = walls_[index({i, n - 1})] = true;
    walls_[index({0, i})] = walls_[index({n - 1, i})] = true;
  }
  if (config_.layout == GridLayout::four_rooms) {
    // Interior cells are 1..size; the dividing walls run along the center line with one
    // doorway in the middle of each room's side.
    const int center = (config_.size + 1) / 2;
    const int door_low = center / 2;
    const int door_high = (center + 1 + config_.size) / 2;
    for (int i = 1; i <= config_.size; ++i) {
      if (i != door_low && i != door_high) {
        walls_[index({center, i})] = true;
        walls_[index({i, center})] = true;
      }
    }
    walls_[index({center, center})] = true;
  }
  for (int y = 1; y <= config_.size; ++y) {
    for (int x = 1; x <= config_.size; ++x) {
      const Cell c{x, y};
      if (!is_wall(c) && c != start_cell()) goal_cells_.push_back(c);
    }
  }
}

std::string_view GridWorld::name() const {
  return config_.layout == GridLayout::empty ? "random_goal" : "four_rooms";
}

Shape GridWorld::observation_shape() const {
  const auto n = static_cast<std::size_t>(side());
  return {static_cast<std::size_t>(channels), n, n};
}

Observation GridWorld::reset(Rng& rng) {
  const int pick = uniform_int(rng, 0, static_cast<int>(goal_cells_.size()) - 1);
  return reset_with_goal(goal_cells_[static_cast<std::size_t>(pick)]);
}

Observation GridWorld::reset_with_goal(Cell goal) {
  if (goal.x < 1 || goal.y < 1 || goal.x > config_.size || goal.y > config_.size || is_wall(goal) ||
      goal == start_cell()) {
    throw UsageError("goal must be a free interior cell other than the start");
  }
  agent_ = start_cell();
  direction_ = east;
  goal_ = goal;
  steps_ = 0;
  active_ = true;
  return observe();
}

StepResult GridWorld::step(int action) {
  if (!active_) throw UsageError("GridWorld::step called without an active episode");
  switch (action) {
    case turn_left: direction_ = static_cast<Direction>((direction_ + 3) % 4); break;
    case turn_right: direction_ = static_cast<Direction>((direction_ + 1) % 4); break;
    case forward: {
      static constexpr int dx[] = {1, 0, -1, 0};
      static constexpr int dy[] = {0, 1, 0, -1};
      const Cell next{agent_.x + dx[direction_], agent_.y + dy[direction_]};
      if (!is_wall(next)) agent_ = next;
      break;
    }
    default: throw UsageError("GridWorld action must be 0, 1 or 2, got " + std::to_string(action));
  }
  ++steps_;
  StepResult result;
  result.reward = step_cost;
  if (agent_ == goal_) {
    result.reward += goal_reward;
    result.terminated = true;
  } else if (steps_ >= max_episode_steps()) {
    result.truncated = true;
  }
  active_ = !result.done();
  result.observation = observe();
  return result;
}

Observation GridWorld::observe() const {
  const auto n = static_cast<std::size_t>(side());
  Observation obs(observation_shape());
  const std::size_t plane = n * n;
  for (std::size_t i = 0; i < plane; ++i) obs[i] = walls_[i] ? 1.0 : 0.0;
  obs[plane + index(goal_)] = 1.0;
  obs[2 * plane + index(agent_)] = 1.0;
  obs[3 * plane + index(agent_)] = static_cast<double>(direction_) / 3.0;
  return obs;
}

}  // namespace lcr::envs
