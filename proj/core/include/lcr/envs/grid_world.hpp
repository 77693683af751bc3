#pragma once

#include <vector>

#include "lcr/envs/environment.hpp"

namespace lcr::envs {

enum class GridLayout { empty, four_rooms };

struct GridConfig {
  int size = 8;  // interior side length; the outer wall ring adds 2
  GridLayout layout = GridLayout::empty;

  // size >= 5, and odd for four_rooms so the dividing walls sit on the center line.
  void validate() const;
};

enum GridAction : int { turn_left = 0, turn_right = 1, forward = 2 };

// Direction order follows the usual gridworld convention: right turns go
// east -> south -> west -> north.
enum Direction : int { east = 0, south = 1, west = 2, north = 3 };

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

// Fully observable navigation task. The agent always starts in the top-left interior
// cell facing east; the goal is resampled uniformly over the remaining free cells at
// every reset. Observations are [4, side, side] planes: wall, goal, agent position,
// agent direction (value dir/3 on the agent's cell).
class GridWorld final : public Environment {
 public:
  static constexpr double step_cost = -0.01;
  static constexpr double goal_reward = 1.0;
  static constexpr int channels = 4;

  explicit GridWorld(GridConfig config);

  std::string_view name() const override;
  Shape observation_shape() const override;
  int num_actions() const override { return 3; }
  int max_episode_steps() const override { return 4 * config_.size * config_.size; }

  Observation reset(Rng& rng) override;
  StepResult step(int action) override;

  // Starts an episode with a caller-chosen goal; the agent is placed as in reset().
  Observation reset_with_goal(Cell goal);

  const GridConfig& config() const noexcept { return config_; }
  int side() const noexcept { return config_.size + 2; }
  bool is_wall(Cell c) const { return walls_[index(c)]; }
  Cell agent() const noexcept { return agent_; }
  Direction direction() const noexcept { return direction_; }
  Cell goal() const noexcept { return goal_; }
  int steps_taken() const noexcept { return steps_; }
  // Cells a goal may be placed on: free, non-wall, not the agent start.
  const std::vector<Cell>& goal_cells() const noexcept { return goal_cells_; }

  static constexpr Cell start_cell() { return {1, 1}; }

  Observation observe() const;

 private:
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y * side() + c.x); }

  GridConfig config_;
  std::vector<bool> walls_;
  std::vector<Cell> goal_cells_;
  Cell agent_{};
  Cell goal_{};
  Direction direction_ = east;
  int steps_ = 0;
  bool active_ = false;
};

}  // namespace lcr::envs
