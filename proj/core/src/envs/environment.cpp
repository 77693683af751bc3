#include "lcr/envs/environment.hpp"

#include "lcr/envs/classic_control.hpp"
#include "lcr/envs/grid_world.hpp"
#include "lcr/errors.hpp"

namespace lcr::envs {

bool is_grid_environment(std::string_view name) { return name == "random_goal" || name == "four_rooms"; }

bool is_known_environment(std::string_view name) {
  return is_grid_environment(name) || name == "cartpole" || name == "acrobot";
}

std::unique_ptr<Environment> make_environment(const EnvConfig& config) {
  if (config.name == "random_goal") {
    return std::make_unique<GridWorld>(GridConfig{config.grid_size > 0 ? config.grid_size : 8, GridLayout::empty});
  }
  if (config.name == "four_rooms") {
    return std::make_unique<GridWorld>(
        GridConfig{config.grid_size > 0 ? config.grid_size : 9, GridLayout::four_rooms});
  }
  if (config.name == "cartpole") return std::make_unique<CartPole>();
  if (config.name == "acrobot") return std::make_unique<Acrobot>();
  throw ConfigError("unknown environment '" + config.name +
                    "' (expected random_goal, four_rooms, cartpole or acrobot)");
}

}  // namespace lcr::envs
