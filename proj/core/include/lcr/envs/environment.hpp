#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "lcr/numerics/random.hpp"
#include "lcr/numerics/tensor.hpp"

namespace lcr::envs {

using numerics::Shape;
using numerics::Tensor;
using Observation = Tensor;

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool terminated = false;  // goal reached or failure state
  bool truncated = false;   // step limit hit without termination
  bool done() const noexcept { return terminated || truncated; }
};

// Episodic, discrete-action environment. All randomness is drawn from the Rng passed
// to reset(); step() is deterministic given the state.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string_view name() const = 0;
  virtual Shape observation_shape() const = 0;
  virtual int num_actions() const = 0;
  virtual int max_episode_steps() const = 0;

  virtual Observation reset(Rng& rng) = 0;
  // Throws UsageError when called before reset() or after the episode ended.
  virtual StepResult step(int action) = 0;
};

struct EnvConfig {
  std::string name = "random_goal";
  // Interior side length for grid environments; 0 selects the per-environment default.
  int grid_size = 0;

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

bool is_grid_environment(std::string_view name);
bool is_known_environment(std::string_view name);
std::unique_ptr<Environment> make_environment(const EnvConfig& config);

}  // namespace lcr::envs
