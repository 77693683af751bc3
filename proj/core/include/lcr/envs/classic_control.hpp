#pragma once

#include <array>

#include "lcr/envs/environment.hpp"

namespace lcr::envs {

// Cart-pole balancing with the common reference constants and explicit Euler
// integration. Actions: 0 pushes left, 1 pushes right.
class CartPole final : public Environment {
 public:
  static constexpr double gravity = 9.8;
  static constexpr double cart_mass = 1.0;
  static constexpr double pole_mass = 0.1;
  static constexpr double half_length = 0.5;
  static constexpr double force_magnitude = 10.0;
  static constexpr double tau = 0.02;
  static constexpr double x_limit = 2.4;
  static constexpr double theta_limit = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
  static constexpr int step_limit = 500;

  using State = std::array<double, 4>;  // x, x_dot, theta, theta_dot

  std::string_view name() const override { return "cartpole"; }
  Shape observation_shape() const override { return {4}; }
  int num_actions() const override { return 2; }
  int max_episode_steps() const override { return step_limit; }

  Observation reset(Rng& rng) override;
  StepResult step(int action) override;

  // Begins an episode from an explicit state.
  Observation reset_to(const State& state);
  const State& state() const noexcept { return state_; }

  struct Accelerations {
    double x;
    double theta;
  };
  static Accelerations accelerations(const State& state, double force);

 private:
  Observation observe() const;

  State state_{};
  int steps_ = 0;
  bool active_ = false;
};

// Two-link underactuated pendulum integrated with one RK4 step per action.
// Actions 0, 1, 2 apply torque -1, 0, +1 at the second joint.
class Acrobot final : public Environment {
 public:
  static constexpr double link_length1 = 1.0;
  static constexpr double link_mass1 = 1.0;
  static constexpr double link_mass2 = 1.0;
  static constexpr double link_com1 = 0.5;
  static constexpr double link_com2 = 0.5;
  static constexpr double link_moi = 1.0;
  static constexpr double gravity = 9.8;
  static constexpr double max_velocity1 = 4.0 * 3.14159265358979323846;
  static constexpr double max_velocity2 = 9.0 * 3.14159265358979323846;
  static constexpr int step_limit = 500;

  using State = std::array<double, 4>;  // theta1, theta2, theta1_dot, theta2_dot

  explicit Acrobot(double dt = 0.2) : dt_(dt) {}

  std::string_view name() const override { return "acrobot"; }
  Shape observation_shape() const override { return {6}; }
  int num_actions() const override { return 3; }
  int max_episode_steps() const override { return step_limit; }

  Observation reset(Rng& rng) override;
  StepResult step(int action) override;

  Observation reset_to(const State& state);
  const State& state() const noexcept { return state_; }
  double dt() const noexcept { return dt_; }

  // Tip above the bar: -cos(theta1) - cos(theta1 + theta2) > 1.
  static bool tip_above_bar(const State& state);
  // Time derivative of the state under constant torque.
  static State derivative(const State& state, double torque);

 private:
  Observation observe() const;

  double dt_;
  State state_{};
  int steps_ = 0;
  bool active_ = false;
};

}  // namespace lcr::envs
