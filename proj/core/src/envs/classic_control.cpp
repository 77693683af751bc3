#include "lcr/envs/classic_control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lcr/errors.hpp"

namespace lcr::envs {

namespace {
template <std::size_t N>
std::array<double, N> uniform_state(Rng& rng, double bound) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::array<double, N> s{};
  for (double& v : s) v = dist(rng);
  return s;
}
}  // namespace

CartPole::Accelerations CartPole::accelerations(const State& s, double force) {
  const double total_mass = cart_mass + pole_mass;
  const double pole_mass_length = pole_mass * half_length;
  const double cos_t = std::cos(s[2]);
  const double sin_t = std::sin(s[2]);
  const double temp = (force + pole_mass_length * s[3] * s[3] * sin_t) / total_mass;
  const double theta_acc =
      (gravity * sin_t - cos_t * temp) / (half_length * (4.0 / 3.0 - pole_mass * cos_t * cos_t / total_mass));
  const double x_acc = temp - pole_mass_length * theta_acc * cos_t / total_mass;
  return {x_acc, theta_acc};
}

Observation CartPole::reset(Rng& rng) { return reset_to(uniform_state<4>(rng, 0.05)); }

Observation CartPole::reset_to(const State& state) {
  state_ = state;
  steps_ = 0;
  active_ = true;
  return observe();
}

StepResult CartPole::step(int action) {
  if (!active_) throw UsageError("CartPole::step called without an active episode");
  if (action != 0 && action != 1) throw UsageError("CartPole action must be 0 or 1, got " + std::to_string(action));
  const double force = action == 1 ? force_magnitude : -force_magnitude;
  const Accelerations acc = accelerations(state_, force);
  state_[0] += tau * state_[1];
  state_[1] += tau * acc.x;
  state_[2] += tau * state_[3];
  state_[3] += tau * acc.theta;
  ++steps_;

  StepResult result;
  result.reward = 1.0;
  result.terminated = state_[0] < -x_limit || state_[0] > x_limit || state_[2] < -theta_limit || state_[2] > theta_limit;
  result.truncated = !result.terminated && steps_ >= step_limit;
  active_ = !result.done();
  result.observation = observe();
  return result;
}

Observation CartPole::observe() const { return Observation({4}, {state_.begin(), state_.end()}); }

Acrobot::State Acrobot::derivative(const State& s, double torque) {
  constexpr double m1 = link_mass1, m2 = link_mass2, l1 = link_length1;
  constexpr double lc1 = link_com1, lc2 = link_com2, i1 = link_moi, i2 = link_moi, g = gravity;
  constexpr double half_pi = std::numbers::pi / 2.0;
  const double theta1 = s[0], theta2 = s[1], dtheta1 = s[2], dtheta2 = s[3];
  const double d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * std::cos(theta2)) + i1 + i2;
  const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(theta2)) + i2;
  const double phi2 = m2 * lc2 * g * std::cos(theta1 + theta2 - half_pi);
  const double phi1 = -m2 * l1 * lc2 * dtheta2 * dtheta2 * std::sin(theta2) -
                      2.0 * m2 * l1 * lc2 * dtheta2 * dtheta1 * std::sin(theta2) +
                      (m1 * lc1 + m2 * l1) * g * std::cos(theta1 - half_pi) + phi2;
  const double ddtheta2 =
      (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1 * dtheta1 * std::sin(theta2) - phi2) /
      (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
  const double ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
  return {dtheta1, dtheta2, ddtheta1, ddtheta2};
}

bool Acrobot::tip_above_bar(const State& s) { return -std::cos(s[0]) - std::cos(s[1] + s[0]) > 1.0; }

Observation Acrobot::reset(Rng& rng) { return reset_to(uniform_state<4>(rng, 0.1)); }

Observation Acrobot::reset_to(const State& state) {
  state_ = state;
  steps_ = 0;
  active_ = true;
  return observe();
}

StepResult Acrobot::step(int action) {
  if (!active_) throw UsageError("Acrobot::step called without an active episode");
  if (action < 0 || action > 2) throw UsageError("Acrobot action must be 0, 1 or 2, got " + std::to_string(action));
  const double torque = static_cast<double>(action - 1);

  auto shifted = [](const State& s, const State& d, double h) {
    State out;
    for (std::size_t i = 0; i < 4; ++i) out[i] = s[i] + h * d[i];
    return out;
  };
  const State k1 = derivative(state_, torque);
  const State k2 = derivative(shifted(state_, k1, dt_ / 2.0), torque);
  const State k3 = derivative(shifted(state_, k2, dt_ / 2.0), torque);
  const State k4 = derivative(shifted(state_, k3, dt_), torque);
  for (std::size_t i = 0; i < 4; ++i) state_[i] += dt_ / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

  auto wrap = [](double angle) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    while (angle > std::numbers::pi) angle -= two_pi;
    while (angle < -std::numbers::pi) angle += two_pi;
    return angle;
  };
  state_[0] = wrap(state_[0]);
  state_[1] = wrap(state_[1]);
  state_[2] = std::clamp(state_[2], -max_velocity1, max_velocity1);
  state_[3] = std::clamp(state_[3], -max_velocity2, max_velocity2);
  ++steps_;

  StepResult result;
  result.reward = -1.0;
  result.terminated = tip_above_bar(state_);
  result.truncated = !result.terminated && steps_ >= step_limit;
  active_ = !result.done();
  result.observation = observe();
  return result;
}

Observation Acrobot::observe() const {
  return Observation({6}, {std::cos(state_[0]), std::sin(state_[0]), std::cos(state_[1]), std::sin(state_[1]),
                           state_[2], state_[3]});
}

}  // namespace lcr::envs
