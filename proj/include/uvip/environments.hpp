// Copyright 2026 The UVIP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <memory>

#include "uvip/mdp.hpp"

namespace uvip {

/// Two states, two deterministic actions: a0 stays at 0 with reward 0, a1
/// moves to 1 with reward 1. With gamma = 0.5 the optimal value is 2
/// everywhere and always-a0 is worth 0.
TabularMdp make_toy(double gamma = 0.5);

struct GarnetSpec {
  std::size_t n_states = 20;
  std::size_t n_actions = 5;
  std::size_t branching = 2;
  std::uint64_t seed = 0;
  double boost_fraction = 0.1;
  double boost_factor = 5.0;
  double gamma = 0.9;
  bool operator==(const GarnetSpec&) const = default;
};

/// Random kernel with exactly `branching` successors per (x, a) and
/// Dirichlet(1, ..., 1) weights. Rewards are uniform on [0, 1]; a
/// `boost_fraction` of the pairs is then multiplied by `boost_factor`.
TabularMdp make_garnet(const GarnetSpec& spec);
double garnet_r_max(const GarnetSpec& spec);

struct ChainSpec {
  std::size_t length = 10;
  double noise_p = 0.1;
  double terminal_reward = 10.0;
  double step_reward = 1.0;
  double gamma = 0.8;
  bool operator==(const ChainSpec&) const = default;
};

namespace chain_action {
inline constexpr ActionIndex left = 0;
inline constexpr ActionIndex right = 1;
}  // namespace chain_action

/// States 0 and length-1 are absorbing ends. With probability noise_p the
/// chosen action is replaced by a uniformly random one. Entering an end pays
/// terminal_reward, any other move pays step_reward.
TabularMdp make_chain(const ChainSpec& spec);

struct FrozenLakeSpec {
  double gamma = 0.9;
  double goal_reward = 10.0;
  bool operator==(const FrozenLakeSpec&) const = default;
};

namespace lake_action {
inline constexpr ActionIndex left = 0;
inline constexpr ActionIndex down = 1;
inline constexpr ActionIndex right = 2;
inline constexpr ActionIndex up = 3;
}  // namespace lake_action

/// The 4x4 map
///   SFFF / FHFH / FFFH / HFFG
/// with slippery moves: the intended direction and both perpendicular ones
/// each happen with probability 1/3, moves into a wall stay put.
TabularMdp make_frozen_lake(const FrozenLakeSpec& spec = {});

struct CartPoleSpec {
  double gravity = 9.8;
  double mass_cart = 1.0;
  double mass_pole = 0.1;
  double half_length = 0.5;
  double force_mag = 10.0;
  double tau = 0.02;
  double angle_noise_std = 0.05;
  double x_threshold = 2.4;
  double theta_threshold = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
  double velocity_limit = 3.0;
  double angular_velocity_limit = 3.5;
  double gamma = 0.9;
  bool operator==(const CartPoleSpec&) const = default;
};

namespace cartpole_action {
inline constexpr ActionIndex push_left = 0;
inline constexpr ActionIndex push_right = 1;
}  // namespace cartpole_action

/// State layout: (position, velocity, angle, angular velocity). Explicit
/// Euler step of length `tau`, then the angle is perturbed by N(0, std^2).
/// States at or beyond the position/angle thresholds are terminal; all
/// coordinates are clamped into the declared box.
class CartPoleModel final : public GenerativeModel {
 public:
  explicit CartPoleModel(const CartPoleSpec& spec);

  void step(StateView x, ActionIndex a, std::span<const double> xi,
            std::span<double> out) const override;
  double reward(StateView x, ActionIndex a) const override;
  bool is_terminal(StateView x) const override;
  State initial_state(Stream& rng) const override;

  const CartPoleSpec& spec() const noexcept { return spec_; }

 private:
  CartPoleSpec spec_;
};

std::shared_ptr<const GenerativeModel> make_cartpole(const CartPoleSpec& spec = {});

struct AcrobotSpec {
  double link_length_1 = 1.0;
  double link_mass_1 = 1.0;
  double link_mass_2 = 1.0;
  double link_com_1 = 0.5;
  double link_com_2 = 0.5;
  double link_moi = 1.0;
  double gravity = 9.8;
  double dt = 0.2;
  double torque_noise = 1.0;
  double gamma = 0.9;
  bool operator==(const AcrobotSpec&) const = default;
};

/// Observation layout: (cos t1, sin t1, cos t2, sin t2, dt1, dt2). Actions
/// map to torques {-1, 0, +1}; uniform noise on [-torque_noise,
/// torque_noise] is added to the torque each step. One RK4 step of length
/// `dt` per transition. Reward -1 until the tip rises above the bar, where
/// the state becomes absorbing with reward 0.
class AcrobotModel final : public GenerativeModel {
 public:
  static constexpr double max_velocity_1 = 4.0 * 3.14159265358979323846;
  static constexpr double max_velocity_2 = 9.0 * 3.14159265358979323846;

  explicit AcrobotModel(const AcrobotSpec& spec);

  void step(StateView x, ActionIndex a, std::span<const double> xi,
            std::span<double> out) const override;
  double reward(StateView x, ActionIndex a) const override;
  bool is_terminal(StateView x) const override;
  State sample_state(Stream& rng) const override;
  State initial_state(Stream& rng) const override;

  /// Torque entering the dynamics for action a and uniform draw xi in [0, 1).
  double applied_torque(ActionIndex a, double xi) const noexcept;

  const AcrobotSpec& spec() const noexcept { return spec_; }

 private:
  AcrobotSpec spec_;
};

std::shared_ptr<const GenerativeModel> make_acrobot(const AcrobotSpec& spec = {});

}  // namespace uvip
