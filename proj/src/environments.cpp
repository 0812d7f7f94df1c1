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

#include "uvip/environments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/core.h>

#include "uvip/error.hpp"

namespace uvip {

TabularMdp make_toy(double gamma) {
  TabularMdp m(2, 2, gamma);
  for (std::size_t x = 0; x < 2; ++x) {
    m.p(x, 0, 0) = 1.0;
    m.p(x, 1, 1) = 1.0;
    m.reward(x, 0) = 0.0;
    m.reward(x, 1) = 1.0;
  }
  return m;
}

TabularMdp make_garnet(const GarnetSpec& spec) {
  require(spec.n_states >= 1 && spec.n_actions >= 1 && spec.branching >= 1,
          ErrorCode::invalid_argument, "garnet sizes must be positive");
  if (spec.branching > spec.n_states)
    fail(ErrorCode::invalid_argument,
         fmt::format("garnet branching {} exceeds state count {}", spec.branching, spec.n_states));
  require(spec.boost_fraction >= 0.0 && spec.boost_fraction <= 1.0,
          ErrorCode::invalid_argument, "garnet boost_fraction must lie in [0, 1]");
  require(spec.boost_factor >= 1.0, ErrorCode::invalid_argument,
          "garnet boost_factor must be >= 1");

  TabularMdp m(spec.n_states, spec.n_actions, spec.gamma);
  Stream rng(spec.seed, {stream_tag::environment, 0x4741524EULL});

  std::vector<std::size_t> pool(spec.n_states);
  std::vector<double> weights(spec.branching);
  for (std::size_t x = 0; x < spec.n_states; ++x) {
    for (ActionIndex a = 0; a < spec.n_actions; ++a) {
      // Partial Fisher-Yates for distinct successors.
      std::iota(pool.begin(), pool.end(), 0);
      for (std::size_t k = 0; k < spec.branching; ++k) {
        const std::size_t j = k + rng.below(spec.n_states - k);
        std::swap(pool[k], pool[j]);
      }
      // Dirichlet(1, ..., 1) via normalized unit exponentials.
      double total = 0.0;
      for (auto& w : weights) {
        w = -std::log(1.0 - rng.uniform());
        if (w <= 0.0) w = 0x1.0p-53;
        total += w;
      }
      auto row = m.row(x, a);
      double assigned = 0.0;
      for (std::size_t k = 0; k + 1 < spec.branching; ++k) {
        row[pool[k]] = weights[k] / total;
        assigned += row[pool[k]];
      }
      row[pool[spec.branching - 1]] = 1.0 - assigned;
      m.reward(x, a) = rng.uniform();
    }
  }

  const std::size_t pairs = spec.n_states * spec.n_actions;
  const auto boosted =
      static_cast<std::size_t>(std::llround(spec.boost_fraction * static_cast<double>(pairs)));
  std::vector<std::size_t> order(pairs);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t k = 0; k < boosted; ++k) {
    const std::size_t j = k + rng.below(pairs - k);
    std::swap(order[k], order[j]);
    m.reward(order[k] / spec.n_actions, order[k] % spec.n_actions) *= spec.boost_factor;
  }
  return m;
}

double garnet_r_max(const GarnetSpec& spec) { return spec.boost_factor; }

TabularMdp make_chain(const ChainSpec& spec) {
  require(spec.length >= 3, ErrorCode::invalid_argument, "chain length must be >= 3");
  require(spec.noise_p >= 0.0 && spec.noise_p < 1.0, ErrorCode::invalid_argument,
          "chain noise_p must lie in [0, 1)");
  const std::size_t n = spec.length;
  TabularMdp m(n, 2, spec.gamma);
  auto pays = [&](std::size_t y) {
    return (y == 0 || y == n - 1) ? spec.terminal_reward : spec.step_reward;
  };
  for (ActionIndex a = 0; a < 2; ++a) {
    m.p(0, a, 0) = 1.0;
    m.p(n - 1, a, n - 1) = 1.0;
  }
  for (std::size_t x = 1; x + 1 < n; ++x) {
    for (ActionIndex a = 0; a < 2; ++a) {
      const double p_right =
          (a == chain_action::right ? 1.0 - spec.noise_p : 0.0) + 0.5 * spec.noise_p;
      const double p_left = 1.0 - p_right;
      m.p(x, a, x + 1) += p_right;
      m.p(x, a, x - 1) += p_left;
      m.reward(x, a) = p_right * pays(x + 1) + p_left * pays(x - 1);
    }
  }
  return m;
}

TabularMdp make_frozen_lake(const FrozenLakeSpec& spec) {
  static constexpr std::array<const char*, 4> map = {"SFFF", "FHFH", "FFFH", "HFFG"};
  constexpr int size = 4;
  TabularMdp m(size * size, 4, spec.gamma);
  m.start_state = 0;

  auto absorbing = [&](int r, int c) { return map[r][c] == 'H' || map[r][c] == 'G'; };
  // Offsets for left, down, right, up.
  static constexpr std::array<int, 4> dr = {0, 1, 0, -1};
  static constexpr std::array<int, 4> dc = {-1, 0, 1, 0};

  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const std::size_t x = static_cast<std::size_t>(r * size + c);
      for (ActionIndex a = 0; a < 4; ++a) {
        if (absorbing(r, c)) {
          m.p(x, a, x) = 1.0;
          continue;
        }
        double goal_mass = 0.0;
        for (int turn : {-1, 0, 1}) {
          const auto dir = static_cast<std::size_t>((static_cast<int>(a) + turn + 4) % 4);
          const int nr = std::clamp(r + dr[dir], 0, size - 1);
          const int nc = std::clamp(c + dc[dir], 0, size - 1);
          const std::size_t y = static_cast<std::size_t>(nr * size + nc);
          m.p(x, a, y) += 1.0 / 3.0;
          if (map[nr][nc] == 'G') goal_mass += 1.0 / 3.0;
        }
        m.reward(x, a) = goal_mass * spec.goal_reward;
      }
    }
  }
  // Rows built from three 1/3 atoms can miss 1 by one ulp; renormalize.
  for (std::size_t x = 0; x < m.n_states(); ++x)
    for (ActionIndex a = 0; a < 4; ++a) {
      auto row = m.row(x, a);
      const double sum = std::accumulate(row.begin(), row.end(), 0.0);
      for (double& p : row) p /= sum;
    }
  return m;
}

// ---------------------------------------------------------------------------
// CartPole

CartPoleModel::CartPoleModel(const CartPoleSpec& spec)
    : GenerativeModel("cartpole",
                      StateSpace::box({-spec.x_threshold, -spec.velocity_limit,
                                       -spec.theta_threshold, -spec.angular_velocity_limit},
                                      {spec.x_threshold, spec.velocity_limit,
                                       spec.theta_threshold, spec.angular_velocity_limit}),
                      2, NoiseSpec{1, NoiseFamily::normal}, spec.gamma, 1.0),
      spec_(spec) {
  require(spec.tau > 0.0, ErrorCode::invalid_argument, "cartpole timestep must be positive");
  require(spec.angle_noise_std >= 0.0, ErrorCode::invalid_argument,
          "cartpole angle noise std must be nonnegative");
}

bool CartPoleModel::is_terminal(StateView x) const {
  return std::abs(x[0]) >= spec_.x_threshold || std::abs(x[2]) >= spec_.theta_threshold;
}

double CartPoleModel::reward(StateView x, ActionIndex) const { return is_terminal(x) ? 0.0 : 1.0; }

void CartPoleModel::step(StateView x, ActionIndex a, std::span<const double> xi,
                         std::span<double> out) const {
  if (is_terminal(x)) {
    std::copy(x.begin(), x.end(), out.begin());
    return;
  }
  const double pos = x[0], vel = x[1], theta = x[2], omega = x[3];
  const double force = a == cartpole_action::push_right ? spec_.force_mag : -spec_.force_mag;
  const double total_mass = spec_.mass_cart + spec_.mass_pole;
  const double pole_ml = spec_.mass_pole * spec_.half_length;
  const double cos_t = std::cos(theta), sin_t = std::sin(theta);
  const double temp = (force + pole_ml * omega * omega * sin_t) / total_mass;
  const double theta_acc =
      (spec_.gravity * sin_t - cos_t * temp) /
      (spec_.half_length * (4.0 / 3.0 - spec_.mass_pole * cos_t * cos_t / total_mass));
  const double x_acc = temp - pole_ml * theta_acc * cos_t / total_mass;

  const BoxSpace& box = states().as_box();
  out[0] = std::clamp(pos + spec_.tau * vel, box.lower[0], box.upper[0]);
  out[1] = std::clamp(vel + spec_.tau * x_acc, box.lower[1], box.upper[1]);
  out[2] = std::clamp(theta + spec_.tau * omega + spec_.angle_noise_std * xi[0], box.lower[2],
                      box.upper[2]);
  out[3] = std::clamp(omega + spec_.tau * theta_acc, box.lower[3], box.upper[3]);
}

State CartPoleModel::initial_state(Stream& rng) const {
  State x(4);
  for (double& v : x) v = -0.05 + 0.1 * rng.uniform();
  return x;
}

std::shared_ptr<const GenerativeModel> make_cartpole(const CartPoleSpec& spec) {
  return std::make_shared<CartPoleModel>(spec);
}

// ---------------------------------------------------------------------------
// Acrobot

namespace {

using Vec4 = std::array<double, 4>;

double wrap_angle(double t) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  t = std::fmod(t + std::numbers::pi, two_pi);
  if (t < 0.0) t += two_pi;
  return t - std::numbers::pi;
}

Vec4 acrobot_derivative(const AcrobotSpec& s, const Vec4& q, double torque) {
  const double m1 = s.link_mass_1, m2 = s.link_mass_2;
  const double l1 = s.link_length_1, lc1 = s.link_com_1, lc2 = s.link_com_2;
  const double i1 = s.link_moi, i2 = s.link_moi, g = s.gravity;
  const double t1 = q[0], t2 = q[1], dt1 = q[2], dt2 = q[3];
  const double half_pi = std::numbers::pi / 2.0;

  const double d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * std::cos(t2)) + i1 + i2;
  const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(t2)) + i2;
  const double phi2 = m2 * lc2 * g * std::cos(t1 + t2 - half_pi);
  const double phi1 = -m2 * l1 * lc2 * dt2 * dt2 * std::sin(t2) -
                      2.0 * m2 * l1 * lc2 * dt2 * dt1 * std::sin(t2) +
                      (m1 * lc1 + m2 * l1) * g * std::cos(t1 - half_pi) + phi2;
  const double ddt2 = (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dt1 * dt1 * std::sin(t2) - phi2) /
                      (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
  const double ddt1 = -(d2 * ddt2 + phi1) / d1;
  return {dt1, dt2, ddt1, ddt2};
}

State encode_acrobot(const Vec4& q) {
  return {std::cos(q[0]), std::sin(q[0]), std::cos(q[1]), std::sin(q[1]), q[2], q[3]};
}

}  // namespace

AcrobotModel::AcrobotModel(const AcrobotSpec& spec)
    : GenerativeModel("acrobot",
                      StateSpace::box({-1.0, -1.0, -1.0, -1.0, -max_velocity_1, -max_velocity_2},
                                      {1.0, 1.0, 1.0, 1.0, max_velocity_1, max_velocity_2}),
                      3, NoiseSpec{1, NoiseFamily::uniform}, spec.gamma, 1.0),
      spec_(spec) {
  require(spec.dt > 0.0, ErrorCode::invalid_argument, "acrobot timestep must be positive");
  require(spec.torque_noise >= 0.0, ErrorCode::invalid_argument,
          "acrobot torque noise must be nonnegative");
}

double AcrobotModel::applied_torque(ActionIndex a, double xi) const noexcept {
  return static_cast<double>(a) - 1.0 + spec_.torque_noise * (2.0 * xi - 1.0);
}

bool AcrobotModel::is_terminal(StateView x) const {
  // -cos(t1) - cos(t1 + t2) > 1
  const double cos_sum = x[0] * x[2] - x[1] * x[3];
  return -x[0] - cos_sum > 1.0;
}

double AcrobotModel::reward(StateView x, ActionIndex) const { return is_terminal(x) ? 0.0 : -1.0; }

void AcrobotModel::step(StateView x, ActionIndex a, std::span<const double> xi,
                        std::span<double> out) const {
  if (is_terminal(x)) {
    std::copy(x.begin(), x.end(), out.begin());
    return;
  }
  const double torque = applied_torque(a, xi[0]);
  const Vec4 q0 = {std::atan2(x[1], x[0]), std::atan2(x[3], x[2]), x[4], x[5]};
  const double h = spec_.dt;
  auto shifted = [](const Vec4& q, const Vec4& k, double scale) {
    return Vec4{q[0] + scale * k[0], q[1] + scale * k[1], q[2] + scale * k[2], q[3] + scale * k[3]};
  };
  const Vec4 k1 = acrobot_derivative(spec_, q0, torque);
  const Vec4 k2 = acrobot_derivative(spec_, shifted(q0, k1, h / 2.0), torque);
  const Vec4 k3 = acrobot_derivative(spec_, shifted(q0, k2, h / 2.0), torque);
  const Vec4 k4 = acrobot_derivative(spec_, shifted(q0, k3, h), torque);
  Vec4 q;
  for (std::size_t i = 0; i < 4; ++i) q[i] = q0[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  q[0] = wrap_angle(q[0]);
  q[1] = wrap_angle(q[1]);
  q[2] = std::clamp(q[2], -max_velocity_1, max_velocity_1);
  q[3] = std::clamp(q[3], -max_velocity_2, max_velocity_2);
  const State next = encode_acrobot(q);
  std::copy(next.begin(), next.end(), out.begin());
}

State AcrobotModel::sample_state(Stream& rng) const {
  const Vec4 q = {std::numbers::pi * (2.0 * rng.uniform() - 1.0),
                  std::numbers::pi * (2.0 * rng.uniform() - 1.0),
                  max_velocity_1 * (2.0 * rng.uniform() - 1.0),
                  max_velocity_2 * (2.0 * rng.uniform() - 1.0)};
  return encode_acrobot(q);
}

State AcrobotModel::initial_state(Stream& rng) const {
  Vec4 q;
  for (double& v : q) v = -0.1 + 0.2 * rng.uniform();
  return encode_acrobot(q);
}

std::shared_ptr<const GenerativeModel> make_acrobot(const AcrobotSpec& spec) {
  return std::make_shared<AcrobotModel>(spec);
}

}  // namespace uvip
