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

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "uvip/rng.hpp"

namespace uvip {

using ActionIndex = std::size_t;
using State = std::vector<double>;
using StateView = std::span<const double>;

/// Tabular states are encoded as a single coordinate holding the index.
inline State tabular_state(std::size_t index) { return {static_cast<double>(index)}; }
inline std::size_t tabular_index(StateView x) { return static_cast<std::size_t>(x[0]); }

struct TabularSpace {
  std::size_t count = 1;
  bool operator==(const TabularSpace&) const = default;
};

struct BoxSpace {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const noexcept { return lower.size(); }
  bool contains(StateView x) const noexcept;
  bool operator==(const BoxSpace&) const = default;
};

class StateSpace {
 public:
  static StateSpace tabular(std::size_t count);
  static StateSpace box(std::vector<double> lower, std::vector<double> upper);

  bool is_tabular() const noexcept { return std::holds_alternative<TabularSpace>(space_); }
  /// Coordinates per state: 1 for tabular spaces.
  std::size_t dim() const noexcept;
  /// Number of states; only meaningful for tabular spaces.
  std::size_t count() const;
  const BoxSpace& as_box() const;
  bool contains(StateView x) const noexcept;

  bool operator==(const StateSpace&) const = default;

 private:
  explicit StateSpace(std::variant<TabularSpace, BoxSpace> s) : space_(std::move(s)) {}
  std::variant<TabularSpace, BoxSpace> space_;
};

enum class NoiseFamily { uniform, normal };

struct NoiseSpec {
  std::size_t dim = 1;
  NoiseFamily family = NoiseFamily::uniform;
  bool operator==(const NoiseSpec&) const = default;
};

void sample_noise(const NoiseSpec& noise, Stream& rng, std::span<double> out);
std::vector<double> sample_noise(const NoiseSpec& noise, Stream& rng);

class TabularMdp;

/// Reparametrized sampler: next state = step(x, a, xi) with xi drawn from
/// `noise()`. This is the only access UVIP needs to the dynamics.
class GenerativeModel {
 public:
  virtual ~GenerativeModel() = default;

  const StateSpace& states() const noexcept { return states_; }
  std::size_t action_count() const noexcept { return actions_; }
  const NoiseSpec& noise() const noexcept { return noise_; }
  double gamma() const noexcept { return gamma_; }
  double r_max() const noexcept { return r_max_; }
  const std::string& name() const noexcept { return name_; }
  std::size_t state_dim() const noexcept { return states_.dim(); }

  /// Unchecked transition; `out` has state_dim() entries and may not alias x.
  virtual void step(StateView x, ActionIndex a, std::span<const double> xi,
                    std::span<double> out) const = 0;
  virtual double reward(StateView x, ActionIndex a) const = 0;

  /// Absorbing zero-reward states. Every value function vanishes there.
  virtual bool is_terminal(StateView) const { return false; }

  /// Draw for design sets; uniform on the box (or on the indices) by default.
  virtual State sample_state(Stream& rng) const;
  /// Episode start distribution; defaults to sample_state.
  virtual State initial_state(Stream& rng) const { return sample_state(rng); }

  /// The exact kernel, when the model was built from one.
  virtual const TabularMdp* tabular() const noexcept { return nullptr; }

 protected:
  GenerativeModel(std::string name, StateSpace states, std::size_t actions, NoiseSpec noise,
                  double gamma, double r_max);

 private:
  std::string name_;
  StateSpace states_;
  std::size_t actions_;
  NoiseSpec noise_;
  double gamma_;
  double r_max_;
};

/// Checked transition: validates the action index and noise dimension.
State transition(const GenerativeModel& m, StateView x, ActionIndex a,
                 std::span<const double> xi);

/// Dense array indexed (x, a): Q tables, kernel products, rewards.
class ActionValues {
 public:
  ActionValues() = default;
  ActionValues(std::size_t n_states, std::size_t n_actions, double fill = 0.0)
      : n_states_(n_states), n_actions_(n_actions), data_(n_states * n_actions, fill) {}

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }
  double& operator()(std::size_t x, ActionIndex a) { return data_[x * n_actions_ + a]; }
  double operator()(std::size_t x, ActionIndex a) const { return data_[x * n_actions_ + a]; }
  std::span<const double> row(std::size_t x) const {
    return {data_.data() + x * n_actions_, n_actions_};
  }
  const std::vector<double>& data() const noexcept { return data_; }

  bool operator==(const ActionValues&) const = default;

 private:
  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
  std::vector<double> data_;
};

using QTable = ActionValues;

/// Explicit kernel P(y | x, a), rewards r(x, a) and discount.
class TabularMdp {
 public:
  TabularMdp() = default;
  TabularMdp(std::size_t n_states, std::size_t n_actions, double gamma);

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }
  double gamma() const noexcept { return gamma_; }

  double& p(std::size_t x, ActionIndex a, std::size_t y) { return kernel_[index(x, a) + y]; }
  double p(std::size_t x, ActionIndex a, std::size_t y) const { return kernel_[index(x, a) + y]; }
  std::span<const double> row(std::size_t x, ActionIndex a) const {
    return {kernel_.data() + index(x, a), n_states_};
  }
  std::span<double> row(std::size_t x, ActionIndex a) {
    return {kernel_.data() + index(x, a), n_states_};
  }

  double& reward(std::size_t x, ActionIndex a) { return reward_[x * n_actions_ + a]; }
  double reward(std::size_t x, ActionIndex a) const { return reward_[x * n_actions_ + a]; }

  /// max |r(x, a)|.
  double r_max() const noexcept;

  /// Absorbing with zero reward under every action.
  bool is_terminal(std::size_t x) const;

  std::optional<std::size_t> start_state;

  bool operator==(const TabularMdp&) const = default;

 private:
  std::size_t index(std::size_t x, ActionIndex a) const noexcept {
    return (x * n_actions_ + a) * n_states_;
  }

  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
  double gamma_ = 0.0;
  std::vector<double> kernel_;
  std::vector<double> reward_;
};

struct RowViolation {
  std::size_t state;
  ActionIndex action;
  double sum;
  bool has_negative;
};

/// Every row whose mass deviates from 1 by more than `tol` or holds negatives.
std::vector<RowViolation> validate_tabular(const TabularMdp& m, double tol = 1e-12);

/// Entry (x, a) = sum_y P(y | x, a) v(y).
ActionValues kernel_apply(const TabularMdp& m, std::span<const double> v);

enum class TabularSampling {
  /// One uniform scalar per draw, shared by every action (common random numbers).
  shared,
  /// One uniform per action; noise dimension equals the action count.
  per_action,
};

/// Inverse-CDF sampler over the exact kernel. `r_max` defaults to the largest
/// |reward| in the table; a declared bound may be looser, never tighter.
std::shared_ptr<const GenerativeModel> tabular_to_generative(
    const TabularMdp& m, TabularSampling sampling = TabularSampling::shared,
    std::string name = "tabular", std::optional<double> r_max = std::nullopt);

}  // namespace uvip
