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
#include <optional>
#include <vector>

#include "uvip/mdp.hpp"
#include "uvip/policy.hpp"

namespace uvip {

struct ValueIterationOptions {
  double eps = 1e-10;
  /// Starting point; zero when empty.
  std::vector<double> initial;
  /// Iteration indices k whose (V_k, Q_k) are returned. Q_k is the table
  /// computed from V_{k-1}, so snapshot 1 is the reward table when starting
  /// from zero.
  std::vector<std::size_t> snapshot_at;
  /// Keep every V_k (for contraction diagnostics).
  bool keep_history = false;
  std::size_t max_iterations = 1'000'000;
};

struct ValueSnapshot {
  std::size_t k;
  std::vector<double> values;
  QTable q;
};

struct ValueIterationResult {
  std::vector<double> values;
  QTable q;
  /// Number of Bellman updates performed.
  std::size_t iterations = 0;
  std::vector<ValueSnapshot> snapshots;
  /// V_0, V_1, ..., V_iterations when keep_history is set.
  std::vector<std::vector<double>> history;
};

/// Repeats V_k = max_a { r + gamma P^a V_{k-1} } until the sup-norm change
/// drops to eps.
ValueIterationResult value_iteration(const TabularMdp& m, const ValueIterationOptions& opts = {});

/// Q(x, a) = r(x, a) + gamma (P^a v)(x).
QTable bellman_q(const TabularMdp& m, std::span<const double> v);

/// Lowest-index argmax per state.
Policy greedy_policy(const QTable& q);

/// Solves V = r_pi + gamma P_pi V. Dense partial-pivot LU up to
/// `direct_limit` states, fixed-point iteration to 1e-12 beyond.
std::vector<double> policy_value_exact(const TabularMdp& m, const Policy& pi,
                                       std::size_t direct_limit = 2000);

struct RolloutEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Smallest horizon whose geometric tail gamma^H r_max / (1 - gamma) is <= tol.
std::size_t rollout_horizon(double tol, double gamma, double r_max);

/// Mean and standard error of n truncated discounted returns from x. Rollout
/// i draws from rng.substream(i). Terminal states end a rollout early.
RolloutEstimate policy_value_rollout(const GenerativeModel& g, const Policy& pi, StateView x,
                                     std::size_t horizon, std::size_t n_rollouts,
                                     const Stream& rng);

/// Single truncated discounted return; consumes `rng` sequentially.
double discounted_return(const GenerativeModel& g, const Policy& pi, StateView x,
                         std::size_t horizon, Stream& rng);

/// max_x | v(x) - max_a { r + gamma P^a v }(x) |.
double bellman_residual(const TabularMdp& m, std::span<const double> v);

struct ReinforceOptions {
  std::size_t episodes = 2000;
  double learning_rate = 0.1;
  std::size_t horizon = 100;
  /// Episode counts after which the current softmax policy is recorded.
  std::vector<std::size_t> snapshot_at;
  /// Episodes start here when set; otherwise at the model's initial state.
  std::optional<std::size_t> start_state;

  bool operator==(const ReinforceOptions&) const = default;
};

struct PolicySnapshot {
  std::size_t k;
  Policy policy;
};

/// Tabular softmax REINFORCE: return-to-go minus a running-mean baseline of
/// episode returns, no entropy bonus.
std::vector<PolicySnapshot> reinforce_tabular(const GenerativeModel& g,
                                              const ReinforceOptions& opts, Stream rng);

}  // namespace uvip
