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

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "uvip/mdp.hpp"

namespace uvip {

struct DeterministicPolicy {
  std::vector<ActionIndex> actions;
  bool operator==(const DeterministicPolicy&) const = default;
};

/// Row-major probabilities, one row of `n_actions` per state.
struct StochasticPolicy {
  std::size_t n_actions = 0;
  std::vector<double> probs;

  std::size_t n_states() const noexcept { return n_actions ? probs.size() / n_actions : 0; }
  std::span<const double> row(std::size_t x) const {
    return {probs.data() + x * n_actions, n_actions};
  }
  bool operator==(const StochasticPolicy&) const = default;
};

/// Uniform over actions at every state; works on any state space.
struct UniformPolicy {
  std::size_t n_actions = 1;
  bool operator==(const UniformPolicy&) const = default;
};

/// Pure decision rule over arbitrary states.
struct ScriptedPolicy {
  std::string name;
  std::function<ActionIndex(StateView)> rule;
};

class Policy {
 public:
  using Variant = std::variant<DeterministicPolicy, StochasticPolicy, UniformPolicy, ScriptedPolicy>;

  Policy(DeterministicPolicy p);
  Policy(StochasticPolicy p);
  Policy(UniformPolicy p);
  Policy(ScriptedPolicy p);

  const Variant& variant() const noexcept { return policy_; }
  bool is_tabular() const noexcept;
  bool is_deterministic() const noexcept;
  std::string describe() const;

  /// Action at state x; draws from `rng` only for stochastic policies.
  ActionIndex act(StateView x, Stream& rng) const;

  /// pi(a | x) for tabular use (state x is an index). Scripted rules are
  /// evaluated at the tabular encoding of x.
  double probability(std::size_t x, ActionIndex a, std::size_t n_actions) const;

  /// Throws unless the policy is usable on `n_states` x `n_actions`.
  void check_tabular(std::size_t n_states, std::size_t n_actions) const;

 private:
  Variant policy_;
};

/// Text form: `policy deterministic <n>` then one index per line, or
/// `policy stochastic <n> <m>` then n rows of m probabilities.
std::string format_policy(const Policy& pi);
Policy parse_policy(const std::string& text);
Policy load_policy(const std::string& path);
void save_policy(const Policy& pi, const std::string& path);

/// Text form: `tabular <nstates> <nactions> <gamma>` then one line per
/// (x, a): `x a r p_0 ... p_{n-1}`. Lines starting with '#' are comments.
std::string format_tabular(const TabularMdp& m);
TabularMdp parse_tabular(const std::string& text);
TabularMdp load_tabular(const std::string& path);
void save_tabular(const TabularMdp& m, const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace uvip
