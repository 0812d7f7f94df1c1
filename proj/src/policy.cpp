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

#include "uvip/policy.hpp"

#include <cmath>

#include <fmt/core.h>

#include "uvip/error.hpp"

namespace uvip {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

Policy::Policy(DeterministicPolicy p) : policy_(std::move(p)) {}

Policy::Policy(StochasticPolicy p) : policy_(std::move(p)) {
  const auto& s = std::get<StochasticPolicy>(policy_);
  require(s.n_actions >= 1 && s.probs.size() % s.n_actions == 0, ErrorCode::invalid_argument,
          "stochastic policy table has a ragged shape");
  for (std::size_t x = 0; x < s.n_states(); ++x) {
    double sum = 0.0;
    for (double p : s.row(x)) {
      if (!(p >= 0.0)) fail(ErrorCode::invalid_argument, fmt::format("negative probability at state {}", x));
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      fail(ErrorCode::invalid_argument,
           fmt::format("policy row {} sums to {} (expected 1)", x, sum));
  }
}

Policy::Policy(UniformPolicy p) : policy_(p) {
  require(p.n_actions >= 1, ErrorCode::invalid_argument, "uniform policy needs >= 1 action");
}

Policy::Policy(ScriptedPolicy p) : policy_(std::move(p)) {
  require(static_cast<bool>(std::get<ScriptedPolicy>(policy_).rule),
          ErrorCode::invalid_argument, "scripted policy has no rule");
}

bool Policy::is_tabular() const noexcept {
  return std::holds_alternative<DeterministicPolicy>(policy_) ||
         std::holds_alternative<StochasticPolicy>(policy_);
}

bool Policy::is_deterministic() const noexcept {
  return std::holds_alternative<DeterministicPolicy>(policy_) ||
         std::holds_alternative<ScriptedPolicy>(policy_);
}

std::string Policy::describe() const {
  return std::visit(overloaded{
                        [](const DeterministicPolicy& p) {
                          return fmt::format("deterministic[{}]", p.actions.size());
                        },
                        [](const StochasticPolicy& p) {
                          return fmt::format("stochastic[{}x{}]", p.n_states(), p.n_actions);
                        },
                        [](const UniformPolicy& p) {
                          return fmt::format("uniform[{}]", p.n_actions);
                        },
                        [](const ScriptedPolicy& p) { return p.name; },
                    },
                    policy_);
}

ActionIndex Policy::act(StateView x, Stream& rng) const {
  return std::visit(overloaded{
                        [&](const DeterministicPolicy& p) { return p.actions[tabular_index(x)]; },
                        [&](const StochasticPolicy& p) {
                          const auto row = p.row(tabular_index(x));
                          const double u = rng.uniform();
                          double cum = 0.0;
                          for (ActionIndex a = 0; a + 1 < row.size(); ++a) {
                            cum += row[a];
                            if (u < cum) return a;
                          }
                          return row.size() - 1;
                        },
                        [&](const UniformPolicy& p) {
                          return static_cast<ActionIndex>(rng.below(p.n_actions));
                        },
                        [&](const ScriptedPolicy& p) { return p.rule(x); },
                    },
                    policy_);
}

double Policy::probability(std::size_t x, ActionIndex a, std::size_t n_actions) const {
  return std::visit(overloaded{
                        [&](const DeterministicPolicy& p) { return p.actions[x] == a ? 1.0 : 0.0; },
                        [&](const StochasticPolicy& p) { return p.row(x)[a]; },
                        [&](const UniformPolicy& p) { return 1.0 / static_cast<double>(p.n_actions); },
                        [&](const ScriptedPolicy& p) {
                          const State s = tabular_state(x);
                          const ActionIndex chosen = p.rule(s);
                          require(chosen < n_actions, ErrorCode::invalid_argument,
                                  "scripted policy returned an out-of-range action");
                          return chosen == a ? 1.0 : 0.0;
                        },
                    },
                    policy_);
}

void Policy::check_tabular(std::size_t n_states, std::size_t n_actions) const {
  std::visit(overloaded{
                 [&](const DeterministicPolicy& p) {
                   if (p.actions.size() != n_states)
                     fail(ErrorCode::dimension_mismatch,
                          fmt::format("policy covers {} states, MDP has {}", p.actions.size(), n_states));
                   for (ActionIndex a : p.actions)
                     if (a >= n_actions)
                       fail(ErrorCode::invalid_argument,
                            fmt::format("policy action {} out of range (count {})", a, n_actions));
                 },
                 [&](const StochasticPolicy& p) {
                   if (p.n_states() != n_states || p.n_actions != n_actions)
                     fail(ErrorCode::dimension_mismatch,
                          fmt::format("policy is {}x{}, MDP is {}x{}", p.n_states(), p.n_actions,
                                      n_states, n_actions));
                 },
                 [&](const UniformPolicy& p) {
                   if (p.n_actions != n_actions)
                     fail(ErrorCode::dimension_mismatch,
                          fmt::format("uniform policy over {} actions, MDP has {}", p.n_actions, n_actions));
                 },
                 [&](const ScriptedPolicy&) {},
             },
             policy_);
}

}  // namespace uvip
