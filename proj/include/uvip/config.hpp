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
#include <optional>
#include <string>
#include <vector>

#include "uvip/dp.hpp"
#include "uvip/environments.hpp"
#include "uvip/upper_iteration.hpp"

namespace uvip {

enum class EnvKind { toy, chain, garnet, frozen_lake, cartpole, acrobot, file };

enum class PolicySource { optimal, vi_snapshot, reinforce, random, ld_cartpole, file };

const char* to_string(EnvKind e) noexcept;
const char* to_string(PolicySource p) noexcept;

/// Everything a CLI run depends on. Thread count is deliberately absent:
/// outputs never depend on it.
struct ExperimentConfig {
  EnvKind env = EnvKind::chain;
  double toy_gamma = 0.5;
  ChainSpec chain;
  GarnetSpec garnet;
  FrozenLakeSpec frozen_lake;
  CartPoleSpec cartpole;
  AcrobotSpec acrobot;
  /// Tabular model file for env = file, with an optional declared r_max.
  std::string env_path;
  std::optional<double> env_r_max;

  PolicySource policy = PolicySource::optimal;
  /// Snapshot index for vi_snapshot / reinforce; 0 means the last one.
  std::size_t policy_k = 0;
  std::string policy_path;

  double vi_eps = 1e-10;
  /// Tokens: positive integers, `mid` (half the final count) or `final`.
  std::vector<std::string> vi_snapshots{"1", "mid", "final"};

  ReinforceOptions reinforce{.episodes = 2000,
                             .learning_rate = 0.1,
                             .horizon = 100,
                             .snapshot_at = {500, 1000, 2000},
                             .start_state = std::nullopt};

  UvipConfig uvip;
  double delta = 0.05;

  bool figure1_reinforce = false;
  std::size_t figure3_steps = 50;
  std::size_t figure3_trajectories = 1;
  std::vector<std::string> figure3_policies{"ld_cartpole", "random"};

  std::uint64_t seed = 0;
  std::string output;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Flat `key = value` text. Values may be double-quoted; `#` starts a comment
/// outside quotes. Keys under `env.` must belong to the selected environment.
/// Errors name the line and key.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text: every key of the active environment and every global key,
/// in a fixed order. parse_config(emit_config(c)) == c.
std::string emit_config(const ExperimentConfig& cfg);

/// Applies one `key = value` assignment (value unquoted).
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
/// Current value of `key` in emitted form, or nullopt for unknown keys.
std::optional<std::string> get_config_value(const ExperimentConfig& cfg, const std::string& key);

/// Values of the vi.snapshots tokens once the final iteration count is known.
std::vector<std::size_t> resolve_snapshots(const std::vector<std::string>& tokens,
                                           std::size_t final_iteration);

}  // namespace uvip
