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

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uvip/config.hpp"
#include "uvip/manifest.hpp"
#include "uvip/policy.hpp"
#include "uvip/upper_iteration.hpp"

namespace uvip {

struct ModelBundle {
  std::shared_ptr<const GenerativeModel> model;
  /// Exact kernel for tabular environments.
  std::optional<TabularMdp> mdp;
};

/// Builds the configured environment. Tabular environments carry their
/// declared reward bound (Chain and FrozenLake: the terminal payoff, Garnet:
/// the boost factor, toy: 1).
ModelBundle build_model(const ExperimentConfig& cfg);

/// The configured policy for the configured model.
Policy resolve_policy(const ExperimentConfig& cfg, const ModelBundle& model);

/// A policy given by name: any PolicySource name, or `file:<path>`.
Policy resolve_named_policy(const std::string& name, const ExperimentConfig& cfg,
                            const ModelBundle& model);

/// The UvipConfig a command runs with: cfg.uvip with the experiment seed.
UvipConfig effective_uvip(const ExperimentConfig& cfg, unsigned threads);

struct CommandOptions {
  unsigned threads = 1;
  /// Overrides cfg.output when set. Without either, $UVIP_OUTPUT_DIR, then ".".
  std::string output_dir;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int usage = 2;
inline constexpr int not_converged = 3;
}  // namespace exit_code

struct CommandResult {
  int exit_code = exit_code::ok;
  std::string output_dir;
  std::vector<std::string> files;
  std::string manifest_path;
  /// One-line human summaries.
  std::vector<std::string> notes;
};

std::string resolve_output_dir(const ExperimentConfig& cfg, const CommandOptions& opts);

/// v_star.csv, q_star.csv, policy.txt. Tabular environments only.
CommandResult cmd_solve(const ExperimentConfig& cfg, const CommandOptions& opts);
/// v_pi.csv: exact on tabular models, rollout estimates on a sampled design
/// otherwise.
CommandResult cmd_evaluate(const ExperimentConfig& cfg, const CommandOptions& opts);
/// bounds.csv (+ interpolant.csv and lipschitz.csv on box models). Exit code
/// not_converged when k_max ran out.
CommandResult cmd_uvip(const ExperimentConfig& cfg, const CommandOptions& opts);
/// Certifies greedy value-iteration snapshots (and REINFORCE snapshots when
/// enabled): one CSV per snapshot plus figure1_summary.csv.
CommandResult cmd_figure1(const ExperimentConfig& cfg, const CommandOptions& opts);
/// Bounds at the first figure3.steps states of figure3.trajectories trajectories per policy,
/// restarting episodes that terminate, plus figure3_summary.csv.
CommandResult cmd_figure3(const ExperimentConfig& cfg, const CommandOptions& opts);
/// Invariant suite on the tabular environments; check.csv. Exit code
/// failure when any check fails.
CommandResult cmd_check(const ExperimentConfig& cfg, const CommandOptions& opts);

/// CSV text for a bounds report: `state,...` or `x0,...,x{d-1},` followed by
/// `v_pi,v_up,gap,stderr`.
std::string format_bounds_csv(const BoundsReport& report);

}  // namespace uvip
