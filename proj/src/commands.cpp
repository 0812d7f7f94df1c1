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

#include "uvip/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>

#include <fmt/core.h>

#include "uvip/error.hpp"
#include "uvip/hash.hpp"
#include "uvip/log.hpp"
#include "uvip/scripted.hpp"

namespace uvip {

// ---------------------------------------------------------------------------
// Model and policy resolution

ModelBundle build_model(const ExperimentConfig& cfg) {
  ModelBundle b;
  auto tabular = [&](TabularMdp m, double r_max) {
    b.model = tabular_to_generative(m, TabularSampling::shared, to_string(cfg.env),
                                    std::max(r_max, m.r_max()));
    b.mdp = std::move(m);
  };
  switch (cfg.env) {
    case EnvKind::toy: tabular(make_toy(cfg.toy_gamma), 1.0); break;
    case EnvKind::chain:
      tabular(make_chain(cfg.chain),
              std::max(std::abs(cfg.chain.terminal_reward), std::abs(cfg.chain.step_reward)));
      break;
    case EnvKind::garnet: tabular(make_garnet(cfg.garnet), garnet_r_max(cfg.garnet)); break;
    case EnvKind::frozen_lake:
      tabular(make_frozen_lake(cfg.frozen_lake), std::abs(cfg.frozen_lake.goal_reward));
      break;
    case EnvKind::file: {
      require(!cfg.env_path.empty(), ErrorCode::invalid_argument, "env = file needs env.path");
      TabularMdp m = load_tabular(cfg.env_path);
      const double r = cfg.env_r_max.value_or(m.r_max());
      tabular(std::move(m), r);
      break;
    }
    case EnvKind::cartpole: b.model = make_cartpole(cfg.cartpole); break;
    case EnvKind::acrobot: b.model = make_acrobot(cfg.acrobot); break;
  }
  return b;
}

namespace {

const TabularMdp& need_tabular(const ModelBundle& m, const char* what) {
  if (!m.mdp) fail(ErrorCode::unsupported, fmt::format("{} needs a tabular environment", what));
  return *m.mdp;
}

ValueIterationResult run_vi(const ExperimentConfig& cfg, const TabularMdp& m,
                            std::vector<std::size_t> snapshots = {}) {
  ValueIterationOptions opts;
  opts.eps = cfg.vi_eps;
  opts.snapshot_at = std::move(snapshots);
  return value_iteration(m, opts);
}

std::vector<PolicySnapshot> run_reinforce(const ExperimentConfig& cfg, const ModelBundle& m,
                                          std::vector<std::size_t> snapshots) {
  ReinforceOptions opts = cfg.reinforce;
  opts.snapshot_at = std::move(snapshots);
  return reinforce_tabular(*m.model, opts, Stream(cfg.seed, {stream_tag::reinforce}));
}

}  // namespace

Policy resolve_named_policy(const std::string& name, const ExperimentConfig& cfg,
                            const ModelBundle& model) {
  if (name.rfind("file:", 0) == 0) return load_policy(name.substr(5));
  if (name == "optimal") {
    const TabularMdp& m = need_tabular(model, "policy optimal");
    return greedy_policy(run_vi(cfg, m).q);
  }
  if (name == "vi_snapshot") {
    const TabularMdp& m = need_tabular(model, "policy vi_snapshot");
    if (cfg.policy_k == 0) return greedy_policy(run_vi(cfg, m).q);
    const auto vi = run_vi(cfg, m, {cfg.policy_k});
    if (vi.snapshots.empty())
      fail(ErrorCode::invalid_argument,
           fmt::format("policy.k = {} exceeds the {} value-iteration steps", cfg.policy_k,
                       vi.iterations));
    return greedy_policy(vi.snapshots.front().q);
  }
  if (name == "reinforce") {
    need_tabular(model, "policy reinforce");
    const std::size_t k = cfg.policy_k ? cfg.policy_k : cfg.reinforce.episodes;
    if (k > cfg.reinforce.episodes)
      fail(ErrorCode::invalid_argument,
           fmt::format("policy.k = {} exceeds reinforce.episodes = {}", k, cfg.reinforce.episodes));
    return run_reinforce(cfg, model, {k}).front().policy;
  }
  if (name == "random") return random_uniform(model.model->action_count());
  if (name == "ld_cartpole") {
    if (cfg.env != EnvKind::cartpole)
      fail(ErrorCode::invalid_argument, "policy ld_cartpole needs env = cartpole");
    return ld_cartpole();
  }
  if (name == "file") {
    require(!cfg.policy_path.empty(), ErrorCode::invalid_argument, "policy = file needs policy.path");
    return load_policy(cfg.policy_path);
  }
  fail(ErrorCode::invalid_argument, fmt::format("unknown policy '{}'", name));
}

Policy resolve_policy(const ExperimentConfig& cfg, const ModelBundle& model) {
  Policy pi = resolve_named_policy(to_string(cfg.policy), cfg, model);
  if (model.mdp && pi.is_tabular()) pi.check_tabular(model.mdp->n_states(), model.mdp->n_actions());
  return pi;
}

UvipConfig effective_uvip(const ExperimentConfig& cfg, unsigned threads) {
  UvipConfig u = cfg.uvip;
  u.seed = cfg.seed;
  u.threads = std::max(1u, threads);
  return u;
}

// ---------------------------------------------------------------------------
// Output plumbing

std::string resolve_output_dir(const ExperimentConfig& cfg, const CommandOptions& opts) {
  if (!opts.output_dir.empty()) return opts.output_dir;
  if (!cfg.output.empty()) return cfg.output;
  if (const char* env = std::getenv("UVIP_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

namespace {

using Clock = std::chrono::steady_clock;

class Run {
 public:
  Run(const char* command, const ExperimentConfig& cfg, const CommandOptions& opts)
      : start_(Clock::now()), stage_start_(start_) {
    result_.output_dir = resolve_output_dir(cfg, opts);
    std::error_code ec;
    std::filesystem::create_directories(result_.output_dir, ec);
    if (ec)
      fail(ErrorCode::io,
           fmt::format("cannot create output directory '{}': {}", result_.output_dir, ec.message()));
    manifest_.tool_version = UVIP_VERSION_STRING;
    manifest_.command = command;
    manifest_.started_utc = utc_now();
    manifest_.config = emit_config(cfg);
  }

  void stage(const char* name) {
    const auto now = Clock::now();
    manifest_.stage_seconds.emplace_back(name, std::chrono::duration<double>(now - stage_start_).count());
    stage_start_ = now;
  }

  void fact(std::string key, std::string value) { manifest_.facts.emplace_back(std::move(key), std::move(value)); }
  void note(std::string line) { result_.notes.push_back(std::move(line)); }
  void set_exit(int code) { result_.exit_code = code; }

  void write(const std::string& name, const std::string& content) {
    const std::string path = (std::filesystem::path(result_.output_dir) / name).string();
    write_text_file(path, content);
    manifest_.outputs.emplace_back(name, git_blob_sha1(content));
    result_.files.push_back(path);
  }

  CommandResult finish() {
    stage("write");
    manifest_.wall_clock_seconds = std::chrono::duration<double>(Clock::now() - start_).count();
    const std::string path =
        (std::filesystem::path(result_.output_dir) / (manifest_.command + ".manifest")).string();
    write_text_file(path, format_manifest(manifest_));
    result_.manifest_path = path;
    return std::move(result_);
  }

 private:
  Clock::time_point start_;
  Clock::time_point stage_start_;
  RunManifest manifest_;
  CommandResult result_;
};

std::string num(double v) { return fmt::format("{}", v); }

std::string state_header(const BoundsReport& r) {
  if (r.tabular) return "state";
  std::string h;
  for (std::size_t k = 0; k < r.design.dim(); ++k) h += fmt::format("{}x{}", k ? "," : "", k);
  return h;
}

std::string state_cells(StateView x, bool tabular) {
  if (tabular) return std::to_string(tabular_index(x));
  std::string out;
  for (std::size_t k = 0; k < x.size(); ++k) out += (k ? "," : "") + num(x[k]);
  return out;
}

void report_facts(Run& run, const BoundsReport& r, const std::string& prefix = "") {
  run.fact(prefix + "fingerprint", r.fingerprint);
  run.fact(prefix + "converged", r.converged() ? "true" : "false");
  run.fact(prefix + "iterations", std::to_string(r.max_iterations()));
  run.fact(prefix + "last_change", num(r.max_last_change()));
  run.fact(prefix + "replicates", std::to_string(r.replicates.size()));
  if (r.covering) {
    run.fact(prefix + "covering_radius", num(r.covering->radius));
    run.fact(prefix + "covering_probe_size", std::to_string(r.covering->probe_size));
    run.fact(prefix + "lipschitz", num(r.lipschitz()));
  }
}

struct GapSummary {
  double mean_gap = 0.0;
  double max_gap = -std::numeric_limits<double>::infinity();
  double max_gap_stderr = 0.0;
  std::size_t argmax = 0;
};

GapSummary summarize(const BoundsReport& r) {
  GapSummary s;
  for (std::size_t i = 0; i < r.gap.size(); ++i) {
    s.mean_gap += r.gap[i];
    if (r.gap[i] > s.max_gap) {
      s.max_gap = r.gap[i];
      s.max_gap_stderr = std::hypot(r.v_up_stderr[i], r.v_pi_stderr[i]);
      s.argmax = i;
    }
  }
  s.mean_gap /= static_cast<double>(r.gap.size());
  return s;
}

}  // namespace

std::string format_bounds_csv(const BoundsReport& r) {
  std::string out = state_header(r) + ",v_pi,v_up,gap,stderr\n";
  for (std::size_t i = 0; i < r.v_up.size(); ++i)
    out += fmt::format("{},{},{},{},{}\n", state_cells(r.design.point(i), r.tabular), r.v_pi[i],
                       r.v_up[i], r.gap[i], r.v_up_stderr[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Commands

CommandResult cmd_solve(const ExperimentConfig& cfg, const CommandOptions& opts) {
  Run run("solve", cfg, opts);
  const ModelBundle model = build_model(cfg);
  const TabularMdp& m = need_tabular(model, "solve");
  run.stage("build_model");
  const auto vi = run_vi(cfg, m);
  const Policy pi = greedy_policy(vi.q);
  run.stage("value_iteration");

  std::string v = "state,v_star\n";
  for (std::size_t x = 0; x < m.n_states(); ++x) v += fmt::format("{},{}\n", x, vi.values[x]);
  std::string q = "state";
  for (ActionIndex a = 0; a < m.n_actions(); ++a) q += fmt::format(",a{}", a);
  q += '\n';
  for (std::size_t x = 0; x < m.n_states(); ++x) {
    q += std::to_string(x);
    for (double e : vi.q.row(x)) q += "," + num(e);
    q += '\n';
  }
  run.write("v_star.csv", v);
  run.write("q_star.csv", q);
  run.write("policy.txt", format_policy(pi));
  const double residual = bellman_residual(m, vi.values);
  run.fact("iterations", std::to_string(vi.iterations));
  run.fact("bellman_residual", num(residual));
  run.note(fmt::format("value iteration: {} sweeps, Bellman residual {}", vi.iterations, residual));
  return run.finish();
}

CommandResult cmd_evaluate(const ExperimentConfig& cfg, const CommandOptions& opts) {
  Run run("evaluate", cfg, opts);
  const ModelBundle model = build_model(cfg);
  const Policy pi = resolve_policy(cfg, model);
  run.stage("resolve");
  std::string out;
  if (model.mdp) {
    const auto v = policy_value_exact(*model.mdp, pi);
    out = "state,v_pi,stderr\n";
    for (std::size_t x = 0; x < v.size(); ++x) out += fmt::format("{},{},0\n", x, v[x]);
  } else {
    const UvipConfig u = effective_uvip(cfg, opts.threads);
    require(u.n_design >= 1, ErrorCode::invalid_argument, "box models need uvip.n_design >= 1");
    const GenerativeModel& g = *model.model;
    const DesignSet design = sample_design(g, u.n_design, Stream(u.seed, {stream_tag::design}));
    const std::size_t horizon = rollout_horizon(u.rollout_tol, g.gamma(), g.r_max());
    for (std::size_t k = 0; k < design.dim(); ++k) out += fmt::format("{}x{}", k ? "," : "", k);
    out += ",v_pi,stderr\n";
    for (std::size_t i = 0; i < design.size(); ++i) {
      const auto est = policy_value_rollout(g, pi, design.point(i), horizon, u.policy_value_rollouts,
                                            Stream(u.seed, {stream_tag::policy_value, i}));
      out += fmt::format("{},{},{}\n", state_cells(design.point(i), false), est.mean, est.std_error);
    }
  }
  run.stage("evaluate");
  run.write("v_pi.csv", out);
  run.fact("policy", pi.describe());
  return run.finish();
}

CommandResult cmd_uvip(const ExperimentConfig& cfg, const CommandOptions& opts) {
  Run run("uvip", cfg, opts);
  const ModelBundle model = build_model(cfg);
  const Policy pi = resolve_policy(cfg, model);
  run.stage("resolve");
  const BoundsReport r = uvip_run(*model.model, pi, effective_uvip(cfg, opts.threads));
  run.stage("uvip");
  run.write("bounds.csv", format_bounds_csv(r));
  if (!r.tabular) {
    if (r.replicates.front().interpolant)
      run.write("interpolant.csv", format_interpolant_csv(*r.replicates.front().interpolant));
    std::string lip = "replicate,iteration,lipschitz\n";
    for (std::size_t rep = 0; rep < r.replicates.size(); ++rep)
      for (std::size_t k = 0; k < r.replicates[rep].lipschitz.size(); ++k)
        lip += fmt::format("{},{},{}\n", rep, k + 1, r.replicates[rep].lipschitz[k]);
    run.write("lipschitz.csv", lip);
  }
  report_facts(run, r);
  const GapSummary s = summarize(r);
  run.note(fmt::format("{} states, max gap {} (stderr {}), mean gap {}, {} after {} sweeps",
                       r.v_up.size(), s.max_gap, s.max_gap_stderr, s.mean_gap,
                       r.converged() ? "converged" : "not converged", r.max_iterations()));
  if (!r.converged()) run.set_exit(exit_code::not_converged);
  return run.finish();
}

CommandResult cmd_figure1(const ExperimentConfig& cfg, const CommandOptions& opts) {
  Run run("figure1", cfg, opts);
  const ModelBundle model = build_model(cfg);
  const TabularMdp& m = need_tabular(model, "figure1");
  const UvipConfig u = effective_uvip(cfg, opts.threads);
  run.stage("build_model");

  struct Item {
    std::string source;
    std::size_t k;
    Policy policy;
  };
  std::vector<Item> items;
  {
    const auto full = run_vi(cfg, m);
    const auto ks = resolve_snapshots(cfg.vi_snapshots, full.iterations);
    const auto vi = run_vi(cfg, m, ks);
    for (const auto& s : vi.snapshots) items.push_back({"vi", s.k, greedy_policy(s.q)});
  }
  if (cfg.figure1_reinforce) {
    auto ks = cfg.reinforce.snapshot_at;
    if (ks.empty()) ks.push_back(cfg.reinforce.episodes);
    for (auto& s : run_reinforce(cfg, model, ks)) items.push_back({"reinforce", s.k, std::move(s.policy)});
  }
  run.stage("policies");

  std::string summary = "source,k,mean_gap,max_gap,max_gap_stderr,argmax_state,iterations,converged\n";
  for (const auto& item : items) {
    const BoundsReport r = uvip_run(*model.model, item.policy, u);
    const std::string name = fmt::format("figure1_{}_k{}.csv", item.source, item.k);
    run.write(name, format_bounds_csv(r));
    const GapSummary s = summarize(r);
    summary += fmt::format("{},{},{},{},{},{},{},{}\n", item.source, item.k, s.mean_gap, s.max_gap,
                           s.max_gap_stderr, s.argmax, r.max_iterations(),
                           r.converged() ? "true" : "false");
    run.fact(fmt::format("{}_k{}.fingerprint", item.source, item.k), r.fingerprint);
    run.note(fmt::format("{} k={}: max gap {} (stderr {})", item.source, item.k, s.max_gap,
                         s.max_gap_stderr));
  }
  run.stage("uvip");
  run.write("figure1_summary.csv", summary);
  return run.finish();
}

CommandResult cmd_figure3(const ExperimentConfig& cfg, const CommandOptions& opts) {
  Run run("figure3", cfg, opts);
  const ModelBundle model = build_model(cfg);
  const GenerativeModel& g = *model.model;
  if (g.states().is_tabular()) fail(ErrorCode::unsupported, "figure3 needs a box environment");
  require(cfg.figure3_steps >= 1, ErrorCode::invalid_argument, "figure3.steps must be >= 1");
  require(cfg.figure3_trajectories >= 1, ErrorCode::invalid_argument, "figure3.trajectories must be >= 1");
  const UvipConfig u = effective_uvip(cfg, opts.threads);
  const std::size_t horizon = rollout_horizon(u.rollout_tol, g.gamma(), g.r_max());
  const std::size_t n_traj = cfg.figure3_trajectories;
  run.stage("build_model");

  // Trajectory j starts (and restarts after termination) from initial states shared across
  // policies; a terminal state ends the episode and the walk resumes until T states are seen.
  auto sample_path = [&](const Policy& pi, std::size_t p, std::size_t j, std::size_t& total_episodes) {
    std::size_t episodes = 1;
    Stream reset(u.seed, {stream_tag::trajectory, 0, j, 0});
    State x = g.initial_state(reset);
    Stream walk(u.seed, {stream_tag::trajectory, p + 1, j});
    std::vector<State> path;
    std::vector<double> xi(g.noise().dim);
    State next(x.size());
    while (path.size() < cfg.figure3_steps) {
      if (g.is_terminal(x)) {
        require(episodes < 1000 * cfg.figure3_steps, ErrorCode::invalid_argument,
                "initial states are terminal; no trajectory to follow");
        Stream again(u.seed, {stream_tag::trajectory, 0, j, episodes++});
        x = g.initial_state(again);
        continue;
      }
      path.push_back(x);
      const ActionIndex a = pi.act(x, walk);
      sample_noise(g.noise(), walk, xi);
      g.step(x, a, xi, next);
      x.swap(next);
    }
    total_episodes += episodes;
    return path;
  };

  auto sample_variance = [](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0, ss = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size() - 1);
  };

  std::string summary = "policy,steps,mean_gap,mean_gap_stderr,mean_inflation,iterations,converged\n";
  for (std::size_t p = 0; p < cfg.figure3_policies.size(); ++p) {
    const std::string& name = cfg.figure3_policies[p];
    const Policy pi = resolve_named_policy(name, cfg, model);
    const BoundsReport r = uvip_run(g, pi, u);
    report_facts(run, r, name + ".");

    std::string csv = "trajectory,t";
    for (std::size_t k = 0; k < g.state_dim(); ++k) csv += fmt::format(",x{}", k);
    csv += ",v_pi,v_pi_stderr,v_up,v_up_stderr,inflation,upper,gap\n";
    // Per replicate: gap averaged over every visited state. Per trajectory: its mean gap.
    std::vector<double> rep_gap(r.replicates.size(), 0.0);
    std::vector<double> traj_gap;
    double pi_var = 0.0, inflation_sum = 0.0, gap_sum = 0.0;
    std::size_t episodes = 0, states = 0;
    for (std::size_t j = 0; j < n_traj; ++j) {
      const auto path = sample_path(pi, p, j, episodes);
      double this_gap = 0.0;
      for (std::size_t t = 0; t < path.size(); ++t) {
        const auto est = policy_value_rollout(g, pi, path[t], horizon, u.policy_value_rollouts,
                                              Stream(u.seed, {stream_tag::trajectory, p + 1, j, t + 1}));
        const UpperQuery q = query_upper(r, path[t]);
        const auto reps = replicate_upper(r, path[t]);
        for (std::size_t k = 0; k < reps.size(); ++k) rep_gap[k] += reps[k] - est.mean;
        const double gap = q.v_up - est.mean;
        csv += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", j, t, state_cells(path[t], false), est.mean,
                           est.std_error, q.v_up, q.std_error, q.inflation, q.v_up + q.inflation, gap);
        pi_var += est.std_error * est.std_error;
        inflation_sum += q.inflation;
        gap_sum += gap;
        this_gap += gap;
      }
      traj_gap.push_back(this_gap / static_cast<double>(path.size()));
      states += path.size();
    }
    const double n_states = static_cast<double>(states);
    const double mean_gap = gap_sum / n_states;
    // Replicate spread of the mean gap, rollout noise of V^pi and, with several trajectories,
    // their spread.
    for (double& v : rep_gap) v /= n_states;
    const double rep_se = std::sqrt(sample_variance(rep_gap) / static_cast<double>(rep_gap.size()));
    const double traj_se = std::sqrt(sample_variance(traj_gap) / static_cast<double>(traj_gap.size()));
    const double se = std::sqrt(rep_se * rep_se + pi_var / (n_states * n_states) + traj_se * traj_se);
    run.write(fmt::format("figure3_{}.csv", name), csv);
    run.fact(name + ".episodes", std::to_string(episodes));
    summary += fmt::format("{},{},{},{},{},{},{}\n", name, states, mean_gap, se, inflation_sum / n_states,
                           r.max_iterations(), r.converged() ? "true" : "false");
    run.note(fmt::format("{}: {} states over {} trajectories ({} episodes), mean gap {} (stderr {})", name,
                         states, n_traj, episodes, mean_gap, se));
  }
  run.stage("uvip");
  run.write("figure3_summary.csv", summary);
  return run.finish();
}

// ---------------------------------------------------------------------------
// Invariant suite

namespace {

struct CheckRow {
  std::string check;
  std::string environment;
  double value;
  double threshold;
  bool pass;
};

void tabular_checks(const std::string& env, const TabularMdp& m, double r_max,
                    std::vector<CheckRow>& rows) {
  const auto add = [&](const char* check, double value, double threshold, bool pass) {
    rows.push_back({check, env, value, threshold, pass});
  };
  const auto violations = validate_tabular(m);
  add("kernel_rows_invalid", static_cast<double>(violations.size()), 0.0, violations.empty());

  ValueIterationOptions vo;
  vo.eps = 1e-10;
  vo.keep_history = true;
  const auto vi = value_iteration(m, vo);
  const double residual = bellman_residual(m, vi.values);
  add("bellman_residual", residual, 1e-9, residual <= 1e-9);

  const Policy greedy = greedy_policy(vi.q);
  const auto v_star = policy_value_exact(m, greedy);
  double diff = 0.0, scale = 1.0;
  for (std::size_t x = 0; x < v_star.size(); ++x) {
    diff = std::max(diff, std::abs(v_star[x] - vi.values[x]));
    scale = std::max(scale, std::abs(v_star[x]));
  }
  add("greedy_is_optimal", diff, 1e-8, diff <= 1e-8);

  // Contraction toward the exact fixed point of the greedy policy.
  const auto dist = [&](const std::vector<double>& v) {
    double d = 0.0;
    for (std::size_t x = 0; x < v.size(); ++x) d = std::max(d, std::abs(v[x] - v_star[x]));
    return d;
  };
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < vi.history.size(); ++k)
    worst = std::max(worst, dist(vi.history[k + 1]) - m.gamma() * dist(vi.history[k]));
  const double slack = 1e-12 * scale;
  add("contraction_excess", worst, slack, worst <= slack);

  ValueIterationOptions up;
  up.eps = 1e-10;
  up.keep_history = true;
  up.initial.assign(m.n_states(), r_max / (1.0 - m.gamma()));
  const auto upper = value_iteration(m, up);
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& v : upper.history)
    for (std::size_t x = 0; x < v.size(); ++x) lowest = std::min(lowest, v[x] - v_star[x]);
  add("upper_start_min_excess", lowest, -slack, lowest >= -slack);

  const double mg_opt = martingale_check(m, greedy);
  add("martingale_optimal", mg_opt, 1e-10, mg_opt <= 1e-10);
  const double mg_rand = martingale_check(m, random_uniform(m.n_actions()));
  add("martingale_random", mg_rand, 1e-10, mg_rand <= 1e-10);

  const double us = upper_solution_check(m, std::vector<double>(m.n_states(), r_max / (1.0 - m.gamma())));
  add("constant_upper_solution", us, 0.0, us <= 0.0);
}

}  // namespace

CommandResult cmd_check(const ExperimentConfig& cfg, const CommandOptions& opts) {
  Run run("check", cfg, opts);
  std::vector<CheckRow> rows;
  tabular_checks("toy", make_toy(), 1.0, rows);
  tabular_checks("chain", make_chain(cfg.chain),
                 std::max(std::abs(cfg.chain.terminal_reward), std::abs(cfg.chain.step_reward)), rows);
  tabular_checks("garnet", make_garnet(cfg.garnet), garnet_r_max(cfg.garnet), rows);
  tabular_checks("frozen_lake", make_frozen_lake(cfg.frozen_lake),
                 std::abs(cfg.frozen_lake.goal_reward), rows);
  run.stage("dp_checks");

  {
    // Deterministic toy collapse: exact zero gap at the optimum, v_up = 2 under always-a0.
    const TabularMdp toy = make_toy();
    const auto g = tabular_to_generative(toy);
    UvipConfig u = effective_uvip(cfg, opts.threads);
    u.m1 = u.m2 = 10;
    u.replicates = 2;
    u.n_design = 0;
    u.eps_stop = 1e-12;
    u.k_max = 200;
    const auto opt = uvip_run(*g, greedy_policy(value_iteration(toy).q), u);
    double gap = 0.0;
    for (double v : opt.gap) gap = std::max(gap, std::abs(v));
    rows.push_back({"toy_optimal_gap", "toy", gap, 0.0, gap == 0.0});
    const auto a0 = uvip_run(*g, Policy(DeterministicPolicy{{0, 0}}), u);
    double err = 0.0;
    for (double v : a0.v_up) err = std::max(err, std::abs(v - 2.0));
    rows.push_back({"toy_always_a0_v_up", "toy", err, 1e-9, err <= 1e-9});
  }
  run.stage("uvip_checks");

  std::string csv = "check,environment,value,threshold,pass\n";
  std::size_t failed = 0;
  for (const auto& r : rows) {
    csv += fmt::format("{},{},{},{},{}\n", r.check, r.environment, r.value, r.threshold,
                       r.pass ? "true" : "false");
    if (!r.pass) {
      ++failed;
      run.note(fmt::format("FAILED {} on {}: {} (threshold {})", r.check, r.environment, r.value,
                           r.threshold));
    }
  }
  run.write("check.csv", csv);
  run.fact("checks", std::to_string(rows.size()));
  run.fact("failed", std::to_string(failed));
  run.note(fmt::format("{} of {} checks passed", rows.size() - failed, rows.size()));
  if (failed) run.set_exit(exit_code::failure);
  return run.finish();
}

}  // namespace uvip
