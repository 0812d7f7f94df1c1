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

// Acceptance suite: one PASS/FAIL line per criterion, each with its runtime
// budget. Usage: acceptance [criterion numbers...]; no arguments runs all.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "uvip/commands.hpp"
#include "uvip/config.hpp"
#include "uvip/dp.hpp"
#include "uvip/environments.hpp"
#include "uvip/lipschitz.hpp"
#include "uvip/scripted.hpp"
#include "uvip/upper_iteration.hpp"

using namespace uvip;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double budget_seconds;
  std::function<Outcome()> run;
};

// CSVs produced by the first pass of criteria 1-3, compared byte for byte
// against a rerun with another thread count.
std::map<std::string, std::string> recorded_csv;
unsigned run_threads = 1;
bool recording = true;

void record(const std::string& name, const BoundsReport& r) {
  const std::string csv = format_bounds_csv(r);
  if (recording) recorded_csv[name] = csv;
}

Policy constant_policy(std::size_t n, ActionIndex a) {
  return DeterministicPolicy{std::vector<ActionIndex>(n, a)};
}

ExperimentConfig env_config(const std::string& text) { return parse_config(text); }

std::vector<TabularMdp> tabular_envs() {
  return {make_toy(), make_chain({}), make_garnet({}), make_frozen_lake()};
}

using Table = std::vector<std::map<std::string, std::string>>;

Table read_csv(const fs::path& path) {
  std::istringstream in(read_text_file(path.string()));
  std::vector<std::string> header;
  Table rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (header.empty()) {
      header = cells;
      continue;
    }
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) row[header[i]] = cells[i];
    rows.push_back(row);
  }
  return rows;
}

double num(const std::map<std::string, std::string>& row, const std::string& key) {
  return std::stod(row.at(key));
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("uvip_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

// ---------------------------------------------------------------------------

Outcome toy_collapse() {
  const ModelBundle toy = build_model(env_config("env = \"toy\"\n"));
  UvipConfig cfg;
  cfg.m1 = cfg.m2 = 100;
  cfg.replicates = 5;
  cfg.seed = 1;
  cfg.threads = run_threads;
  const auto opt = uvip_run(*toy.model, constant_policy(2, 1), cfg);
  cfg.eps_stop = 1e-12;
  const auto a0 = uvip_run(*toy.model, constant_policy(2, 0), cfg);
  record("toy_optimal", opt);
  record("toy_a0", a0);
  bool ok = true;
  double worst = 0.0;
  for (std::size_t x = 0; x < 2; ++x) {
    ok &= opt.gap[x] == 0.0 && opt.v_up_stderr[x] == 0.0;
    worst = std::max(worst, std::abs(a0.v_up[x] - 2.0));
  }
  ok &= worst <= 1e-9;
  return {ok, fmt::format("optimal gap {} / {}, stderr {}; always-a0 |v_up - 2| <= {:.1e}",
                          opt.gap[0], opt.gap[1], opt.v_up_stderr[0], worst)};
}

Outcome martingale_identity() {
  double worst = 0.0;
  for (const TabularMdp& m : tabular_envs()) {
    const std::vector<Policy> policies{random_uniform(m.n_actions()),
                                       greedy_policy(value_iteration(m).q),
                                       constant_policy(m.n_states(), 0)};
    for (const Policy& pi : policies) worst = std::max(worst, martingale_check(m, pi));
  }
  return {worst <= 1e-10, fmt::format("max |P Phi| = {:.2e} over 4 environments x 3 policies", worst)};
}

Outcome upper_bound_property() {
  struct Case {
    const char* name;
    const char* config;
    std::size_t m;
  };
  const std::vector<Case> cases = {{"chain", "env = \"chain\"\nenv.gamma = 0.8\n", 1000},
                                   {"garnet", "env = \"garnet\"\nenv.gamma = 0.9\n", 3000}};
  const double vi_eps = 1e-10;
  bool ok = true;
  std::string detail;
  for (const Case& c : cases) {
    const ModelBundle b = build_model(env_config(c.config));
    const TabularMdp& m = *b.mdp;
    const auto vi = value_iteration(m, {.eps = vi_eps});
    // V* is known to within eps * gamma / (1 - gamma) of the computed limit.
    const double vi_tol = vi_eps * m.gamma() / (1.0 - m.gamma());
    const std::vector<std::pair<const char*, Policy>> policies = {
        {"optimal", greedy_policy(vi.q)}, {"random", random_uniform(m.n_actions())}};
    for (const auto& [pname, pi] : policies) {
      UvipConfig cfg;
      cfg.m1 = cfg.m2 = c.m;
      cfg.replicates = 20;
      cfg.seed = 3;
      cfg.threads = run_threads;
      const auto r = uvip_run(*b.model, pi, cfg);
      record(fmt::format("{}_{}", c.name, pname), r);
      double min_z = std::numeric_limits<double>::infinity();
      for (std::size_t x = 0; x < m.n_states(); ++x) {
        const double slack = r.v_up[x] - (vi.values[x] - 3.0 * r.v_up_stderr[x] - vi_tol);
        ok &= slack >= 0.0;
        if (r.v_up_stderr[x] > 0.0)
          min_z = std::min(min_z, (r.v_up[x] - vi.values[x]) / r.v_up_stderr[x]);
      }
      detail += fmt::format("{}/{} min (v_up - V*)/se = {:.2f}; ", c.name, pname, min_z);
    }
  }
  return {ok, detail.substr(0, detail.size() - 2)};
}

struct FigureOne {
  Table summary;
  std::string error;
};

FigureOne figure1(const std::string& name, const std::string& config) {
  const fs::path dir = scratch_dir("figure1_" + name);
  CommandOptions opts;
  opts.threads = run_threads;
  opts.output_dir = dir.string();
  cmd_figure1(env_config(config), opts);
  FigureOne out{read_csv(dir / "figure1_summary.csv"), ""};
  fs::remove_all(dir);
  return out;
}

const char* chain_figure1 =
    "env = \"chain\"\nenv.gamma = 0.8\nuvip.m1 = 1000\nuvip.m2 = 1000\nuvip.replicates = 10\n"
    "vi.snapshots = \"1, mid, final\"\nseed = 5\n";
const char* lake_figure1 =
    "env = \"frozen_lake\"\nenv.gamma = 0.9\nuvip.m1 = 1000\nuvip.m2 = 1000\nuvip.replicates = 10\n"
    "vi.snapshots = \"1, mid, final\"\nfigure1.reinforce = true\nreinforce.episodes = 2000\n"
    "reinforce.snapshots = \"500, 1000, 2000\"\nseed = 5\n";

Outcome figure1_convergence() {
  bool ok = true;
  std::string detail;
  for (const auto& [name, config, r_max, gamma] :
       {std::tuple{"chain", chain_figure1, 10.0, 0.8}, std::tuple{"frozen_lake", lake_figure1, 10.0, 0.9}}) {
    const auto f = figure1(name, config);
    std::vector<std::map<std::string, std::string>> vi;
    for (const auto& row : f.summary)
      if (row.at("source") == "vi") vi.push_back(row);
    if (vi.size() != 3) return {false, fmt::format("{}: expected 3 VI snapshots, got {}", name, vi.size())};
    std::string gaps;
    for (std::size_t i = 0; i < vi.size(); ++i) {
      gaps += fmt::format("{}k{}={:.4g}", i ? " " : "", vi[i].at("k"), num(vi[i], "max_gap"));
      if (i == 0) continue;
      const double slack = 3.0 * std::hypot(num(vi[i], "max_gap_stderr"), num(vi[i - 1], "max_gap_stderr"));
      ok &= num(vi[i], "max_gap") <= num(vi[i - 1], "max_gap") + slack;
    }
    const double limit = 0.05 * r_max / (1.0 - gamma);
    ok &= num(vi.back(), "max_gap") <= limit;
    detail += fmt::format("{}: {} (final limit {}); ", name, gaps, limit);
  }
  return {ok, detail.substr(0, detail.size() - 2)};
}

Outcome reinforce_signal() {
  const auto f = figure1("frozen_lake_rf", lake_figure1);
  const std::map<std::string, std::string>* vi_final = nullptr;
  const std::map<std::string, std::string>* rf_final = nullptr;
  for (const auto& row : f.summary) {
    if (row.at("source") == "vi") vi_final = &row;
    if (row.at("source") == "reinforce") rf_final = &row;
  }
  if (!vi_final || !rf_final) return {false, "missing snapshot rows"};
  const double diff = num(*rf_final, "max_gap") - num(*vi_final, "max_gap");
  const double se = std::hypot(num(*rf_final, "max_gap_stderr"), num(*vi_final, "max_gap_stderr"));
  return {diff > 3.0 * se,
          fmt::format("REINFORCE k={} max gap {:.4g} vs VI max gap {:.4g}: difference {:.4g}, 3 se {:.3g}",
                      rf_final->at("k"), num(*rf_final, "max_gap"), num(*vi_final, "max_gap"), diff,
                      3.0 * se)};
}

Outcome interpolation_bound() {
  using Fn = std::function<double(const double*)>;
  const std::vector<std::pair<std::size_t, Fn>> fns = {
      {1, [](const double* x) { return std::abs(x[0] - 0.37); }},
      {1, [](const double* x) { return 2.0 * std::min(x[0], 1.0 - x[0]) + 0.5 * x[0]; }},
      {1, [](const double* x) { return std::abs(std::abs(x[0] - 0.5) - 0.25); }},
      {2, [](const double* x) { return std::hypot(x[0] - 0.3, x[1] - 0.6); }},
      {2, [](const double* x) { return std::max(std::abs(x[0] - x[1]), 0.5 * x[0]); }},
  };
  bool ok = true;
  double worst_ratio = 0.0;
  for (std::size_t k = 0; k < fns.size(); ++k) {
    const auto& [d, f] = fns[k];
    const BoxSpace box{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
    const DesignSet design = sample_design_uniform(d == 1 ? 80 : 300,
                                                   StateSpace::box(box.lower, box.upper), Stream(k, {6}));
    std::vector<double> values;
    for (std::size_t i = 0; i < design.size(); ++i) values.push_back(f(design.point(i).data()));
    const Interpolant fi = build_interpolant(design, values);
    for (std::size_t i = 0; i < design.size(); ++i) ok &= fi(design.point(i)) == values[i];
    const auto probe = grid_probe(box, d == 1 ? 20001 : 201);
    const double radius = covering_radius(design, probe);
    double err = 0.0;
    for (std::size_t p = 0; p < probe.size() / d; ++p) {
      const StateView x{probe.data() + p * d, d};
      err = std::max(err, std::abs(f(x.data()) - fi(x)));
    }
    const double bound = fi.lipschitz() * radius;
    ok &= err <= bound + 1e-12;
    worst_ratio = std::max(worst_ratio, err / bound);
  }
  return {ok, fmt::format("nodes exact; max error / (L_hat * radius) = {:.3f} over 5 functions", worst_ratio)};
}

Outcome covering_rate() {
  const std::vector<std::size_t> sizes{100, 1000, 10000};
  bool ok = true;
  std::string detail;
  for (std::size_t d : {1u, 2u}) {
    const auto space = StateSpace::box(std::vector<double>(d, 0.0), std::vector<double>(d, 1.0));
    std::vector<double> lx, ly;
    for (std::size_t n : sizes) {
      double mean = 0.0;
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const DesignSet design = sample_design_uniform(n, space, Stream(seed, {d, n}));
        mean += covering_radius_box(design, space.as_box(), Stream(seed, {d, n, 1})).radius;
      }
      lx.push_back(std::log(double(n)));
      ly.push_back(std::log(mean / 20.0));
    }
    const double mx = (lx[0] + lx[1] + lx[2]) / 3.0, my = (ly[0] + ly[1] + ly[2]) / 3.0;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    const double slope = sxy / sxx;
    const double target = -1.0 / double(d);
    ok &= std::abs(slope - target) <= 0.2;
    detail += fmt::format("d={}: slope {:.3f} (target {:.2f}); ", d, slope, target);
  }
  return {ok, detail.substr(0, detail.size() - 2)};
}

Outcome variance_shrinkage() {
  const ModelBundle b = build_model(env_config("env = \"chain\"\nenv.gamma = 0.8\n"));
  const TabularMdp& m = *b.mdp;
  UvipConfig cfg;
  cfg.m1 = cfg.m2 = 1000;
  cfg.seed = 8;
  cfg.threads = run_threads;
  const auto v_opt = variance_profile(*b.model, greedy_policy(value_iteration(m).q), cfg, 30);
  const auto v_rand = variance_profile(*b.model, random_uniform(2), cfg, 30);
  std::size_t better = 0, counted = 0;
  for (std::size_t x = 0; x < m.n_states(); ++x) {
    if (m.is_terminal(x)) continue;
    ++counted;
    better += v_opt[x] <= v_rand[x];
  }
  const double frac = double(better) / double(counted);
  return {frac >= 0.8, fmt::format("optimal variance <= random variance at {}/{} non-terminal states",
                                   better, counted)};
}

Outcome cartpole_ranking() {
  const fs::path dir = scratch_dir("figure3");
  const auto cfg = env_config(
      "env = \"cartpole\"\nenv.gamma = 0.9\nuvip.m1 = 50\nuvip.m2 = 50\nuvip.n_design = 300\n"
      "uvip.k_max = 60\nuvip.policy_value = \"interpolated\"\nuvip.replicates = 3\n"
      "figure3.steps = 50\nfigure3.trajectories = 5\nfigure3.policies = \"ld_cartpole, random\"\nseed = 1\n");
  CommandOptions opts;
  opts.threads = run_threads;
  opts.output_dir = dir.string();
  cmd_figure3(cfg, opts);
  const Table rows = read_csv(dir / "figure3_summary.csv");
  fs::remove_all(dir);
  std::map<std::string, std::pair<double, double>> gap;
  for (const auto& row : rows) gap[row.at("policy")] = {num(row, "mean_gap"), num(row, "mean_gap_stderr")};
  if (!gap.count("ld_cartpole") || !gap.count("random")) return {false, "missing policy rows"};
  const auto [ld, ld_se] = gap["ld_cartpole"];
  const auto [rnd, rnd_se] = gap["random"];
  const double se = std::hypot(ld_se, rnd_se);
  return {rnd - ld > 3.0 * se,
          fmt::format("mean gap LD {:.3f} (se {:.3f}) vs random {:.3f} (se {:.3f})", ld, ld_se, rnd, rnd_se)};
}

Outcome contraction_monotone() {
  bool ok = true;
  double worst_excess = 0.0, worst_below = 0.0;
  for (const TabularMdp& m : tabular_envs()) {
    const auto v_star = value_iteration(m, {.eps = 1e-12}).values;
    ValueIterationOptions opts;
    opts.eps = 1e-12;
    opts.initial.assign(m.n_states(), m.r_max() / (1.0 - m.gamma()));
    opts.keep_history = true;
    const auto vi = value_iteration(m, opts);
    auto dist = [&](const std::vector<double>& v) {
      double d = 0.0;
      for (std::size_t x = 0; x < v.size(); ++x) d = std::max(d, std::abs(v[x] - v_star[x]));
      return d;
    };
    const double scale = m.r_max() / (1.0 - m.gamma());
    for (std::size_t k = 0; k + 1 < vi.history.size(); ++k) {
      const double excess = dist(vi.history[k + 1]) - m.gamma() * dist(vi.history[k]);
      worst_excess = std::max(worst_excess, excess);
      // V* carries at most 1e-12 * gamma / (1 - gamma) of stopping error on each side.
      ok &= excess <= (1.0 + m.gamma()) * 1e-12 * m.gamma() / (1.0 - m.gamma()) + 1e-14 * scale;
      for (std::size_t x = 0; x < m.n_states(); ++x) {
        const double below = v_star[x] - vi.history[k][x];
        worst_below = std::max(worst_below, below);
        ok &= below <= 1e-12 * scale;
      }
    }
  }
  return {ok, fmt::format("max contraction excess {:.1e}, max V* - V_k {:.1e} (round-off scale)",
                          worst_excess, worst_below)};
}

Outcome determinism() {
  const auto first = recorded_csv;
  if (first.empty()) return {false, "criteria 1 and 3 must run first"};
  recording = true;
  recorded_csv.clear();
  const unsigned saved = run_threads;
  run_threads = saved == 1 ? 4 : 1;
  toy_collapse();
  upper_bound_property();
  run_threads = saved;
  std::size_t same = 0;
  for (const auto& [name, csv] : first) same += recorded_csv.count(name) && recorded_csv[name] == csv;
  return {same == first.size() && !first.empty(),
          fmt::format("{}/{} bounds CSVs byte-identical with {} vs {} threads", same, first.size(), saved,
                      saved == 1 ? 4 : 1)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  if (only.count(11)) only.insert({1, 3});

  const std::vector<Criterion> criteria = {
      {1, "toy MDP exact collapse", 1.0, toy_collapse},
      {2, "martingale identity", 5.0, martingale_identity},
      {3, "upper-bound property on Chain and Garnet", 120.0, upper_bound_property},
      {4, "value-iteration snapshot gaps shrink on Chain and FrozenLake", 180.0, figure1_convergence},
      {5, "REINFORCE suboptimality signal on FrozenLake", 300.0, reinforce_signal},
      {6, "interpolation exactness and error bound", 30.0, interpolation_bound},
      {7, "covering-radius rate", 60.0, covering_rate},
      {8, "variance shrinkage near the optimum", 240.0, variance_shrinkage},
      {9, "CartPole policy ranking", 300.0, cartpole_ranking},
      {10, "contraction and monotone upper value iteration", 10.0, contraction_monotone},
      // Covered by reruns of criteria 1 and 3; the budget is theirs.
      {11, "determinism across thread counts", 121.0, determinism},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("%s %2d %s: %s [%.2f s of %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.title,
                o.detail.c_str(), secs, c.budget_seconds, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
