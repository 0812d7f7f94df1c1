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

#include "uvip/upper_iteration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>
#include <fmt/core.h>

#include "uvip/error.hpp"
#include "uvip/hash.hpp"
#include "uvip/log.hpp"
#include "uvip/parallel.hpp"

namespace uvip {

const char* to_string(Coupling c) noexcept {
  return c == Coupling::shared ? "shared" : "independent";
}

const char* to_string(Resampling r) noexcept {
  return r == Resampling::fresh ? "fresh" : "frozen";
}

const char* to_string(ControlVariateMode m) noexcept {
  switch (m) {
    case ControlVariateMode::automatic: return "auto";
    case ControlVariateMode::exact: return "exact";
    case ControlVariateMode::sampled: return "sampled";
  }
  return "?";
}

const char* to_string(PolicyValueMode m) noexcept {
  return m == PolicyValueMode::rollout ? "rollout" : "interpolated";
}

std::string describe(const UvipConfig& cfg) {
  return fmt::format(
      "m1={} m2={} n_design={} eps_stop={} k_max={} coupling={} resampling={} "
      "control_variate={} replicates={} seed={} policy_value={} policy_value_rollouts={} "
      "successor_rollouts={} rollout_tol={} lipschitz={} lipschitz_cap={} probe_size={}",
      cfg.m1, cfg.m2, cfg.n_design, cfg.eps_stop, cfg.k_max, to_string(cfg.coupling),
      to_string(cfg.resampling), to_string(cfg.control_variate), cfg.replicates, cfg.seed,
      to_string(cfg.policy_value), cfg.policy_value_rollouts, cfg.successor_rollouts,
      cfg.rollout_tol, cfg.lipschitz ? fmt::format("{}", *cfg.lipschitz) : "estimated",
      cfg.lipschitz_cap ? fmt::format("{}", *cfg.lipschitz_cap) : "none", cfg.probe_size);
}

// ---------------------------------------------------------------------------
// PolicyValue

PolicyValue PolicyValue::exact(std::vector<double> values) { return PolicyValue(std::move(values)); }

PolicyValue PolicyValue::rollout(const GenerativeModel& g, const Policy& pi, std::size_t horizon,
                                 std::size_t n_rollouts) {
  require(horizon >= 1 && n_rollouts >= 1, ErrorCode::invalid_argument,
          "rollout evaluator needs horizon and rollout count >= 1");
  return PolicyValue(Rollout{&g, &pi, horizon, n_rollouts});
}

PolicyValue PolicyValue::interpolated(Interpolant f) { return PolicyValue(std::move(f)); }

double PolicyValue::operator()(StateView y, const Stream& rng) const {
  if (const auto* v = std::get_if<std::vector<double>>(&impl_)) return (*v)[tabular_index(y)];
  if (const auto* r = std::get_if<Rollout>(&impl_))
    return policy_value_rollout(*r->g, *r->pi, y, r->horizon, r->n, rng).mean;
  return std::get<Interpolant>(impl_)(y);
}

const std::vector<double>* PolicyValue::exact_values() const noexcept {
  return std::get_if<std::vector<double>>(&impl_);
}

// ---------------------------------------------------------------------------
// Sweep

namespace {

// Tags separating the rollout streams of the two sample blocks.
constexpr std::uint64_t cv_block = 1;
constexpr std::uint64_t outer_block = 2;

bool use_exact_cv(const UvipConfig& cfg, const GenerativeModel& g, const PolicyValue& v_pi) {
  const bool available = g.tabular() != nullptr && v_pi.is_exact();
  switch (cfg.control_variate) {
    case ControlVariateMode::automatic: return available;
    case ControlVariateMode::exact:
      require(available, ErrorCode::invalid_argument,
              "exact control variate needs a tabular kernel and exact policy values");
      return true;
    case ControlVariateMode::sampled: return false;
  }
  return false;
}

}  // namespace

double control_variate_mean(const GenerativeModel& g, const PolicyValue& v_pi, StateView x,
                            ActionIndex a, std::span<const double> xi_block,
                            const Stream& rollout_rng) {
  const std::size_t nd = g.noise().dim;
  require(!xi_block.empty() && xi_block.size() % nd == 0, ErrorCode::dimension_mismatch,
          "noise block must hold a positive multiple of the noise dimension");
  require(a < g.action_count(), ErrorCode::invalid_argument, "action index out of range");
  const std::size_t m1 = xi_block.size() / nd;
  State y(g.state_dim());
  double sum = 0.0;
  for (std::size_t l = 0; l < m1; ++l) {
    g.step(x, a, xi_block.subspan(l * nd, nd), y);
    if (!g.is_terminal(y)) sum += v_pi(y, rollout_rng.substream(l));
  }
  return sum / static_cast<double>(m1);
}

std::vector<double> uvip_sweep(const GenerativeModel& g, const PolicyValue& v_pi,
                               const ValueFn& current, const DesignSet& design,
                               const UvipConfig& cfg, std::uint64_t replicate,
                               std::uint64_t iteration) {
  require(cfg.m2 >= 1, ErrorCode::invalid_argument, "m2 must be >= 1");
  require(design.dim() == g.state_dim(), ErrorCode::dimension_mismatch,
          "design dimension differs from the model state dimension");
  const bool exact_cv = use_exact_cv(cfg, g, v_pi);
  require(exact_cv || cfg.m1 >= 1, ErrorCode::invalid_argument, "m1 must be >= 1");

  const std::size_t n = design.size();
  const std::size_t n_actions = g.action_count();
  const std::size_t nd = g.noise().dim;
  const std::size_t dim = g.state_dim();
  const double gamma = g.gamma();
  const std::uint64_t iter_key = cfg.resampling == Resampling::fresh ? iteration : 0;
  const bool shared = cfg.coupling == Coupling::shared;

  std::vector<double> out(n, 0.0);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    const StateView x = design.point(i);
    if (g.is_terminal(x)) return;
    Stream rng(cfg.seed, {stream_tag::sweep, replicate, iter_key, i});
    const Stream rollouts = rng.substream(stream_tag::successor_rollout);

    std::vector<double> reward(n_actions), cv(n_actions, 0.0);
    for (ActionIndex a = 0; a < n_actions; ++a) reward[a] = g.reward(x, a);

    if (exact_cv) {
      const TabularMdp& m = *g.tabular();
      const std::vector<double>& v = *v_pi.exact_values();
      const std::size_t s = tabular_index(x);
      for (ActionIndex a = 0; a < n_actions; ++a) {
        const auto row = m.row(s, a);
        double acc = 0.0;
        for (std::size_t y = 0; y < row.size(); ++y) acc += row[y] * v[y];
        cv[a] = acc;
      }
    } else {
      const Stream cv_rollouts = rollouts.substream(cv_block);
      std::vector<double> block(cfg.m1 * nd);
      for (ActionIndex a = 0; a < n_actions; ++a) {
        if (a == 0 || !shared) sample_noise(g.noise(), rng, block);
        cv[a] = control_variate_mean(g, v_pi, x, a, block, cv_rollouts.substream(a));
      }
    }

    const Stream outer_rollouts = rollouts.substream(outer_block);
    std::vector<double> xi(nd);
    State y(dim);
    double sum = 0.0;
    for (std::size_t j = 0; j < cfg.m2; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      for (ActionIndex a = 0; a < n_actions; ++a) {
        if (a == 0 || !shared) sample_noise(g.noise(), rng, xi);
        g.step(x, a, xi, y);
        double continuation = 0.0;
        if (!g.is_terminal(y))
          continuation = current(y) - v_pi(y, outer_rollouts.substream(j * n_actions + a));
        best = std::max(best, reward[a] + gamma * (continuation + cv[a]));
      }
      sum += best;
    }
    out[i] = sum / static_cast<double>(cfg.m2);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Run

bool BoundsReport::converged() const noexcept {
  return std::all_of(replicates.begin(), replicates.end(),
                     [](const ReplicateTrace& r) { return r.converged; });
}

std::size_t BoundsReport::max_iterations() const noexcept {
  std::size_t k = 0;
  for (const auto& r : replicates) k = std::max(k, r.iterations);
  return k;
}

double BoundsReport::max_last_change() const noexcept {
  double c = 0.0;
  for (const auto& r : replicates) c = std::max(c, r.last_change);
  return c;
}

double BoundsReport::lipschitz() const noexcept {
  double l = 0.0;
  for (const auto& r : replicates)
    if (!r.lipschitz.empty()) l = std::max(l, r.lipschitz.back());
  return l;
}

namespace {

void validate(const UvipConfig& cfg) {
  require(cfg.m1 >= 1, ErrorCode::invalid_argument, "m1 must be >= 1");
  require(cfg.m2 >= 1, ErrorCode::invalid_argument, "m2 must be >= 1");
  require(cfg.eps_stop > 0.0, ErrorCode::invalid_argument, "eps_stop must be positive");
  require(cfg.k_max >= 1, ErrorCode::invalid_argument, "k_max must be >= 1");
  require(cfg.replicates >= 1, ErrorCode::invalid_argument, "replicates must be >= 1");
  require(cfg.policy_value_rollouts >= 1 && cfg.successor_rollouts >= 1,
          ErrorCode::invalid_argument, "rollout counts must be >= 1");
  require(cfg.rollout_tol > 0.0, ErrorCode::invalid_argument, "rollout_tol must be positive");
  if (cfg.lipschitz)
    require(*cfg.lipschitz >= 0.0, ErrorCode::invalid_argument,
            "fixed Lipschitz constant must be nonnegative");
}

std::string policy_fingerprint(const Policy& pi) {
  return pi.is_tabular() ? format_policy(pi) : pi.describe();
}

struct Interpolated {
  DesignSet design;
  std::vector<std::size_t> keep;  // design indices that enter the interpolant
};

Interpolated non_terminal(const DesignSet& design, const std::vector<char>& terminal) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < design.size(); ++i)
    if (!terminal[i]) keep.push_back(i);
  return {design.filter([&](std::size_t i) { return !terminal[i]; }), std::move(keep)};
}

ReplicateTrace run_replicate(const GenerativeModel& g, const PolicyValue& v_pi,
                             const DesignSet& design, const std::vector<char>& terminal,
                             const UvipConfig& cfg, std::uint64_t replicate) {
  const double v0 = g.r_max() / (1.0 - g.gamma());
  const std::size_t n = design.size();
  const bool tabular = g.states().is_tabular();
  const Interpolated support = tabular ? Interpolated{design, {}} : non_terminal(design, terminal);

  ReplicateTrace trace;
  std::vector<double> cur(n, v0);
  for (std::size_t i = 0; i < n; ++i)
    if (terminal[i]) cur[i] = 0.0;

  std::optional<Interpolant> interp;
  ValueFn current;
  if (tabular)
    current = [&cur](StateView y) { return cur[tabular_index(y)]; };
  else
    current = [v0](StateView) { return v0; };

  for (std::size_t k = 1; k <= cfg.k_max; ++k) {
    std::vector<double> next = uvip_sweep(g, v_pi, current, design, cfg, replicate, k);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(next[i] - cur[i]));
    cur.swap(next);

    if (!tabular) {
      if (support.keep.empty()) {
        current = [](StateView) { return 0.0; };
      } else {
        std::vector<double> values(support.keep.size());
        for (std::size_t p = 0; p < values.size(); ++p) values[p] = cur[support.keep[p]];
        interp.emplace(build_interpolant(support.design, std::move(values), cfg.lipschitz));
        const double lip = interp->lipschitz();
        trace.lipschitz.push_back(lip);
        if (cfg.lipschitz_cap && lip > *cfg.lipschitz_cap)
          log_message(LogLevel::warning,
                      fmt::format("replicate {} iteration {}: Lipschitz estimate {} exceeds cap {}",
                                  replicate, k, lip, *cfg.lipschitz_cap));
        current = [&interp](StateView y) { return (*interp)(y); };
      }
    }
    trace.iterations = k;
    trace.last_change = change;
    log_message(LogLevel::debug,
                fmt::format("replicate {} iteration {}: sup change {}", replicate, k, change));
    if (change <= cfg.eps_stop) {
      trace.converged = true;
      break;
    }
  }
  if (!trace.converged)
    log_message(LogLevel::warning,
                fmt::format("replicate {} stopped at k_max = {} with sup change {}", replicate,
                            cfg.k_max, trace.last_change));
  trace.v_up = std::move(cur);
  trace.interpolant = std::move(interp);
  return trace;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Standard error of the mean; exactly 0 when every sample is equal.
double stderr_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double n = static_cast<double>(v.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace

BoundsReport uvip_run(const GenerativeModel& g, const Policy& pi, const UvipConfig& cfg) {
  validate(cfg);
  BoundsReport report;
  report.gamma = g.gamma();
  report.r_max = g.r_max();
  report.tabular = g.states().is_tabular();

  std::optional<PolicyValue> v_pi_fn;
  if (report.tabular) {
    const std::size_t n = g.states().count();
    if (cfg.n_design != 0 && cfg.n_design != n)
      fail(ErrorCode::invalid_argument,
           fmt::format("tabular models use all {} states as design; n_design = {}", n, cfg.n_design));
    report.design = DesignSet::tabular(n);
    if (g.tabular()) {
      report.v_pi = policy_value_exact(*g.tabular(), pi);
      report.v_pi_stderr.assign(n, 0.0);
      v_pi_fn = PolicyValue::exact(report.v_pi);
    }
  } else {
    require(cfg.n_design >= 1, ErrorCode::invalid_argument,
            "box models need n_design >= 1");
    report.design = sample_design(g, cfg.n_design, Stream(cfg.seed, {stream_tag::design}));
    report.covering = covering_radius_box(report.design, g.states().as_box(),
                                          Stream(cfg.seed, {stream_tag::probe}), cfg.probe_size);
  }

  const DesignSet& design = report.design;
  const std::size_t n = design.size();
  report.terminal.resize(n);
  for (std::size_t i = 0; i < n; ++i) report.terminal[i] = g.is_terminal(design.point(i)) ? 1 : 0;

  if (!v_pi_fn) {
    const std::size_t horizon = rollout_horizon(cfg.rollout_tol, g.gamma(), g.r_max());
    report.v_pi.assign(n, 0.0);
    report.v_pi_stderr.assign(n, 0.0);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
      if (report.terminal[i]) return;
      const auto est = policy_value_rollout(g, pi, design.point(i), horizon,
                                            cfg.policy_value_rollouts,
                                            Stream(cfg.seed, {stream_tag::policy_value, i}));
      report.v_pi[i] = est.mean;
      report.v_pi_stderr[i] = est.std_error;
    });
    if (cfg.policy_value == PolicyValueMode::interpolated) {
      const Interpolated support = non_terminal(design, report.terminal);
      require(!support.keep.empty(), ErrorCode::invalid_argument,
              "every design point is terminal; nothing to interpolate");
      std::vector<double> values(support.keep.size());
      for (std::size_t p = 0; p < values.size(); ++p) values[p] = report.v_pi[support.keep[p]];
      v_pi_fn = PolicyValue::interpolated(build_interpolant(support.design, std::move(values)));
    } else {
      v_pi_fn = PolicyValue::rollout(g, pi, horizon, cfg.successor_rollouts);
    }
  }
  use_exact_cv(cfg, g, *v_pi_fn);  // rejects an impossible exact request up front

  report.replicates.reserve(cfg.replicates);
  for (std::size_t r = 0; r < cfg.replicates; ++r)
    report.replicates.push_back(run_replicate(g, *v_pi_fn, design, report.terminal, cfg, r));

  report.v_up.resize(n);
  report.v_up_stderr.resize(n);
  report.gap.resize(n);
  std::vector<double> samples(cfg.replicates);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < cfg.replicates; ++r) samples[r] = report.replicates[r].v_up[i];
    report.v_up[i] = mean_of(samples);
    report.v_up_stderr[i] = stderr_of(samples, report.v_up[i]);
    report.gap[i] = report.v_up[i] - report.v_pi[i];
  }
  report.fingerprint = sha1_hex(fmt::format("{}\n{}\n{}", describe(cfg), g.name(),
                                            policy_fingerprint(pi)));
  return report;
}

// ---------------------------------------------------------------------------
// Diagnostics

double upper_solution_check(const TabularMdp& m, std::span<const double> v_up) {
  if (v_up.size() != m.n_states())
    fail(ErrorCode::dimension_mismatch,
         fmt::format("{} values for {} states", v_up.size(), m.n_states()));
  const QTable q = bellman_q(m, v_up);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < m.n_states(); ++x) {
    const auto row = q.row(x);
    worst = std::max(worst, *std::max_element(row.begin(), row.end()) - v_up[x]);
  }
  return worst;
}

double martingale_check(const TabularMdp& m, const Policy& pi, double offset) {
  const std::vector<double> v = policy_value_exact(m, pi);
  const ActionValues pv = kernel_apply(m, v);
  double worst = 0.0;
  for (std::size_t x = 0; x < m.n_states(); ++x)
    for (ActionIndex a = 0; a < m.n_actions(); ++a) {
      const double centre = pv(x, a) + offset;
      const auto row = m.row(x, a);
      double acc = 0.0;
      for (std::size_t y = 0; y < row.size(); ++y) acc += row[y] * (v[y] - centre);
      worst = std::max(worst, std::abs(acc));
    }
  return worst;
}

std::vector<Interval> confidence_interval(const BoundsReport& report, double delta) {
  require(report.replicates.size() >= 2, ErrorCode::invalid_argument,
          "confidence intervals need at least 2 replicates");
  require(delta > 0.0 && delta < 1.0, ErrorCode::invalid_argument, "delta must lie in (0, 1)");
  const double z = boost::math::quantile(boost::math::normal(), 1.0 - delta);
  std::vector<Interval> out(report.v_up.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = {report.v_pi[i], report.v_up[i] + z * report.v_up_stderr[i]};
  return out;
}

namespace {

std::optional<std::size_t> on_design(const BoundsReport& report, StateView x) {
  if (report.tabular) {
    const std::size_t s = tabular_index(x);
    require(s < report.v_up.size(), ErrorCode::invalid_argument, "state index out of range");
    return s;
  }
  const DesignSet& d = report.design;
  require(x.size() == d.dim(), ErrorCode::dimension_mismatch, "query dimension mismatch");
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.metric().distance(x, d.point(i)) == 0.0) return i;
  return std::nullopt;
}

}  // namespace

std::vector<double> replicate_upper(const BoundsReport& report, StateView x) {
  std::vector<double> out;
  out.reserve(report.replicates.size());
  const auto i = on_design(report, x);
  for (const auto& r : report.replicates)
    out.push_back(i ? r.v_up[*i] : r.interpolant ? (*r.interpolant)(x) : 0.0);
  return out;
}

UpperQuery query_upper(const BoundsReport& report, StateView x) {
  if (const auto i = on_design(report, x)) return {report.v_up[*i], report.v_up_stderr[*i], 0.0, true};
  UpperQuery q;
  const std::vector<double> samples = replicate_upper(report, x);
  q.v_up = mean_of(samples);
  q.std_error = stderr_of(samples, q.v_up);
  q.inflation = report.covering ? report.lipschitz() * report.covering->radius : 0.0;
  return q;
}

std::vector<double> variance_profile(const GenerativeModel& g, const Policy& pi,
                                     const UvipConfig& cfg, std::size_t n_reps) {
  require(n_reps >= 10, ErrorCode::invalid_argument, "variance profile needs n_reps >= 10");
  UvipConfig c = cfg;
  c.replicates = n_reps;
  const BoundsReport report = uvip_run(g, pi, c);
  std::vector<double> out(report.v_up.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double ss = 0.0;
    for (const auto& r : report.replicates) ss += (r.v_up[i] - report.v_up[i]) * (r.v_up[i] - report.v_up[i]);
    out[i] = ss / static_cast<double>(n_reps - 1);
  }
  return out;
}

}  // namespace uvip
