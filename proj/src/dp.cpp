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

#include "uvip/dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <fmt/core.h>

#include "uvip/error.hpp"

namespace uvip {

QTable bellman_q(const TabularMdp& m, std::span<const double> v) {
  QTable q = kernel_apply(m, v);
  for (std::size_t x = 0; x < m.n_states(); ++x)
    for (ActionIndex a = 0; a < m.n_actions(); ++a)
      q(x, a) = m.reward(x, a) + m.gamma() * q(x, a);
  return q;
}

ValueIterationResult value_iteration(const TabularMdp& m, const ValueIterationOptions& opts) {
  require(opts.eps > 0.0, ErrorCode::invalid_argument, "value iteration eps must be positive");
  const std::size_t n = m.n_states();
  ValueIterationResult out;
  std::vector<double> v = opts.initial.empty() ? std::vector<double>(n, 0.0) : opts.initial;
  if (v.size() != n)
    fail(ErrorCode::dimension_mismatch,
         fmt::format("initial values have {} entries, MDP has {} states", v.size(), n));
  if (opts.keep_history) out.history.push_back(v);

  std::vector<double> next(n);
  for (std::size_t k = 1; k <= opts.max_iterations; ++k) {
    QTable q = bellman_q(m, v);
    double change = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      const auto row = q.row(x);
      next[x] = *std::max_element(row.begin(), row.end());
      change = std::max(change, std::abs(next[x] - v[x]));
    }
    v.swap(next);
    out.iterations = k;
    if (opts.keep_history) out.history.push_back(v);
    if (std::find(opts.snapshot_at.begin(), opts.snapshot_at.end(), k) != opts.snapshot_at.end())
      out.snapshots.push_back({k, v, q});
    out.q = std::move(q);
    if (change <= opts.eps) break;
  }
  out.values = v;
  return out;
}

Policy greedy_policy(const QTable& q) {
  DeterministicPolicy p;
  p.actions.resize(q.n_states());
  for (std::size_t x = 0; x < q.n_states(); ++x) {
    const auto row = q.row(x);
    if (!std::all_of(row.begin(), row.end(), [](double v) { return std::isfinite(v); }))
      fail(ErrorCode::invalid_argument, fmt::format("Q row {} is not finite", x));
    // max_element returns the first maximum.
    p.actions[x] = static_cast<ActionIndex>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return Policy(std::move(p));
}

std::vector<double> policy_value_exact(const TabularMdp& m, const Policy& pi,
                                       std::size_t direct_limit) {
  const std::size_t n = m.n_states();
  const std::size_t na = m.n_actions();
  pi.check_tabular(n, na);

  Eigen::MatrixXd p_pi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::VectorXd r_pi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t x = 0; x < n; ++x)
    for (ActionIndex a = 0; a < na; ++a) {
      const double w = pi.probability(x, a, na);
      if (w == 0.0) continue;
      r_pi[static_cast<Eigen::Index>(x)] += w * m.reward(x, a);
      const auto row = m.row(x, a);
      for (std::size_t y = 0; y < n; ++y)
        p_pi(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) += w * row[y];
    }

  Eigen::VectorXd v;
  if (n <= direct_limit) {
    const Eigen::MatrixXd system =
        Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) -
        m.gamma() * p_pi;
    v = system.partialPivLu().solve(r_pi);
  } else {
    v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (;;) {
      Eigen::VectorXd next = r_pi + m.gamma() * (p_pi * v);
      const double change = (next - v).cwiseAbs().maxCoeff();
      v.swap(next);
      if (change <= 1e-12) break;
    }
  }
  return {v.data(), v.data() + v.size()};
}

std::size_t rollout_horizon(double tol, double gamma, double r_max) {
  require(tol > 0.0, ErrorCode::invalid_argument, "rollout tolerance must be positive");
  if (gamma <= 0.0 || r_max <= 0.0) return 1;
  const double ratio = tol * (1.0 - gamma) / r_max;
  if (ratio >= 1.0) return 1;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::log(ratio) / std::log(gamma))));
}

double discounted_return(const GenerativeModel& g, const Policy& pi, StateView x,
                         std::size_t horizon, Stream& rng) {
  State s(x.begin(), x.end());
  State next(s.size());
  std::vector<double> xi(g.noise().dim);
  double ret = 0.0;
  double discount = 1.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    if (g.is_terminal(s)) break;
    const ActionIndex a = pi.act(s, rng);
    ret += discount * g.reward(s, a);
    discount *= g.gamma();
    sample_noise(g.noise(), rng, xi);
    g.step(s, a, xi, next);
    s.swap(next);
  }
  return ret;
}

RolloutEstimate policy_value_rollout(const GenerativeModel& g, const Policy& pi, StateView x,
                                     std::size_t horizon, std::size_t n_rollouts,
                                     const Stream& rng) {
  require(horizon >= 1, ErrorCode::invalid_argument, "rollout horizon must be >= 1");
  require(n_rollouts >= 1, ErrorCode::invalid_argument, "need at least one rollout");
  std::vector<double> returns(n_rollouts);
  for (std::size_t i = 0; i < n_rollouts; ++i) {
    Stream s = rng.substream(i);
    returns[i] = discounted_return(g, pi, x, horizon, s);
  }
  const double n = static_cast<double>(n_rollouts);
  RolloutEstimate est;
  const auto [lo, hi] = std::minmax_element(returns.begin(), returns.end());
  if (*lo == *hi) {
    est.mean = *lo;
    return est;
  }
  for (double r : returns) est.mean += r;
  est.mean /= n;
  {
    double ss = 0.0;
    for (double r : returns) ss += (r - est.mean) * (r - est.mean);
    est.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return est;
}

double bellman_residual(const TabularMdp& m, std::span<const double> v) {
  const QTable q = bellman_q(m, v);
  double worst = 0.0;
  for (std::size_t x = 0; x < m.n_states(); ++x) {
    const auto row = q.row(x);
    worst = std::max(worst, std::abs(v[x] - *std::max_element(row.begin(), row.end())));
  }
  return worst;
}

}  // namespace uvip
