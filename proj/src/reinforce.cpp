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

#include <algorithm>
#include <cmath>

#include "uvip/dp.hpp"
#include "uvip/error.hpp"

namespace uvip {

namespace {

void softmax(std::span<const double> logits, std::span<double> out) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t a = 0; a < logits.size(); ++a) {
    out[a] = std::exp(logits[a] - top);
    total += out[a];
  }
  for (double& p : out) p /= total;
}

Policy softmax_policy(const std::vector<double>& theta, std::size_t n_actions) {
  StochasticPolicy p{n_actions, std::vector<double>(theta.size())};
  for (std::size_t off = 0; off < theta.size(); off += n_actions)
    softmax({theta.data() + off, n_actions}, {p.probs.data() + off, n_actions});
  return Policy(std::move(p));
}

}  // namespace

std::vector<PolicySnapshot> reinforce_tabular(const GenerativeModel& g,
                                              const ReinforceOptions& opts, Stream rng) {
  require(g.states().is_tabular(), ErrorCode::unsupported,
          "REINFORCE needs a tabular state space");
  require(opts.horizon >= 1, ErrorCode::invalid_argument, "REINFORCE horizon must be >= 1");
  const std::size_t n_states = g.states().count();
  const std::size_t n_actions = g.action_count();
  if (opts.start_state && *opts.start_state >= n_states)
    fail(ErrorCode::invalid_argument, "REINFORCE start state out of range");

  std::vector<double> theta(n_states * n_actions, 0.0);
  std::vector<PolicySnapshot> out;
  auto wants = [&](std::size_t k) {
    return std::find(opts.snapshot_at.begin(), opts.snapshot_at.end(), k) != opts.snapshot_at.end();
  };
  if (wants(0)) out.push_back({0, softmax_policy(theta, n_actions)});

  struct StepRecord {
    std::size_t state;
    ActionIndex action;
    double reward;
  };
  std::vector<StepRecord> episode;
  std::vector<double> probs(n_actions * (opts.horizon + 1));
  std::vector<double> xi(g.noise().dim);
  double baseline = 0.0;

  for (std::size_t ep = 1; ep <= opts.episodes; ++ep) {
    Stream ep_rng = rng.substream(ep);
    State s = opts.start_state ? tabular_state(*opts.start_state) : g.initial_state(ep_rng);
    State next(1);
    episode.clear();
    for (std::size_t t = 0; t < opts.horizon && !g.is_terminal(s); ++t) {
      const std::size_t x = tabular_index(s);
      std::span<double> pr{probs.data() + t * n_actions, n_actions};
      softmax({theta.data() + x * n_actions, n_actions}, pr);
      const double u = ep_rng.uniform();
      ActionIndex a = n_actions - 1;
      double cum = 0.0;
      for (ActionIndex b = 0; b + 1 < n_actions; ++b) {
        cum += pr[b];
        if (u < cum) {
          a = b;
          break;
        }
      }
      episode.push_back({x, a, g.reward(s, a)});
      sample_noise(g.noise(), ep_rng, xi);
      g.step(s, a, xi, next);
      s.swap(next);
    }

    double ret = 0.0;
    for (std::size_t t = episode.size(); t-- > 0;) {
      ret = episode[t].reward + g.gamma() * ret;
      const double advantage = ret - baseline;
      const auto& rec = episode[t];
      const double* pr = probs.data() + t * n_actions;
      for (ActionIndex b = 0; b < n_actions; ++b)
        theta[rec.state * n_actions + b] +=
            opts.learning_rate * advantage * ((b == rec.action ? 1.0 : 0.0) - pr[b]);
    }
    baseline += (ret - baseline) / static_cast<double>(ep);

    if (wants(ep)) out.push_back({ep, softmax_policy(theta, n_actions)});
  }
  return out;
}

}  // namespace uvip
