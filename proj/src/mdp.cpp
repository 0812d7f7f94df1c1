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

#include "uvip/mdp.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "uvip/error.hpp"

namespace uvip {

bool BoxSpace::contains(StateView x) const noexcept {
  if (x.size() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i)
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
  return true;
}

StateSpace StateSpace::tabular(std::size_t count) {
  require(count >= 1, ErrorCode::invalid_argument, "tabular state space needs at least one state");
  return StateSpace(TabularSpace{count});
}

StateSpace StateSpace::box(std::vector<double> lower, std::vector<double> upper) {
  require(!lower.empty(), ErrorCode::invalid_argument, "box state space needs dim >= 1");
  require(lower.size() == upper.size(), ErrorCode::dimension_mismatch,
          "box bounds have different lengths");
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (!(lower[i] < upper[i]))
      fail(ErrorCode::invalid_argument, fmt::format("box bound {} is empty: [{}, {}]", i,
                                                    lower[i], upper[i]));
  return StateSpace(BoxSpace{std::move(lower), std::move(upper)});
}

std::size_t StateSpace::dim() const noexcept {
  if (const auto* b = std::get_if<BoxSpace>(&space_)) return b->dim();
  return 1;
}

std::size_t StateSpace::count() const {
  const auto* t = std::get_if<TabularSpace>(&space_);
  require(t != nullptr, ErrorCode::unsupported, "state count requested for a continuous space");
  return t->count;
}

const BoxSpace& StateSpace::as_box() const {
  const auto* b = std::get_if<BoxSpace>(&space_);
  require(b != nullptr, ErrorCode::unsupported, "expected a box state space");
  return *b;
}

bool StateSpace::contains(StateView x) const noexcept {
  if (const auto* b = std::get_if<BoxSpace>(&space_)) return b->contains(x);
  const auto& t = std::get<TabularSpace>(space_);
  return x.size() == 1 && x[0] >= 0.0 && x[0] < static_cast<double>(t.count) &&
         x[0] == std::floor(x[0]);
}

void sample_noise(const NoiseSpec& noise, Stream& rng, std::span<double> out) {
  for (std::size_t i = 0; i < noise.dim; ++i)
    out[i] = noise.family == NoiseFamily::uniform ? rng.uniform() : rng.normal();
}

std::vector<double> sample_noise(const NoiseSpec& noise, Stream& rng) {
  std::vector<double> out(noise.dim);
  sample_noise(noise, rng, out);
  return out;
}

GenerativeModel::GenerativeModel(std::string name, StateSpace states, std::size_t actions,
                                 NoiseSpec noise, double gamma, double r_max)
    : name_(std::move(name)),
      states_(std::move(states)),
      actions_(actions),
      noise_(noise),
      gamma_(gamma),
      r_max_(r_max) {
  require(actions_ >= 1, ErrorCode::invalid_argument, "action set must be non-empty");
  require(noise_.dim >= 1, ErrorCode::invalid_argument, "noise dimension must be >= 1");
  require(gamma_ >= 0.0 && gamma_ < 1.0, ErrorCode::invalid_argument,
          "discount must lie in [0, 1)");
  require(r_max_ >= 0.0 && std::isfinite(r_max_), ErrorCode::invalid_argument,
          "r_max must be finite and nonnegative");
}

State GenerativeModel::sample_state(Stream& rng) const {
  if (states_.is_tabular()) return tabular_state(rng.below(states_.count()));
  const BoxSpace& box = states_.as_box();
  State x(box.dim());
  for (std::size_t i = 0; i < box.dim(); ++i)
    x[i] = box.lower[i] + (box.upper[i] - box.lower[i]) * rng.uniform();
  return x;
}

State transition(const GenerativeModel& m, StateView x, ActionIndex a,
                 std::span<const double> xi) {
  if (a >= m.action_count())
    fail(ErrorCode::invalid_argument,
         fmt::format("action index {} out of range (count {})", a, m.action_count()));
  if (xi.size() != m.noise().dim)
    fail(ErrorCode::dimension_mismatch,
         fmt::format("noise has {} entries, model expects {}", xi.size(), m.noise().dim));
  if (x.size() != m.state_dim())
    fail(ErrorCode::dimension_mismatch,
         fmt::format("state has {} entries, model expects {}", x.size(), m.state_dim()));
  State out(m.state_dim());
  m.step(x, a, xi, out);
  return out;
}

TabularMdp::TabularMdp(std::size_t n_states, std::size_t n_actions, double gamma)
    : n_states_(n_states),
      n_actions_(n_actions),
      gamma_(gamma),
      kernel_(n_states * n_actions * n_states, 0.0),
      reward_(n_states * n_actions, 0.0) {
  require(n_states >= 1 && n_actions >= 1, ErrorCode::invalid_argument,
          "tabular MDP needs at least one state and one action");
  require(gamma >= 0.0 && gamma < 1.0, ErrorCode::invalid_argument,
          "discount must lie in [0, 1)");
}

double TabularMdp::r_max() const noexcept {
  double r = 0.0;
  for (double v : reward_) r = std::max(r, std::abs(v));
  return r;
}

bool TabularMdp::is_terminal(std::size_t x) const {
  for (ActionIndex a = 0; a < n_actions_; ++a)
    if (p(x, a, x) != 1.0 || reward(x, a) != 0.0) return false;
  return true;
}

std::vector<RowViolation> validate_tabular(const TabularMdp& m, double tol) {
  std::vector<RowViolation> out;
  for (std::size_t x = 0; x < m.n_states(); ++x) {
    for (ActionIndex a = 0; a < m.n_actions(); ++a) {
      double sum = 0.0;
      bool negative = false;
      for (double p : m.row(x, a)) {
        sum += p;
        negative = negative || p < 0.0 || !std::isfinite(p);
      }
      if (negative || !(std::abs(sum - 1.0) <= tol) || !std::isfinite(m.reward(x, a)))
        out.push_back({x, a, sum, negative});
    }
  }
  return out;
}

ActionValues kernel_apply(const TabularMdp& m, std::span<const double> v) {
  if (v.size() != m.n_states())
    fail(ErrorCode::dimension_mismatch,
         fmt::format("value vector has {} entries, MDP has {} states", v.size(), m.n_states()));
  ActionValues out(m.n_states(), m.n_actions());
  for (std::size_t x = 0; x < m.n_states(); ++x)
    for (ActionIndex a = 0; a < m.n_actions(); ++a) {
      double s = 0.0;
      const auto row = m.row(x, a);
      for (std::size_t y = 0; y < row.size(); ++y) s += row[y] * v[y];
      out(x, a) = s;
    }
  return out;
}

namespace {

class TabularGenerativeModel final : public GenerativeModel {
 public:
  TabularGenerativeModel(const TabularMdp& m, TabularSampling sampling, std::string name,
                         double r_max)
      : GenerativeModel(std::move(name), StateSpace::tabular(m.n_states()), m.n_actions(),
                        NoiseSpec{sampling == TabularSampling::shared ? 1 : m.n_actions(),
                                  NoiseFamily::uniform},
                        m.gamma(), r_max),
        mdp_(m),
        sampling_(sampling),
        offsets_(m.n_states() * m.n_actions() + 1, 0),
        terminal_(m.n_states(), 0) {
    // Compressed cumulative rows: only successors with positive mass.
    for (std::size_t x = 0; x < m.n_states(); ++x) {
      terminal_[x] = m.is_terminal(x) ? 1 : 0;
      for (ActionIndex a = 0; a < m.n_actions(); ++a) {
        double cum = 0.0;
        const auto row = m.row(x, a);
        for (std::size_t y = 0; y < row.size(); ++y) {
          if (row[y] <= 0.0) continue;
          cum += row[y];
          cumulative_.push_back(cum);
          successor_.push_back(static_cast<double>(y));
        }
        offsets_[x * m.n_actions() + a + 1] = cumulative_.size();
      }
    }
  }

  void step(StateView x, ActionIndex a, std::span<const double> xi,
            std::span<double> out) const override {
    const std::size_t s = tabular_index(x);
    const double u = sampling_ == TabularSampling::shared ? xi[0] : xi[a];
    const std::size_t row = s * action_count() + a;
    const std::size_t begin = offsets_[row];
    const std::size_t end = offsets_[row + 1];
    std::size_t k = begin;
    while (k + 1 < end && !(cumulative_[k] > u)) ++k;
    out[0] = successor_[k];
  }

  double reward(StateView x, ActionIndex a) const override {
    return mdp_.reward(tabular_index(x), a);
  }

  bool is_terminal(StateView x) const override { return terminal_[tabular_index(x)] != 0; }

  State initial_state(Stream& rng) const override {
    if (mdp_.start_state) return tabular_state(*mdp_.start_state);
    return sample_state(rng);
  }

  const TabularMdp* tabular() const noexcept override { return &mdp_; }

 private:
  TabularMdp mdp_;
  TabularSampling sampling_;
  std::vector<std::size_t> offsets_;
  std::vector<double> cumulative_;
  std::vector<double> successor_;
  std::vector<char> terminal_;
};

}  // namespace

std::shared_ptr<const GenerativeModel> tabular_to_generative(const TabularMdp& m,
                                                             TabularSampling sampling,
                                                             std::string name,
                                                             std::optional<double> r_max) {
  const auto violations = validate_tabular(m);
  if (!violations.empty()) {
    const auto& v = violations.front();
    fail(ErrorCode::invalid_model,
         fmt::format("kernel row (x={}, a={}) is not a distribution (sum {}, negative {}); "
                     "{} invalid row(s)",
                     v.state, v.action, v.sum, v.has_negative, violations.size()));
  }
  const double bound = r_max.value_or(m.r_max());
  if (bound < m.r_max())
    fail(ErrorCode::invalid_argument,
         fmt::format("declared r_max {} is below the largest |reward| {}", bound, m.r_max()));
  return std::make_shared<TabularGenerativeModel>(m, sampling, std::move(name), bound);
}

}  // namespace uvip
