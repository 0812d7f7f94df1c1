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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "uvip/dp.hpp"
#include "uvip/lipschitz.hpp"
#include "uvip/mdp.hpp"
#include "uvip/policy.hpp"

namespace uvip {

/// How successor noise is shared across actions at one sample index.
enum class Coupling {
  shared,       // one noise vector per sample serves every action
  independent,  // a fresh noise vector per (sample, action)
};

enum class Resampling {
  fresh,   // new noise at every iteration
  frozen,  // one noise set drawn before the loop and reused
};

enum class ControlVariateMode {
  automatic,  // exact when a kernel and exact policy values exist, sampled otherwise
  exact,      // sum_y P(y | x, a) V^pi(y); requires a tabular kernel
  sampled,    // mean of V^pi over the first m1 successors
};

enum class PolicyValueMode {
  rollout,       // fresh truncated rollouts at every sampled successor
  interpolated,  // rollouts at the design points, then the central interpolant
};

struct UvipConfig {
  std::size_t m1 = 1000;
  std::size_t m2 = 1000;
  /// Design size for box models. Tabular models always use every state and
  /// accept only 0 or the state count here.
  std::size_t n_design = 0;
  double eps_stop = 1e-3;
  std::size_t k_max = 200;
  Coupling coupling = Coupling::shared;
  Resampling resampling = Resampling::fresh;
  ControlVariateMode control_variate = ControlVariateMode::automatic;
  std::size_t replicates = 1;
  std::uint64_t seed = 0;

  PolicyValueMode policy_value = PolicyValueMode::rollout;
  /// Rollouts per design point for the reported V^pi on box models.
  std::size_t policy_value_rollouts = 100;
  /// Rollouts averaged per sampled successor in rollout mode.
  std::size_t successor_rollouts = 1;
  /// Truncation error allowed in every rollout.
  double rollout_tol = 0.01;

  /// Fixed Lipschitz constant; re-estimated every iteration when empty.
  std::optional<double> lipschitz;
  /// Estimates above the cap are logged as warnings, never clamped.
  std::optional<double> lipschitz_cap;
  /// Covering-radius probe size for box models; 0 picks max(10^4, 100 N).
  std::size_t probe_size = 0;

  /// Worker count for sweeps. Results do not depend on it.
  unsigned threads = 1;

  bool operator==(const UvipConfig&) const = default;
};

const char* to_string(Coupling c) noexcept;
const char* to_string(Resampling r) noexcept;
const char* to_string(ControlVariateMode m) noexcept;
const char* to_string(PolicyValueMode m) noexcept;

/// Canonical one-line description of every field except `threads`.
std::string describe(const UvipConfig& cfg);

/// V^pi at arbitrary states: an exact tabular vector, fresh rollouts, or an
/// interpolant fitted to rollout estimates.
class PolicyValue {
 public:
  static PolicyValue exact(std::vector<double> values);
  /// Keeps references to `g` and `pi`; both must outlive the evaluator.
  static PolicyValue rollout(const GenerativeModel& g, const Policy& pi, std::size_t horizon,
                             std::size_t n_rollouts);
  static PolicyValue interpolated(Interpolant f);

  /// `rng` seeds the rollouts in rollout mode and is ignored otherwise.
  double operator()(StateView y, const Stream& rng) const;
  const std::vector<double>* exact_values() const noexcept;
  bool is_exact() const noexcept { return exact_values() != nullptr; }

 private:
  struct Rollout {
    const GenerativeModel* g;
    const Policy* pi;
    std::size_t horizon;
    std::size_t n;
  };
  explicit PolicyValue(std::variant<std::vector<double>, Rollout, Interpolant> v)
      : impl_(std::move(v)) {}
  std::variant<std::vector<double>, Rollout, Interpolant> impl_;
};

/// Current upper iterate, evaluable at any state.
using ValueFn = std::function<double(StateView)>;

/// Mean of V^pi over the successors psi(x, a, xi_l) for the m1 noise vectors
/// packed row-major in `xi_block`. Terminal successors count as 0.
double control_variate_mean(const GenerativeModel& g, const PolicyValue& v_pi, StateView x,
                            ActionIndex a, std::span<const double> xi_block,
                            const Stream& rollout_rng);

/// One application of the empirical upper operator at every design point:
///   V(x_i) = m2^-1 sum_j max_a { r(x_i, a) + gamma (V_cur(Y) - V^pi(Y) + Vbar(i, a)) }.
/// Noise for point i comes from a stream keyed by (seed, replicate, iteration,
/// i), so the result does not depend on thread count. Terminal design points
/// and terminal successors are worth 0.
std::vector<double> uvip_sweep(const GenerativeModel& g, const PolicyValue& v_pi,
                               const ValueFn& current, const DesignSet& design,
                               const UvipConfig& cfg, std::uint64_t replicate,
                               std::uint64_t iteration);

struct ReplicateTrace {
  std::vector<double> v_up;
  std::size_t iterations = 0;
  double last_change = 0.0;
  bool converged = false;
  /// Lipschitz constant of each interpolant built (box models only).
  std::vector<double> lipschitz;
  std::optional<Interpolant> interpolant;
};

struct BoundsReport {
  DesignSet design = DesignSet::tabular(1);
  bool tabular = true;
  std::vector<char> terminal;
  std::vector<double> v_pi;
  std::vector<double> v_pi_stderr;
  /// Mean over replicates.
  std::vector<double> v_up;
  /// Standard deviation over replicates divided by sqrt(replicates).
  std::vector<double> v_up_stderr;
  std::vector<double> gap;
  std::vector<ReplicateTrace> replicates;
  /// Covering radius of the design over the box (box models only).
  std::optional<CoveringEstimate> covering;
  double gamma = 0.0;
  double r_max = 0.0;
  std::string fingerprint;

  bool converged() const noexcept;
  std::size_t max_iterations() const noexcept;
  double max_last_change() const noexcept;
  /// Largest final Lipschitz constant over replicates; 0 for tabular runs.
  double lipschitz() const noexcept;
};

/// Runs the upper value iteration from V_0 = r_max / (1 - gamma) on every
/// replicate until the sup change over design points is <= eps_stop or
/// k_max sweeps have been done. Tabular models use exact policy values;
/// box models sample a design with `model.sample_state` and estimate V^pi by
/// rollouts.
BoundsReport uvip_run(const GenerativeModel& g, const Policy& pi, const UvipConfig& cfg);

/// max_x [ max_a { r + gamma P^a v }(x) - v(x) ]; <= 0 certifies an upper solution.
double upper_solution_check(const TabularMdp& m, std::span<const double> v_up);

/// max over (x, a) of | sum_y P(y | x, a) (V^pi(y) - (P^a V^pi)(x) - offset) |.
/// A nonzero `offset` perturbs the centring term for sensitivity checks.
double martingale_check(const TabularMdp& m, const Policy& pi, double offset = 0.0);

struct Interval {
  double lower;
  double upper;
};

/// Per design point: [v_pi, v_up + z(1 - delta) * stderr].
std::vector<Interval> confidence_interval(const BoundsReport& report, double delta);

struct UpperQuery {
  double v_up = 0.0;
  double std_error = 0.0;
  /// L * covering radius when x is off the design, else 0.
  double inflation = 0.0;
  bool on_design = false;
};

/// Each replicate's final upper iterate at x: the design value when x is a
/// design point, the replicate's interpolant otherwise.
std::vector<double> replicate_upper(const BoundsReport& report, StateView x);

/// Upper bound at an arbitrary state of a box model, averaged over replicate
/// interpolants. Tabular reports answer by state index.
UpperQuery query_upper(const BoundsReport& report, StateView x);

/// Sample variance over `n_reps` independent runs of the converged v_up at
/// each design point.
std::vector<double> variance_profile(const GenerativeModel& g, const Policy& pi,
                                     const UvipConfig& cfg, std::size_t n_reps);

}  // namespace uvip
