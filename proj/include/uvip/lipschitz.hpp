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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uvip/mdp.hpp"

namespace uvip {

enum class MetricKind { discrete, euclidean };

/// State metric. Euclidean distances are taken after multiplying coordinate
/// i by scale[i] (empty scale = unit weights), so a box can be measured in
/// normalized [0, 1]^d units.
struct Metric {
  MetricKind kind = MetricKind::euclidean;
  std::vector<double> scale;

  static Metric discrete() { return {MetricKind::discrete, {}}; }
  static Metric euclidean() { return {MetricKind::euclidean, {}}; }
  /// Euclidean in coordinates normalized by the box extents.
  static Metric normalized(const BoxSpace& box);
  /// Discrete for tabular spaces, normalized Euclidean for boxes.
  static Metric for_space(const StateSpace& space);

  double distance(StateView a, StateView b) const noexcept;
  bool operator==(const Metric&) const = default;
};

/// Design points x_1..x_N stored row-major.
class DesignSet {
 public:
  DesignSet(std::size_t dim, std::vector<double> coords, Metric metric);
  /// All states 0..n-1 of a tabular space under the discrete metric.
  static DesignSet tabular(std::size_t n_states);

  std::size_t size() const noexcept { return coords_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  StateView point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
  const std::vector<double>& coords() const noexcept { return coords_; }
  const Metric& metric() const noexcept { return metric_; }

  /// Keeps the points whose index passes `keep`.
  template <class Pred>
  DesignSet filter(Pred keep) const {
    std::vector<double> out;
    for (std::size_t i = 0; i < size(); ++i)
      if (keep(i)) out.insert(out.end(), coords_.begin() + static_cast<std::ptrdiff_t>(i * dim_),
                              coords_.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim_));
    return DesignSet(dim_, std::move(out), metric_, allow_empty{});
  }

  bool operator==(const DesignSet&) const = default;

 private:
  struct allow_empty {};
  DesignSet(std::size_t dim, std::vector<double> coords, Metric metric, allow_empty);

  std::size_t dim_;
  std::vector<double> coords_;
  Metric metric_;
};

/// Smallest L consistent with the data: max over pairs of |f_i - f_j| / rho.
/// Throws on duplicate points carrying different values.
double estimate_lipschitz(const DesignSet& design, std::span<const double> values);

struct Envelopes {
  double low;
  double up;
};

/// Central interpolant: the midpoint of the tightest L-Lipschitz lower and
/// upper envelopes through the design data.
class Interpolant {
 public:
  /// Validates that no pair of design values is steeper than `lip`.
  Interpolant(DesignSet design, std::vector<double> values, double lip);

  /// Exact at design points (zero-distance short-circuit), envelope midpoint
  /// elsewhere.
  double operator()(StateView x) const;
  Envelopes envelopes(StateView x) const;

  const DesignSet& design() const noexcept { return design_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double lipschitz() const noexcept { return lip_; }

  /// Index of a design point at zero distance from x, if any.
  std::optional<std::size_t> design_index(StateView x) const;

 private:
  DesignSet design_;
  std::vector<double> values_;
  double lip_;
};

/// Estimated L when `fixed_lip` is empty; otherwise the given L, rejected if
/// the data is steeper.
Interpolant build_interpolant(DesignSet design, std::vector<double> values,
                              std::optional<double> fixed_lip = std::nullopt);

/// Interpolants serialize as CSV: a comment line carrying L and the metric,
/// a column header `x0,...,x{d-1},value`, then one row per design point.
std::string format_interpolant_csv(const Interpolant& f);
Interpolant parse_interpolant_csv(const std::string& text);

/// Exact nearest-design-point search on a uniform bucket grid (Euclidean
/// metrics only).
class NearestNeighborGrid {
 public:
  explicit NearestNeighborGrid(const DesignSet& design);
  /// Distance from x to its nearest design point, in the design metric.
  double nearest_distance(StateView x) const;

 private:
  std::size_t dim_;
  std::vector<double> scaled_;  // design coords times metric scale
  std::vector<double> scale_;
  std::vector<double> origin_;
  double cell_;
  std::vector<std::size_t> cells_per_axis_;
  std::vector<std::size_t> cell_start_;
  std::vector<std::size_t> cell_items_;
};

/// max over probe points of the distance to the nearest design point.
/// `probe` is row-major with the design's dimension.
double covering_radius(const DesignSet& design, std::span<const double> probe);

/// Regular grid with `per_axis` points per axis, corners included.
std::vector<double> grid_probe(const BoxSpace& box, std::size_t per_axis);
std::vector<double> uniform_probe(const BoxSpace& box, std::size_t count, Stream& rng);

struct CoveringEstimate {
  double radius;
  std::size_t probe_size;
};

/// Monte Carlo covering radius of a box: max(10^4, 100 N) uniform probes
/// unless `probe_size` is given.
CoveringEstimate covering_radius_box(const DesignSet& design, const BoxSpace& box, Stream rng,
                                     std::size_t probe_size = 0);

/// n i.i.d. uniform points in the box, normalized Euclidean metric.
DesignSet sample_design_uniform(std::size_t n, const StateSpace& space, Stream rng);

/// n draws from the model's own state sampler, metric chosen by state space.
DesignSet sample_design(const GenerativeModel& model, std::size_t n, Stream rng);

}  // namespace uvip
