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

#include "uvip/lipschitz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <fmt/core.h>

#include "uvip/error.hpp"

namespace uvip {

Metric Metric::normalized(const BoxSpace& box) {
  Metric m{MetricKind::euclidean, std::vector<double>(box.dim())};
  for (std::size_t i = 0; i < box.dim(); ++i) m.scale[i] = 1.0 / (box.upper[i] - box.lower[i]);
  bool unit = std::all_of(m.scale.begin(), m.scale.end(), [](double s) { return s == 1.0; });
  if (unit) m.scale.clear();
  return m;
}

Metric Metric::for_space(const StateSpace& space) {
  return space.is_tabular() ? discrete() : normalized(space.as_box());
}

double Metric::distance(StateView a, StateView b) const noexcept {
  if (kind == MetricKind::discrete) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] != b[i]) return 1.0;
    return 0.0;
  }
  double s = 0.0;
  if (scale.empty()) {
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = (a[i] - b[i]) * scale[i];
      s += d * d;
    }
  }
  return std::sqrt(s);
}

DesignSet::DesignSet(std::size_t dim, std::vector<double> coords, Metric metric)
    : DesignSet(dim, std::move(coords), std::move(metric), allow_empty{}) {
  require(size() >= 1, ErrorCode::invalid_argument, "design set must hold at least one point");
}

DesignSet::DesignSet(std::size_t dim, std::vector<double> coords, Metric metric, allow_empty)
    : dim_(dim), coords_(std::move(coords)), metric_(std::move(metric)) {
  require(dim_ >= 1, ErrorCode::invalid_argument, "design dimension must be >= 1");
  require(coords_.size() % dim_ == 0, ErrorCode::dimension_mismatch,
          "design coordinates are not a multiple of the dimension");
  require(metric_.scale.empty() || metric_.scale.size() == dim_, ErrorCode::dimension_mismatch,
          "metric scale length differs from the design dimension");
}

DesignSet DesignSet::tabular(std::size_t n_states) {
  std::vector<double> coords(n_states);
  for (std::size_t i = 0; i < n_states; ++i) coords[i] = static_cast<double>(i);
  return DesignSet(1, std::move(coords), Metric::discrete());
}

double estimate_lipschitz(const DesignSet& design, std::span<const double> values) {
  if (values.size() != design.size())
    fail(ErrorCode::dimension_mismatch,
         fmt::format("{} values for {} design points", values.size(), design.size()));
  double lip = 0.0;
  const Metric& metric = design.metric();
  for (std::size_t i = 0; i < design.size(); ++i) {
    for (std::size_t j = i + 1; j < design.size(); ++j) {
      const double diff = std::abs(values[i] - values[j]);
      if (diff == 0.0) continue;
      const double d = metric.distance(design.point(i), design.point(j));
      if (d == 0.0)
        fail(ErrorCode::inconsistent_data,
             fmt::format("design points {} and {} coincide but carry values {} and {}", i, j,
                         values[i], values[j]));
      lip = std::max(lip, diff / d);
    }
  }
  return lip;
}

Interpolant::Interpolant(DesignSet design, std::vector<double> values, double lip)
    : design_(std::move(design)), values_(std::move(values)), lip_(lip) {
  if (values_.size() != design_.size())
    fail(ErrorCode::dimension_mismatch,
         fmt::format("{} values for {} design points", values_.size(), design_.size()));
  require(lip_ >= 0.0 && std::isfinite(lip_), ErrorCode::invalid_argument,
          "Lipschitz constant must be finite and nonnegative");
  for (double v : values_)
    require(std::isfinite(v), ErrorCode::invalid_argument, "interpolation data must be finite");
  // H^low <= H^up at every node iff no pair is steeper than lip.
  for (std::size_t i = 0; i < design_.size(); ++i)
    for (std::size_t j = i + 1; j < design_.size(); ++j) {
      const double diff = std::abs(values_[i] - values_[j]);
      const double d = design_.metric().distance(design_.point(i), design_.point(j));
      const double slack = 1e-12 * std::max({1.0, std::abs(values_[i]), std::abs(values_[j])});
      if (diff > lip_ * d + slack)
        fail(ErrorCode::inconsistent_data,
             fmt::format("envelopes cross: |f({}) - f({})| = {} exceeds L * rho = {}", i, j,
                         diff, lip_ * d));
    }
}

std::optional<std::size_t> Interpolant::design_index(StateView x) const {
  for (std::size_t i = 0; i < design_.size(); ++i)
    if (design_.metric().distance(x, design_.point(i)) == 0.0) return i;
  return std::nullopt;
}

Envelopes Interpolant::envelopes(StateView x) const {
  Envelopes e{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < design_.size(); ++i) {
    const double r = lip_ * design_.metric().distance(x, design_.point(i));
    e.low = std::max(e.low, values_[i] - r);
    e.up = std::min(e.up, values_[i] + r);
  }
  return e;
}

double Interpolant::operator()(StateView x) const {
  if (x.size() != design_.dim())
    fail(ErrorCode::dimension_mismatch,
         fmt::format("query has {} coordinates, design has {}", x.size(), design_.dim()));
  double low = -std::numeric_limits<double>::infinity();
  double up = std::numeric_limits<double>::infinity();
  const Metric& metric = design_.metric();
  for (std::size_t i = 0; i < design_.size(); ++i) {
    const double d = metric.distance(x, design_.point(i));
    if (d == 0.0) return values_[i];
    const double r = lip_ * d;
    low = std::max(low, values_[i] - r);
    up = std::min(up, values_[i] + r);
  }
  if (low > up + 1e-12 * std::max(1.0, std::abs(up)))
    fail(ErrorCode::inconsistent_data,
         fmt::format("lower envelope {} exceeds upper envelope {}", low, up));
  return 0.5 * (low + up);
}

Interpolant build_interpolant(DesignSet design, std::vector<double> values,
                              std::optional<double> fixed_lip) {
  const double lip = fixed_lip ? *fixed_lip : estimate_lipschitz(design, values);
  return Interpolant(std::move(design), std::move(values), lip);
}

std::string format_interpolant_csv(const Interpolant& f) {
  const DesignSet& d = f.design();
  std::string out = fmt::format("# uvip-interpolant lipschitz={} metric={}", f.lipschitz(),
                                d.metric().kind == MetricKind::discrete ? "discrete" : "euclidean");
  if (!d.metric().scale.empty()) {
    out += " scale=";
    for (std::size_t i = 0; i < d.metric().scale.size(); ++i)
      out += fmt::format("{}{}", i ? ";" : "", d.metric().scale[i]);
  }
  out += '\n';
  for (std::size_t i = 0; i < d.dim(); ++i) out += fmt::format("x{},", i);
  out += "value\n";
  for (std::size_t p = 0; p < d.size(); ++p) {
    for (double c : d.point(p)) out += fmt::format("{},", c);
    out += fmt::format("{}\n", f.values()[p]);
  }
  return out;
}

Interpolant parse_interpolant_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# uvip-interpolant", 0) != 0)
    fail(ErrorCode::parse, "line 1: missing '# uvip-interpolant' header");
  double lip = -1.0;
  Metric metric = Metric::euclidean();
  {
    std::istringstream fields(line.substr(18));
    std::string tok;
    while (fields >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) fail(ErrorCode::parse, fmt::format("line 1: bad token '{}'", tok));
      const std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
      try {
        if (key == "lipschitz") {
          lip = std::stod(value);
        } else if (key == "metric") {
          if (value == "discrete") metric.kind = MetricKind::discrete;
          else if (value != "euclidean") fail(ErrorCode::parse, fmt::format("line 1: unknown metric '{}'", value));
        } else if (key == "scale") {
          std::istringstream parts(value);
          std::string part;
          while (std::getline(parts, part, ';')) metric.scale.push_back(std::stod(part));
        } else {
          fail(ErrorCode::parse, fmt::format("line 1: unknown key '{}'", key));
        }
      } catch (const std::logic_error&) {
        fail(ErrorCode::parse, fmt::format("line 1: bad number in '{}'", tok));
      }
    }
  }
  if (lip < 0.0) fail(ErrorCode::parse, "line 1: missing lipschitz=<L>");
  if (!std::getline(in, line)) fail(ErrorCode::parse, "line 2: missing column header");
  const std::size_t columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (columns < 2) fail(ErrorCode::parse, "line 2: need at least one coordinate and a value");
  const std::size_t dim = columns - 1;

  std::vector<double> coords, values;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(row, cell, ',')) {
      double v = 0.0;
      try {
        v = std::stod(cell);
      } catch (const std::logic_error&) {
        fail(ErrorCode::parse, fmt::format("line {}: bad number '{}'", line_no, cell));
      }
      (col < dim ? coords : values).push_back(v);
      ++col;
    }
    if (col != columns)
      fail(ErrorCode::parse, fmt::format("line {}: expected {} columns, found {}", line_no, columns, col));
  }
  return Interpolant(DesignSet(dim, std::move(coords), std::move(metric)), std::move(values), lip);
}

// ---------------------------------------------------------------------------
// Nearest-neighbor grid

NearestNeighborGrid::NearestNeighborGrid(const DesignSet& design)
    : dim_(design.dim()), scaled_(design.coords()), scale_(design.metric().scale) {
  require(design.metric().kind == MetricKind::euclidean, ErrorCode::unsupported,
          "bucket grid needs a Euclidean metric");
  const std::size_t n = design.size();
  if (scale_.empty()) scale_.assign(dim_, 1.0);
  for (std::size_t i = 0; i < scaled_.size(); ++i) scaled_[i] *= scale_[i % dim_];

  origin_.assign(dim_, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dim_, -std::numeric_limits<double>::infinity());
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t k = 0; k < dim_; ++k) {
      origin_[k] = std::min(origin_[k], scaled_[p * dim_ + k]);
      hi[k] = std::max(hi[k], scaled_[p * dim_ + k]);
    }
  double extent = 0.0;
  for (std::size_t k = 0; k < dim_; ++k) extent = std::max(extent, hi[k] - origin_[k]);
  // About one point per cell.
  const double per_axis = std::max(1.0, std::floor(std::pow(static_cast<double>(n), 1.0 / static_cast<double>(dim_))));
  cell_ = extent > 0.0 ? extent / per_axis : 1.0;
  cells_per_axis_.resize(dim_);
  std::size_t total = 1;
  for (std::size_t k = 0; k < dim_; ++k) {
    cells_per_axis_[k] = static_cast<std::size_t>(std::floor((hi[k] - origin_[k]) / cell_)) + 1;
    total *= cells_per_axis_[k];
  }
  auto cell_of = [&](std::size_t p) {
    std::size_t idx = 0;
    for (std::size_t k = dim_; k-- > 0;) {
      auto c = static_cast<std::size_t>((scaled_[p * dim_ + k] - origin_[k]) / cell_);
      c = std::min(c, cells_per_axis_[k] - 1);
      idx = idx * cells_per_axis_[k] + c;
    }
    return idx;
  };
  cell_start_.assign(total + 1, 0);
  std::vector<std::size_t> owner(n);
  for (std::size_t p = 0; p < n; ++p) {
    owner[p] = cell_of(p);
    ++cell_start_[owner[p] + 1];
  }
  for (std::size_t c = 0; c < total; ++c) cell_start_[c + 1] += cell_start_[c];
  cell_items_.resize(n);
  std::vector<std::size_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t p = 0; p < n; ++p) cell_items_[fill[owner[p]]++] = p;
}

double NearestNeighborGrid::nearest_distance(StateView x) const {
  std::vector<double> q(dim_);
  std::vector<long> home(dim_);
  for (std::size_t k = 0; k < dim_; ++k) {
    q[k] = x[k] * scale_[k];
    const double c = std::floor((q[k] - origin_[k]) / cell_);
    home[k] = static_cast<long>(std::clamp(c, 0.0, static_cast<double>(cells_per_axis_[k] - 1)));
  }
  double best_sq = std::numeric_limits<double>::infinity();
  long max_ring = 0;
  for (std::size_t k = 0; k < dim_; ++k)
    max_ring = std::max({max_ring, home[k], static_cast<long>(cells_per_axis_[k]) - 1 - home[k]});

  std::vector<long> offset(dim_);
  for (long ring = 0; ring <= max_ring; ++ring) {
    // Visit every cell whose Chebyshev index distance from home is `ring`.
    std::fill(offset.begin(), offset.end(), -ring);
    for (;;) {
      long cheb = 0;
      bool inside = true;
      std::size_t idx = 0;
      for (std::size_t k = dim_; k-- > 0;) {
        cheb = std::max(cheb, std::abs(offset[k]));
        const long c = home[k] + offset[k];
        if (c < 0 || c >= static_cast<long>(cells_per_axis_[k])) {
          inside = false;
          break;
        }
        idx = idx * cells_per_axis_[k] + static_cast<std::size_t>(c);
      }
      if (inside && cheb == ring) {
        for (std::size_t it = cell_start_[idx]; it < cell_start_[idx + 1]; ++it) {
          const std::size_t p = cell_items_[it];
          double s = 0.0;
          for (std::size_t k = 0; k < dim_; ++k) {
            const double d = q[k] - scaled_[p * dim_ + k];
            s += d * d;
          }
          best_sq = std::min(best_sq, s);
        }
      }
      std::size_t k = 0;
      while (k < dim_ && offset[k] == ring) offset[k++] = -ring;
      if (k == dim_) break;
      ++offset[k];
    }
    // Unvisited cells are at least ring * cell_ away.
    const double bound = static_cast<double>(ring) * cell_;
    if (best_sq <= bound * bound) break;
  }
  return std::sqrt(best_sq);
}

double covering_radius(const DesignSet& design, std::span<const double> probe) {
  const std::size_t dim = design.dim();
  require(!probe.empty() && probe.size() % dim == 0, ErrorCode::invalid_argument,
          "probe must be a non-empty multiple of the design dimension");
  const std::size_t n_probe = probe.size() / dim;
  double radius = 0.0;
  const bool use_grid =
      design.metric().kind == MetricKind::euclidean && design.size() * n_probe > 4'000'000;
  if (use_grid) {
    const NearestNeighborGrid grid(design);
    for (std::size_t p = 0; p < n_probe; ++p)
      radius = std::max(radius, grid.nearest_distance(probe.subspan(p * dim, dim)));
    return radius;
  }
  for (std::size_t p = 0; p < n_probe; ++p) {
    const StateView x = probe.subspan(p * dim, dim);
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < design.size() && nearest > radius; ++i)
      nearest = std::min(nearest, design.metric().distance(x, design.point(i)));
    radius = std::max(radius, nearest);
  }
  return radius;
}

std::vector<double> grid_probe(const BoxSpace& box, std::size_t per_axis) {
  require(per_axis >= 2, ErrorCode::invalid_argument, "grid probe needs >= 2 points per axis");
  const std::size_t dim = box.dim();
  std::size_t total = 1;
  for (std::size_t k = 0; k < dim; ++k) total *= per_axis;
  std::vector<double> out(total * dim);
  for (std::size_t p = 0; p < total; ++p) {
    std::size_t rest = p;
    for (std::size_t k = 0; k < dim; ++k) {
      const std::size_t i = rest % per_axis;
      rest /= per_axis;
      out[p * dim + k] = i + 1 == per_axis
                             ? box.upper[k]
                             : box.lower[k] + (box.upper[k] - box.lower[k]) *
                                                  static_cast<double>(i) /
                                                  static_cast<double>(per_axis - 1);
    }
  }
  return out;
}

std::vector<double> uniform_probe(const BoxSpace& box, std::size_t count, Stream& rng) {
  std::vector<double> out(count * box.dim());
  for (std::size_t p = 0; p < count; ++p)
    for (std::size_t k = 0; k < box.dim(); ++k)
      out[p * box.dim() + k] = box.lower[k] + (box.upper[k] - box.lower[k]) * rng.uniform();
  return out;
}

CoveringEstimate covering_radius_box(const DesignSet& design, const BoxSpace& box, Stream rng,
                                     std::size_t probe_size) {
  if (probe_size == 0) probe_size = std::max<std::size_t>(10'000, 100 * design.size());
  const auto probe = uniform_probe(box, probe_size, rng);
  return {covering_radius(design, probe), probe_size};
}

DesignSet sample_design_uniform(std::size_t n, const StateSpace& space, Stream rng) {
  require(n >= 1, ErrorCode::invalid_argument, "design size must be >= 1");
  require(!space.is_tabular(), ErrorCode::unsupported,
          "uniform design sampling needs a box state space");
  const BoxSpace& box = space.as_box();
  return DesignSet(box.dim(), uniform_probe(box, n, rng), Metric::normalized(box));
}

DesignSet sample_design(const GenerativeModel& model, std::size_t n, Stream rng) {
  require(n >= 1, ErrorCode::invalid_argument, "design size must be >= 1");
  std::vector<double> coords;
  coords.reserve(n * model.state_dim());
  for (std::size_t i = 0; i < n; ++i) {
    const State x = model.sample_state(rng);
    coords.insert(coords.end(), x.begin(), x.end());
  }
  return DesignSet(model.state_dim(), std::move(coords), Metric::for_space(model.states()));
}

}  // namespace uvip
