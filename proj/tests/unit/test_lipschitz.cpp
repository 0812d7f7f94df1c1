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

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "uvip/error.hpp"
#include "uvip/lipschitz.hpp"

using namespace uvip;

namespace {

DesignSet line(std::vector<double> xs) { return DesignSet(1, std::move(xs), Metric::euclidean()); }

BoxSpace unit_box(std::size_t d) { return {std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)}; }

std::vector<double> grid_1d(std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = double(i) / double(n - 1);
  return g;
}

}  // namespace

TEST(Metric, DiscreteAndScaledEuclidean) {
  const std::vector<double> a{1.0, 2.0}, b{1.0, 2.0}, c{4.0, 6.0};
  EXPECT_EQ(Metric::discrete().distance(a, b), 0.0);
  EXPECT_EQ(Metric::discrete().distance(a, c), 1.0);
  EXPECT_DOUBLE_EQ(Metric::euclidean().distance(a, c), 5.0);
  const Metric norm = Metric::normalized(BoxSpace{{0.0, 0.0}, {3.0, 8.0}});
  EXPECT_DOUBLE_EQ(norm.distance(a, c), std::hypot(1.0, 0.5));
  EXPECT_TRUE(Metric::normalized(unit_box(2)).scale.empty());
}

TEST(DesignSet, RejectsMalformedInput) {
  EXPECT_THROW(DesignSet(0, {}, Metric::euclidean()), Error);
  EXPECT_THROW(DesignSet(2, {1.0, 2.0, 3.0}, Metric::euclidean()), Error);
  EXPECT_THROW(DesignSet(1, {}, Metric::euclidean()), Error);
  EXPECT_EQ(DesignSet::tabular(4).size(), 4u);
}

TEST(EstimateLipschitz, TwoPointSlopeAndConstant) {
  EXPECT_DOUBLE_EQ(estimate_lipschitz(line({0.0, 1.0}), std::vector<double>{0.0, 2.0}), 2.0);
  EXPECT_DOUBLE_EQ(estimate_lipschitz(line({0.0, 0.3, 1.0}), std::vector<double>{4.0, 4.0, 4.0}),
                   0.0);
}

TEST(EstimateLipschitz, AbsoluteValueApproachesOne) {
  double previous = 0.0;
  for (std::size_t n : {4u, 10u, 101u}) {
    const auto xs = grid_1d(n);
    std::vector<double> fs;
    for (double x : xs) fs.push_back(std::abs(x - 0.5));
    const double l = estimate_lipschitz(line(xs), fs);
    EXPECT_LE(l, 1.0 + 1e-12);
    EXPECT_GE(l, previous - 1e-12);
    previous = l;
  }
  EXPECT_NEAR(previous, 1.0, 1e-9);
}

TEST(EstimateLipschitz, DuplicatePointsWithDifferentValues) {
  EXPECT_THROW(estimate_lipschitz(line({0.2, 0.2}), std::vector<double>{1.0, 2.0}), Error);
  EXPECT_DOUBLE_EQ(estimate_lipschitz(line({0.2, 0.2}), std::vector<double>{1.0, 1.0}), 0.0);
}

TEST(Interpolant, HandComputedMidpoint) {
  const Interpolant f(line({0.0, 0.5, 1.0}), {0.5, 0.0, 0.5}, 1.0);
  EXPECT_DOUBLE_EQ(f(std::vector<double>{0.25}), 0.25);
  const auto env = f.envelopes(std::vector<double>{0.25});
  EXPECT_DOUBLE_EQ(env.low, 0.25);
  EXPECT_DOUBLE_EQ(env.up, 0.25);
}

TEST(Interpolant, ExactAtNodes) {
  Stream rng(5, {});
  std::vector<double> coords, values;
  for (int i = 0; i < 50; ++i) {
    coords.push_back(rng.uniform());
    coords.push_back(rng.uniform());
    values.push_back(std::sin(7.0 * coords[2 * i]) + coords[2 * i + 1]);
  }
  const Interpolant f = build_interpolant(DesignSet(2, coords, Metric::euclidean()), values);
  for (std::size_t i = 0; i < values.size(); ++i)
    EXPECT_EQ(f(f.design().point(i)), values[i]);
}

TEST(Interpolant, SandwichAndLipschitzContinuity) {
  Stream rng(6, {});
  std::vector<double> coords, values;
  for (int i = 0; i < 40; ++i) {
    coords.push_back(rng.uniform());
    coords.push_back(rng.uniform());
    values.push_back(std::abs(coords[2 * i] - 0.3) + 2.0 * coords[2 * i + 1]);
  }
  const Interpolant f = build_interpolant(DesignSet(2, coords, Metric::euclidean()), values);
  const double l = f.lipschitz();
  for (int t = 0; t < 10000; ++t) {
    const std::vector<double> x{rng.uniform(), rng.uniform()};
    const std::vector<double> y{rng.uniform(), rng.uniform()};
    const auto e = f.envelopes(x);
    const double fx = f(x);
    EXPECT_LE(e.low, fx + 1e-12);
    EXPECT_LE(fx, e.up + 1e-12);
    EXPECT_LE(std::abs(fx - f(y)), l * Metric::euclidean().distance(x, y) + 1e-12);
  }
}

TEST(Interpolant, FixedConstantBelowDataSlopeIsRejected) {
  EXPECT_THROW(build_interpolant(line({0.0, 1.0}), {0.0, 1.0}, 0.0), Error);
  EXPECT_THROW(build_interpolant(line({0.0, 1.0}), {0.0, 1.0}, 0.5), Error);
  EXPECT_NO_THROW(build_interpolant(line({0.0, 1.0}), {0.0, 1.0}, 1.0));
  EXPECT_NO_THROW(build_interpolant(line({0.0, 1.0}), {3.0, 3.0}, 0.0));
}

TEST(Interpolant, DiscreteFullDesignIsIdentity) {
  const std::vector<double> values{3.0, -1.0, 2.5, 0.0};
  const Interpolant f = build_interpolant(DesignSet::tabular(4), values);
  for (std::size_t x = 0; x < 4; ++x) EXPECT_EQ(f(std::vector<double>{double(x)}), values[x]);
}

TEST(Interpolant, CsvRoundTrip) {
  const Interpolant f =
      build_interpolant(DesignSet(2, {0.0, 0.0, 1.0, 0.5, 0.25, 0.75}, Metric::normalized({{0, 0}, {2, 1}})),
                        {1.0, 2.0, -0.5});
  const std::string text = format_interpolant_csv(f);
  EXPECT_EQ(text.rfind("# uvip-interpolant lipschitz=", 0), 0u);
  const Interpolant g = parse_interpolant_csv(text);
  EXPECT_EQ(g.design(), f.design());
  EXPECT_EQ(g.values(), f.values());
  EXPECT_EQ(g.lipschitz(), f.lipschitz());
  EXPECT_THROW(parse_interpolant_csv("x0,value\n0.1,2\n"), Error);
}

TEST(CoveringRadius, FullTabularDesignIsZero) {
  std::vector<double> probe{0.0, 1.0, 2.0, 3.0};
  EXPECT_EQ(covering_radius(DesignSet::tabular(4), probe), 0.0);
}

TEST(CoveringRadius, TwoPointsOnUnitInterval) {
  const auto probe = grid_probe(unit_box(1), 1001);
  EXPECT_NEAR(covering_radius(line({0.25, 0.75}), probe), 0.25, 1e-12);
}

TEST(CoveringRadius, GridSearchAgreesWithBruteForce) {
  Stream rng(3, {});
  const DesignSet design = sample_design_uniform(3000, StateSpace::box({0, 0}, {1, 1}), Stream(4, {}));
  const auto probe = uniform_probe(unit_box(2), 2000, rng);
  double brute = 0.0;
  for (std::size_t p = 0; p < 2000; ++p) {
    double best = 1e300;
    for (std::size_t i = 0; i < design.size(); ++i)
      best = std::min(best, design.metric().distance(design.point(i), {probe.data() + 2 * p, 2}));
    brute = std::max(brute, best);
  }
  const NearestNeighborGrid grid(design);
  double fast = 0.0;
  for (std::size_t p = 0; p < 2000; ++p)
    fast = std::max(fast, grid.nearest_distance({probe.data() + 2 * p, 2}));
  EXPECT_DOUBLE_EQ(fast, brute);
}

TEST(SampleDesign, SinglePointRadiusIsFarthestCorner) {
  const DesignSet d = sample_design_uniform(1, StateSpace::box({0, 0}, {1, 1}), Stream(2, {}));
  const auto p = d.point(0);
  double corner = 0.0;
  for (double cx : {0.0, 1.0})
    for (double cy : {0.0, 1.0}) corner = std::max(corner, std::hypot(p[0] - cx, p[1] - cy));
  EXPECT_NEAR(covering_radius(d, grid_probe(unit_box(2), 101)), corner, 1e-12);
}

TEST(SampleDesign, InsideBoxWithUniformMoments) {
  const std::size_t n = 20000;
  const auto space = StateSpace::box({-1.0, 2.0}, {3.0, 5.0});
  const DesignSet d = sample_design_uniform(n, space, Stream(8, {}));
  double m0 = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_TRUE(space.contains(d.point(i)));
    m0 += d.point(i)[0];
    m1 += d.point(i)[1];
  }
  EXPECT_LE(std::abs(m0 / n - 1.0), 3.0 * 4.0 / std::sqrt(12.0 * n));
  EXPECT_LE(std::abs(m1 / n - 3.5), 3.0 * 3.0 / std::sqrt(12.0 * n));
}

TEST(SampleDesign, RejectsTabularSpaceAndZeroSize) {
  EXPECT_THROW(sample_design_uniform(5, StateSpace::tabular(4), Stream(1)), Error);
  EXPECT_THROW(sample_design_uniform(0, StateSpace::box({0}, {1}), Stream(1)), Error);
}

TEST(SampleDesign, SeededDeterminism) {
  const auto space = StateSpace::box({0, 0}, {1, 1});
  EXPECT_EQ(sample_design_uniform(10, space, Stream(3, {})), sample_design_uniform(10, space, Stream(3, {})));
}

// Error bound |f - I[f]| <= L * covering radius on 1-D and 2-D test functions.
TEST(InterpolationError, BoundedByLipschitzTimesRadius) {
  const std::vector<std::pair<std::size_t, std::function<double(const double*)>>> cases = {
      {1, [](const double* x) { return std::abs(x[0] - 0.4); }},
      {1, [](const double* x) { return 3.0 * std::min(x[0], 1.0 - x[0]); }},
      {2, [](const double* x) { return std::abs(x[0] - x[1]); }},
      {2, [](const double* x) { return std::max(x[0], 0.5 * x[1]); }},
  };
  for (const auto& [d, f] : cases) {
    const DesignSet design = sample_design_uniform(60, StateSpace::box(std::vector<double>(d, 0.0),
                                                                        std::vector<double>(d, 1.0)),
                                                   Stream(d, {11}));
    std::vector<double> values;
    for (std::size_t i = 0; i < design.size(); ++i) values.push_back(f(design.point(i).data()));
    const Interpolant fi = build_interpolant(design, values);
    const auto probe = grid_probe(unit_box(d), d == 1 ? 2001 : 101);
    const double radius = covering_radius(design, probe);
    double err = 0.0;
    for (std::size_t p = 0; p < probe.size() / d; ++p) {
      const StateView x{probe.data() + p * d, d};
      err = std::max(err, std::abs(f(x.data()) - fi(x)));
    }
    EXPECT_LE(err, fi.lipschitz() * radius + 1e-12);
  }
}
