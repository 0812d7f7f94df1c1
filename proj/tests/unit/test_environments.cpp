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
#include <vector>

#include "uvip/environments.hpp"
#include "uvip/error.hpp"
#include "uvip/scripted.hpp"

using namespace uvip;

TEST(Garnet, RowsHaveExactlyBranchingSuccessors) {
  for (std::uint64_t seed : {0u, 1u, 17u}) {
    const TabularMdp m = make_garnet({.seed = seed});
    EXPECT_TRUE(validate_tabular(m).empty());
    for (std::size_t x = 0; x < 20; ++x)
      for (ActionIndex a = 0; a < 5; ++a) {
        int nonzero = 0;
        for (double p : m.row(x, a)) nonzero += p > 0.0;
        EXPECT_EQ(nonzero, 2);
      }
  }
}

TEST(Garnet, TinyCaseIsTwoPointDistribution) {
  const TabularMdp m = make_garnet({.n_states = 2, .n_actions = 1, .branching = 2, .seed = 5});
  EXPECT_TRUE(validate_tabular(m).empty());
  for (std::size_t x = 0; x < 2; ++x) {
    EXPECT_GT(m.p(x, 0, 0), 0.0);
    EXPECT_GT(m.p(x, 0, 1), 0.0);
  }
}

TEST(Garnet, DeterministicInSeed) {
  EXPECT_EQ(make_garnet({.seed = 3}), make_garnet({.seed = 3}));
  EXPECT_FALSE(make_garnet({.seed = 3}) == make_garnet({.seed = 4}));
}

TEST(Garnet, RejectsBranchingAboveStateCount) {
  EXPECT_THROW(make_garnet({.n_states = 3, .branching = 4}), Error);
}

TEST(Garnet, RewardsWithinDeclaredBound) {
  const GarnetSpec spec{.seed = 2};
  const TabularMdp m = make_garnet(spec);
  EXPECT_LE(m.r_max(), garnet_r_max(spec));
  EXPECT_DOUBLE_EQ(garnet_r_max(spec), spec.boost_factor);
  int boosted = 0;
  for (std::size_t x = 0; x < 20; ++x)
    for (ActionIndex a = 0; a < 5; ++a) {
      EXPECT_GE(m.reward(x, a), 0.0);
      boosted += m.reward(x, a) > 1.0;
    }
  EXPECT_GT(boosted, 0);
}

TEST(Chain, NoiselessBoundaryStep) {
  const TabularMdp m = make_chain({.length = 3, .noise_p = 0.0});
  EXPECT_DOUBLE_EQ(m.p(1, chain_action::right, 2), 1.0);
  EXPECT_DOUBLE_EQ(m.reward(1, chain_action::right), 10.0);
}

TEST(Chain, SlipProbability) {
  const TabularMdp m = make_chain({.length = 10, .noise_p = 0.2});
  for (std::size_t x = 1; x + 1 < 10; ++x) {
    EXPECT_NEAR(m.p(x, chain_action::right, x + 1), 0.9, 1e-15);
    EXPECT_NEAR(m.p(x, chain_action::left, x - 1), 0.9, 1e-15);
  }
}

TEST(Chain, DefaultsAndStructure) {
  const TabularMdp m = make_chain({});
  EXPECT_EQ(m.n_states(), 10u);
  EXPECT_DOUBLE_EQ(m.gamma(), 0.8);
  EXPECT_TRUE(validate_tabular(m).empty());
  EXPECT_DOUBLE_EQ(m.reward(4, chain_action::right), 1.0);
  // Interior reward is the expected payoff: 0.95 * 1 + 0.05 * 10 one step from the end.
  EXPECT_NEAR(m.reward(8, chain_action::right), 0.95 * 10.0 + 0.05 * 1.0, 1e-12);
  EXPECT_LE(m.r_max(), 10.0);
  EXPECT_THROW(make_chain({.length = 2}), Error);
}

TEST(FrozenLake, ShapeAndRewards) {
  const TabularMdp m = make_frozen_lake();
  EXPECT_EQ(m.n_states(), 16u);
  EXPECT_EQ(m.n_actions(), 4u);
  EXPECT_DOUBLE_EQ(m.gamma(), 0.9);
  EXPECT_TRUE(validate_tabular(m).empty());
  // Holes (5, 7, 11, 12) and goal (15) absorb with zero reward.
  for (std::size_t s : {5u, 7u, 11u, 12u, 15u}) EXPECT_TRUE(m.is_terminal(s));
  // Stepping into the goal from 14 pays 10 with the slip-weighted probability.
  EXPECT_NEAR(m.reward(14, lake_action::right), 10.0 / 3.0, 1e-12);
  EXPECT_LE(m.r_max(), 10.0);
}

// From the start corner, "left" slips to left (wall), down or up (wall).
TEST(FrozenLake, WallMovesKeepSelfMass) {
  const TabularMdp m = make_frozen_lake();
  EXPECT_NEAR(m.p(0, lake_action::left, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.p(0, lake_action::left, 4), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.p(0, lake_action::up, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.p(0, lake_action::up, 1), 1.0 / 3.0, 1e-15);
}

TEST(CartPole, PushesAreMirrorImagesWithoutNoise) {
  CartPoleSpec spec;
  spec.angle_noise_std = 0.0;
  const auto g = make_cartpole(spec);
  const std::vector<double> xi{0.0};
  State left{0.0, 0.0, 0.0, 0.0};
  State right = left;
  EXPECT_DOUBLE_EQ(g->reward(left, 0), 1.0);
  for (int t = 0; t < 5; ++t) {
    left = transition(*g, left, 0, xi);
    right = transition(*g, right, 1, xi);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(left[i], -right[i], 1e-12) << t;
  }
  // Pushing the cart right tips the pole left.
  EXPECT_GT(right[0], 0.0);
  EXPECT_LT(right[2], 0.0);
}

TEST(CartPole, RewardsAndTerminals) {
  const auto g = make_cartpole();
  EXPECT_DOUBLE_EQ(g->gamma(), 0.9);
  EXPECT_DOUBLE_EQ(g->r_max(), 1.0);
  EXPECT_EQ(g->state_dim(), 4u);
  EXPECT_EQ(g->action_count(), 2u);
  const State fallen{0.0, 0.0, 0.5, 0.0};
  EXPECT_TRUE(g->is_terminal(fallen));
  EXPECT_DOUBLE_EQ(g->reward(fallen, 0), 0.0);
  const State away{2.5, 0.0, 0.0, 0.0};
  EXPECT_TRUE(g->is_terminal(away));
}

TEST(CartPole, AngleNoiseScale) {
  const auto g = make_cartpole();
  const State x{0.0, 0.0, 0.0, 0.0};
  CartPoleSpec quiet;
  quiet.angle_noise_std = 0.0;
  const auto g0 = make_cartpole(quiet);
  const State base = transition(*g0, x, 1, std::vector<double>{0.0});
  const State bumped = transition(*g, x, 1, std::vector<double>{1.0});
  EXPECT_NEAR(bumped[2] - base[2], 0.05, 1e-12);
}

TEST(CartPole, LinearDeterministicPolicySurvivesNoiseless) {
  CartPoleSpec spec;
  spec.angle_noise_std = 0.0;
  const auto g = make_cartpole(spec);
  const Policy ld = ld_cartpole();
  Stream rng(3, {});
  for (int start = 0; start < 5; ++start) {
    State x{0.0, 0.0, 0.02 * (start - 2), 0.0};
    int survived = 0;
    for (; survived < 200 && !g->is_terminal(x); ++survived)
      x = transition(*g, x, ld.act(x, rng), std::vector<double>{0.0});
    EXPECT_GE(survived, 200) << "start " << start;
  }
}

TEST(Acrobot, TrigonometricEncodingStaysNormalized) {
  const auto g = make_acrobot();
  EXPECT_EQ(g->state_dim(), 6u);
  EXPECT_EQ(g->action_count(), 3u);
  Stream rng(2, {});
  State x = g->initial_state(rng);
  for (int t = 0; t < 300 && !g->is_terminal(x); ++t) {
    EXPECT_NEAR(x[0] * x[0] + x[1] * x[1], 1.0, 1e-9);
    EXPECT_NEAR(x[2] * x[2] + x[3] * x[3], 1.0, 1e-9);
    EXPECT_DOUBLE_EQ(g->reward(x, t % 3), -1.0);
    x = transition(*g, x, static_cast<ActionIndex>(t % 3), std::vector<double>{rng.uniform()});
  }
}

TEST(Acrobot, AppliedTorqueWithinUnitOfAction) {
  const auto g = make_acrobot();
  const auto& acro = dynamic_cast<const AcrobotModel&>(*g);
  Stream rng(8, {});
  for (ActionIndex a = 0; a < 3; ++a) {
    const double nominal = static_cast<double>(a) - 1.0;
    for (int i = 0; i < 1000; ++i) {
      const double tau = acro.applied_torque(a, rng.uniform());
      EXPECT_GE(tau, nominal - 1.0);
      EXPECT_LE(tau, nominal + 1.0);
    }
    EXPECT_DOUBLE_EQ(acro.applied_torque(a, 0.5), nominal);
  }
}

TEST(Acrobot, TerminalAbsorbsWithZeroReward) {
  const auto g = make_acrobot();
  // Both links pointing up: tip height 2 above the pivot.
  const State up{-1.0, 0.0, 1.0, 0.0, 0.0, 0.0};
  EXPECT_TRUE(g->is_terminal(up));
  EXPECT_DOUBLE_EQ(g->reward(up, 0), 0.0);
  EXPECT_DOUBLE_EQ(g->r_max(), 1.0);
}

TEST(Environments, ConstructionIsPure) {
  EXPECT_EQ(make_chain({}), make_chain({}));
  EXPECT_EQ(make_frozen_lake(), make_frozen_lake());
  const auto a = make_cartpole();
  const auto b = make_cartpole();
  const State x{0.1, -0.2, 0.03, 0.1};
  EXPECT_EQ(transition(*a, x, 0, std::vector<double>{0.3}),
            transition(*b, x, 0, std::vector<double>{0.3}));
}
