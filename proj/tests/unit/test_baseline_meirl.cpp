// Copyright 2026 The BRSMG Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "brsmg/baseline_meirl.hpp"
#include "brsmg/gridworld_env.hpp"
#include "toys.hpp"

namespace brsmg {
namespace {

// Hand-built MDP without a game behind it; enough for soft value iteration.
InducedMdp bare_mdp(int horizon, int ns, int na) {
  InducedMdp m;
  m.horizon = horizon;
  m.num_states = ns;
  m.num_actions = na;
  m.next.assign(static_cast<std::size_t>(horizon) * ns * na, 0);
  m.reward.assign(m.next.size(), 0.0);
  return m;
}

TEST(SoftValueIteration, OneStepIsSoftmax) {
  InducedMdp m = bare_mdp(1, 1, 5);
  m.reachable = {{0}};
  m.reward = {2, 1, 1, 1, 1};
  const auto sol = soft_value_iteration(m);
  const double z = std::exp(2.0) + 4 * std::exp(1.0);
  EXPECT_NEAR(sol.policy[0], std::exp(2.0) / z, 1e-15);
  for (int a = 1; a < 5; ++a)
    EXPECT_NEAR(sol.policy[a], std::exp(1.0) / z, 1e-15);
  EXPECT_NEAR(sol.value[0], std::log(z), 1e-14);
}

TEST(SoftValueIteration, UniformRewardsGiveUniformPolicy) {
  InducedMdp m = bare_mdp(3, 2, 5);
  m.reachable = {{0}, {0, 1}, {0, 1}};
  for (std::size_t i = 0; i < m.next.size(); ++i) {
    m.next[i] = static_cast<StateId>(i % 2);
    m.reward[i] = 1.3;
  }
  const auto sol = soft_value_iteration(m);
  for (int t = 0; t < 3; ++t) {
    for (StateId s : m.reachable[t]) {
      for (int a = 0; a < 5; ++a) {
        EXPECT_NEAR(sol.policy[m.at(t, s, a)], 0.2, 1e-15);
      }
    }
  }
}

// Two steps, five actions: the product of the time-indexed policies is the
// path distribution exp(R_0 + R_1) / Z over all 25 action sequences.
TEST(SoftValueIteration, TwoStepsMatchPathEnumeration) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(1.0, 2.5);
  for (int trial = 0; trial < 20; ++trial) {
    InducedMdp m = bare_mdp(2, 6, 5);
    m.reachable = {{0}, {1, 2, 3, 4, 5}};
    for (int a = 0; a < 5; ++a) {
      // Actions 3 and 4 lead to the same state, so paths share suffixes.
      m.next[m.at(0, 0, a)] = 1 + std::min(a, 3);
      m.reward[m.at(0, 0, a)] = u(rng);
    }
    for (StateId s = 1; s < 6; ++s) {
      for (int a = 0; a < 5; ++a) m.reward[m.at(1, s, a)] = u(rng);
    }
    const auto sol = soft_value_iteration(m);
    double z = 0.0;
    for (int a0 = 0; a0 < 5; ++a0) {
      for (int a1 = 0; a1 < 5; ++a1) {
        const StateId s1 = m.next[m.at(0, 0, a0)];
        z += std::exp(m.reward[m.at(0, 0, a0)] + m.reward[m.at(1, s1, a1)]);
      }
    }
    for (int a0 = 0; a0 < 5; ++a0) {
      for (int a1 = 0; a1 < 5; ++a1) {
        const StateId s1 = m.next[m.at(0, 0, a0)];
        const double path =
            std::exp(m.reward[m.at(0, 0, a0)] + m.reward[m.at(1, s1, a1)]) / z;
        EXPECT_NEAR(sol.policy[m.at(0, 0, a0)] * sol.policy[m.at(1, s1, a1)],
                    path, 1e-14);
      }
    }
    EXPECT_NEAR(sol.value[0], std::log(z), 1e-13);
  }
}

class ToyBaseline : public ::testing::Test {
 protected:
  ToyBaseline() : world_(test::toy_config(0.5)) {
    const auto pols = solve_all(world_.spec(), world_.rewards(),
                                CptParams::uniform(0.7, 0.5, 3.0), 2);
    demos_ = grid::gen_demos(world_, pols, 20, 3);
    base_ = *std::max_element(demos_.begin(), demos_.end(),
                              [](const auto& a, const auto& b) {
                                return a.size() < b.size();
                              });
  }

  // Samples the agent's actions from the soft policy with the opponent
  // pinned to the base demo.
  Demonstration sample(const InducedMdp& m, const SoftSolution& sol,
                       std::mt19937_64& rng, int id) const {
    Demonstration d;
    d.id = id;
    StateId s = m.start;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < m.horizon; ++t) {
      double r = u(rng);
      ActionId a = 0;
      while (a + 1 < m.num_actions && (r -= sol.policy[m.at(t, s, a)]) > 0) ++a;
      const auto [a1, a2] = joint_action(m.agent, a, m.opp_actions[t]);
      d.steps.push_back({s, a1, a2});
      s = m.next[m.at(t, s, a)];
    }
    return d;
  }

  grid::GridWorld world_;
  std::vector<Demonstration> demos_;
  Demonstration base_;
};

TEST_F(ToyBaseline, InducedMdpFollowsGame) {
  ASSERT_GE(base_.size(), 3u);
  for (Agent agent : kAgents) {
    const InducedMdp m =
        induce_mdp(world_.spec(), world_.rewards(), base_, agent);
    EXPECT_EQ(m.horizon, static_cast<int>(base_.size()));
    EXPECT_EQ(m.start, base_.steps.front().state);
    for (int t = 0; t < m.horizon; ++t) {
      const ActionId b = agent == Agent::kFirst ? base_.steps[t].a2
                                                : base_.steps[t].a1;
      EXPECT_EQ(m.opp_actions[t], b);
      for (StateId s : m.reachable[t]) {
        for (ActionId a = 0; a < 5; ++a) {
          const auto [a1, a2] = joint_action(agent, a, b);
          EXPECT_EQ(m.next[m.at(t, s, a)], world_.spec().next(s, a1, a2));
          EXPECT_EQ(m.reward[m.at(t, s, a)],
                    reward(world_.spec(), world_.rewards(), s, a, b, agent));
        }
      }
      // The demonstrated state is always reachable.
      const auto& r = m.reachable[t];
      EXPECT_TRUE(std::binary_search(r.begin(), r.end(), base_.steps[t].state));
    }
  }
}

TEST_F(ToyBaseline, StillOpponentGivesSingleAgentMoves) {
  Demonstration d;
  const StateId s0 = world_.encode(world_.cell_index({0, 0}),
                                   world_.cell_index({2, 2}));
  d.steps = {{s0, grid::kRight, grid::kStay},
             {world_.spec().next(s0, grid::kRight, grid::kStay), grid::kDown,
              grid::kStay}};
  const InducedMdp m = induce_mdp(world_.spec(), world_.rewards(), d,
                                  Agent::kFirst);
  for (ActionId a = 0; a < 5; ++a) {
    const auto [p1, p2] = world_.decode(m.next[m.at(0, s0, a)]);
    EXPECT_EQ(p2, world_.cell_index({2, 2}));
    const grid::Cell c = world_.cell_at(p1);
    const grid::Cell expect =
        a == grid::kRight ? grid::Cell{1, 0}
        : a == grid::kDown ? grid::Cell{0, 1} : grid::Cell{0, 0};
    EXPECT_EQ(c, expect) << "move " << a;
  }
}

// Monte-Carlo rollouts of the soft policy reproduce the expected feature
// counts, and demos drawn from it leave the gradient near zero.
TEST_F(ToyBaseline, ExpectedCountsMatchRolloutsAndGradientVanishes) {
  const Agent agent = Agent::kFirst;
  const InducedMdp m =
      induce_mdp(world_.spec(), world_.rewards(), base_, agent);
  const SoftSolution sol = soft_value_iteration(m);
  const auto expected = expected_feature_counts(m, sol);
  const int dim = world_.spec().feature_dim();
  // The gradient of n sampled demos is a sum of n zero-mean terms, so its
  // norm grows like sqrt(n); n must be large for it to fall under 1e-2 * n.
  const int n = 250000;
  std::mt19937_64 rng(17);
  std::vector<Demonstration> sampled;
  std::vector<double> mean(dim, 0.0), sq(dim, 0.0);
  for (int i = 0; i < n; ++i) {
    sampled.push_back(sample(m, sol, rng, i));
    const auto c =
        empirical_feature_counts(world_.spec(), sampled.back(), agent);
    for (int d = 0; d < dim; ++d) {
      mean[d] += c[d] / n;
      sq[d] += c[d] * c[d] / n;
    }
  }
  for (int d = 0; d < dim; ++d) {
    const double se = std::sqrt(std::max(0.0, sq[d] - mean[d] * mean[d]) / n);
    EXPECT_LE(std::abs(mean[d] - expected[d]), 3.0 * se + 1e-12)
        << "feature " << d;
  }
  const auto g =
      meirl_gradient(world_.spec(), world_.rewards(), sampled, agent, 4);
  double norm = 0.0;
  for (double x : g.grad) norm += x * x;
  EXPECT_LT(std::sqrt(norm), 1e-2 * n);
}

TEST_F(ToyBaseline, ZeroStepLeavesWeights) {
  MeirlOptions opts;
  opts.eta = 0.0;
  opts.epochs = 3;
  RewardParams init = world_.rewards();
  std::fill(init.omega[1].begin(), init.omega[1].end(), 1.7);
  const auto tr =
      meirl_learn(world_.spec(), demos_, Agent::kSecond, init, opts);
  EXPECT_EQ(tr.omega, init.omega[1]);
  ASSERT_EQ(tr.epochs.size(), 4u);
  for (const auto& e : tr.epochs) EXPECT_EQ(e.loglik, tr.epochs[0].loglik);
}

TEST_F(ToyBaseline, AscentImprovesAndStaysInBox) {
  MeirlOptions opts;
  opts.eta = 0.05;
  opts.epochs = 30;
  RewardParams init = world_.rewards();
  for (auto& w : init.omega) std::fill(w.begin(), w.end(), 1.7);
  const auto tr = meirl_learn(world_.spec(), demos_, Agent::kFirst, init, opts);
  ASSERT_FALSE(tr.diverged);
  EXPECT_GT(tr.epochs.back().loglik, tr.epochs.front().loglik);
  for (double w : tr.omega) {
    EXPECT_GE(w, opts.omega_min);
    EXPECT_LE(w, opts.omega_max);
  }
  opts.workers = 4;
  const auto par =
      meirl_learn(world_.spec(), demos_, Agent::kFirst, init, opts);
  EXPECT_EQ(par.omega, tr.omega);
}

TEST_F(ToyBaseline, GradientIsLoglikDerivative) {
  // The log-likelihood of the soft policy is concave in the weights and its
  // gradient is empirical minus expected counts.
  RewardParams rp = world_.rewards();
  const auto g = meirl_gradient(world_.spec(), rp, demos_, Agent::kSecond);
  const double h = 1e-6;
  for (int d = 0; d < world_.spec().feature_dim(); ++d) {
    RewardParams p = rp, q = rp;
    p.omega[1][d] += h;
    q.omega[1][d] -= h;
    const double fd =
        (meirl_gradient(world_.spec(), p, demos_, Agent::kSecond).loglik -
         meirl_gradient(world_.spec(), q, demos_, Agent::kSecond).loglik) /
        (2 * h);
    EXPECT_NEAR(g.grad[d], fd, 1e-5 * (1.0 + std::abs(fd))) << "feature " << d;
  }
}

}  // namespace
}  // namespace brsmg
