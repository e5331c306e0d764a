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

// Risk-neutral maximum-entropy IRL baseline.
//
// Each agent is treated on its own: the opponent's demonstrated actions are
// replayed open loop, which turns every demonstration into a time-indexed
// single-agent MDP. Rewards are fitted by matching feature counts under the
// soft-optimal policy of those MDPs. Nothing here sees the CPT parameters or
// level beliefs.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "brsmg/demonstration.hpp"
#include "brsmg/game_model.hpp"

namespace brsmg {

// Finite-horizon MDP of one agent with the opponent pinned to its
// demonstrated actions. Tables are indexed [t][s][a] and only filled for
// states reachable from the start at time t.
struct InducedMdp {
  const GameSpec* spec = nullptr;
  Agent agent = Agent::kFirst;
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  StateId start = 0;
  std::vector<ActionId> opp_actions;  // [t]
  std::vector<std::vector<StateId>> reachable;  // [t], sorted
  std::vector<StateId> next;
  std::vector<double> reward;

  std::size_t at(int t, StateId s, ActionId a) const {
    return (static_cast<std::size_t>(t) * num_states + s) * num_actions + a;
  }
};

InducedMdp induce_mdp(const GameSpec& spec, const RewardParams& rp,
                      const Demonstration& demo, Agent agent);
InducedMdp induce_mdp(const GameSpec& spec, const RewardTable& rewards,
                      const Demonstration& demo, Agent agent);

struct SoftSolution {
  std::vector<double> value;   // [t][s], t in [0, horizon]; 0 if unreachable
  std::vector<double> policy;  // [t][s][a]
};

// V_t(s) = log sum_a exp(R_t(s,a) + V_{t+1}(s')), V_horizon = 0. Absorbing
// states of the game are not special-cased; they keep earning their rewards
// as they do in the game itself.
SoftSolution soft_value_iteration(const InducedMdp& mdp);

// Feature counts summed over the horizon under the soft policy.
std::vector<double> expected_feature_counts(const InducedMdp& mdp,
                                            const SoftSolution& sol);
std::vector<double> empirical_feature_counts(const GameSpec& spec,
                                             const Demonstration& demo,
                                             Agent agent);

struct MeirlGradient {
  double loglik = 0.0;        // sum_t log pi_t(a_t | s_t)
  std::vector<double> grad;   // empirical - expected, summed over demos
};

MeirlGradient meirl_gradient(const GameSpec& spec, const RewardParams& rp,
                             std::span<const Demonstration> demos, Agent agent,
                             int workers = 1);

struct MeirlOptions {
  double eta = 0.0015;
  int epochs = 100;
  double omega_min = 1.0;
  double omega_max = 2.5;
  bool mean_gradient = true;
  int workers = 1;
};

struct MeirlEpoch {
  int epoch = 0;
  double loglik = 0.0;
  double grad_norm = 0.0;
  std::vector<double> omega;
};

struct MeirlTrace {
  std::vector<MeirlEpoch> epochs;
  std::vector<double> omega;  // final weights
  bool diverged = false;
  std::string message;
};

// Projected gradient ascent on agent's weights, starting from init (the
// other agent's weights in `init` are only used to build the reward table
// and are never updated).
MeirlTrace meirl_learn(const GameSpec& spec,
                       std::span<const Demonstration> demos, Agent agent,
                       const RewardParams& init, const MeirlOptions& opts);

}  // namespace brsmg
