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

// Risk-sensitive quantal level-k policies.
//
// Level 0 is an uncertain follower: given the opponent's (leader's) action
// it plays a softmax over its own one-step rewards. A level-k agent
// (k >= 1) solves a single-agent CPT dynamic program against the opponent's
// level-(k-1) policy and plays a Boltzmann policy over the converged
// Q-values.

#pragma once

#include <array>
#include <span>
#include <vector>

#include "brsmg/game_model.hpp"

namespace brsmg {

struct SolverOptions {
  double tol = 1e-6;
  int max_sweeps = 10000;
  int workers = 1;
};

// Converged tables of one (agent, level) pair.
struct LevelTables {
  std::vector<double> value;   // [s]
  std::vector<double> q;       // [s][a]
  std::vector<double> policy;  // [s][a]
  int sweeps = 0;
  double residual = 0.0;
  std::vector<double> residual_history;
};

// Distribution of the opponent's action as seen by the ego agent, either
// conditioned on the ego action (level-0 follower) or not.
class OpponentModel {
 public:
  // table[s][ego action][opponent action]
  static OpponentModel follower(std::span<const double> table, int ego_actions,
                                int opp_actions);
  // table[s][opponent action]
  static OpponentModel unconditional(std::span<const double> table,
                                     int opp_actions);

  std::span<const double> row(StateId s, ActionId ego) const {
    const std::size_t base =
        conditional_
            ? (static_cast<std::size_t>(s) * ego_actions_ + ego) * opp_actions_
            : static_cast<std::size_t>(s) * opp_actions_;
    return table_.subspan(base, opp_actions_);
  }
  bool conditional() const { return conditional_; }
  int opp_actions() const { return opp_actions_; }

 private:
  OpponentModel(std::span<const double> table, bool conditional,
                int ego_actions, int opp_actions)
      : table_(table),
        conditional_(conditional),
        ego_actions_(ego_actions),
        opp_actions_(opp_actions) {}

  std::span<const double> table_;
  bool conditional_;
  int ego_actions_;
  int opp_actions_;
};

class LevelPolicySet {
 public:
  LevelPolicySet() = default;
  LevelPolicySet(int num_states, std::array<int, 2> num_actions, int k_max);

  int k_max() const { return k_max_; }
  int num_states() const { return num_states_; }
  int num_actions(Agent agent) const { return num_actions_[index(agent)]; }

  // Level-0 follower table of `agent`: [s][leader action][own action].
  const std::vector<double>& level0(Agent agent) const {
    return level0_[index(agent)];
  }
  std::vector<double>& level0(Agent agent) { return level0_[index(agent)]; }

  // k in [1, k_max].
  const LevelTables& level(Agent agent, int k) const;
  LevelTables& level(Agent agent, int k);

  double policy(Agent agent, int k, StateId s, ActionId a) const {
    return level(agent, k).policy[static_cast<std::size_t>(s) *
                                      num_actions(agent) +
                                  a];
  }
  std::span<const double> policy_row(Agent agent, int k, StateId s) const;

  // What a level-k `ego` believes about its opponent: the opponent's
  // level-(k-1) policy, or the conditional follower table when k == 1.
  OpponentModel opponent_model(Agent ego, int k) const;

 private:
  int num_states_ = 0;
  std::array<int, 2> num_actions_ = {0, 0};
  int k_max_ = 0;
  std::array<std::vector<double>, 2> level0_;
  std::array<std::vector<LevelTables>, 2> levels_;
};

// Softmax of beta * q with max subtraction.
std::vector<double> quantal_policy(std::span<const double> q_row, double beta);
void quantal_policy_into(std::span<const double> q_row, double beta,
                         std::span<double> out);

// Follower row of `agent` at state s given the leader's action.
std::vector<double> level0_policy(const GameSpec& spec, const RewardParams& rp,
                                  StateId s, ActionId a_leader, Agent agent);
// Whole [s][leader][own] table.
std::vector<double> level0_table(const GameSpec& spec,
                                 const RewardTable& rewards, Agent agent);

struct BellmanResult {
  std::vector<double> value;  // [s]
  std::vector<double> q;      // [s][a]
};

// One application of the CPT Bellman operator for `agent`.
BellmanResult cpt_bellman(const GameSpec& spec, const RewardTable& rewards,
                          const CptParams& cpt, std::span<const double> value,
                          const OpponentModel& opp, Agent agent,
                          int workers = 1);

// Value iteration to a sup-norm residual <= tol. `initial_value`, when
// non-empty, replaces the default start u(R_min) / (1 - discount).
LevelTables solve_level(const GameSpec& spec, const RewardTable& rewards,
                        const CptParams& cpt, const OpponentModel& opp,
                        Agent agent, const SolverOptions& opts,
                        std::span<const double> initial_value = {});

// Levels 1..k_max for both agents, bottoming out at the follower model.
// `warm_start`, if given, seeds every level's value iteration.
LevelPolicySet solve_all(const GameSpec& spec, const RewardParams& rp,
                         const CptParams& cpt, int k_max,
                         const SolverOptions& opts = {},
                         const LevelPolicySet* warm_start = nullptr);

}  // namespace brsmg
