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

// Exact policy gradients by value-gradient iteration.
//
// The max in the Bellman equation is replaced by the power-mean smooth max
// (sum_a Q_a^kappa)^(1/kappa) when differentiating, which turns the value
// gradient into the fixed point of a linear recursion:
//
//   dQ(s,a) = sum_j drho_j u(x_j) + rho_j u'(x_j) (dR_j + discount dV(s'_j))
//   dV(s)   = sum_a (Q(s,a) / M(s))^(kappa - 1) dQ(s,a)
//
// with x_j = R_j + discount V(s'_j) ranked as in the forward solver. The
// recursion contracts when (R_max / R_min^(2 - alpha)) alpha discount < 1.

#pragma once

#include <array>
#include <span>
#include <vector>

#include "brsmg/forward_solver.hpp"
#include "brsmg/game_model.hpp"

namespace brsmg {

inline constexpr double kDefaultKappa = 100.0;

// Raised when the contraction condition for the gradient recursion fails.
class GradientConditionError : public Error {
 public:
  using Error::Error;
};

// Index layout of the learnable vector: the weighting exponent (one shared
// entry, or one per agent) followed by agent 1's and agent 2's reward
// weights.
struct ParamLayout {
  std::array<int, 2> feature_dim = {0, 0};
  bool shared_gamma = true;

  static ParamLayout for_game(const GameSpec& spec, bool shared_gamma = true);

  int num_gamma() const { return shared_gamma ? 1 : 2; }
  int size() const { return num_gamma() + feature_dim[0] + feature_dim[1]; }
  int gamma_index(Agent agent) const {
    return shared_gamma ? 0 : index(agent);
  }
  int omega_offset(Agent agent) const {
    return num_gamma() + (agent == Agent::kFirst ? 0 : feature_dim[0]);
  }
};

// Flattens (gamma, omega_1, omega_2). With a shared exponent both agents'
// gammas must agree.
std::vector<double> pack_params(const ParamLayout& layout,
                                const CptParams& cpt, const RewardParams& rp);
// Writes the learnable entries back; alpha, beta and the collision reward
// are left untouched.
void unpack_params(const ParamLayout& layout, std::span<const double> theta,
                   CptParams& cpt, RewardParams& rp);

// (sum x_i^kappa)^(1/kappa), evaluated in the log domain. Entries must be
// positive.
double smooth_max(std::span<const double> x, double kappa);
// Partial derivatives (x_i / M)^(kappa - 1) of the smooth max.
std::vector<double> smooth_max_weights(std::span<const double> x,
                                       double kappa);

struct GradientOptions {
  double kappa = kDefaultKappa;
  double tol = 1e-6;
  int max_sweeps = 10000;
  int workers = 1;
};

// Gradients of one (agent, level) pair; the last index runs over the
// parameter layout.
struct LevelGradients {
  std::vector<double> d_value;   // [s][p]
  std::vector<double> d_q;       // [s][a][p]
  std::vector<double> d_policy;  // [s][a][p]
  int sweeps = 0;
  double residual = 0.0;
  std::vector<double> residual_history;
};

class GradientTables {
 public:
  GradientTables() = default;
  GradientTables(const ParamLayout& layout, int num_states,
                 std::array<int, 2> num_actions, int k_max, double kappa);

  const ParamLayout& layout() const { return layout_; }
  int num_params() const { return layout_.size(); }
  int num_states() const { return num_states_; }
  int num_actions(Agent agent) const { return num_actions_[index(agent)]; }
  int k_max() const { return k_max_; }
  double kappa() const { return kappa_; }

  // Follower gradients of `agent`: [s][leader action][own action][p].
  const std::vector<double>& level0(Agent agent) const {
    return level0_[index(agent)];
  }
  std::vector<double>& level0(Agent agent) { return level0_[index(agent)]; }

  const LevelGradients& level(Agent agent, int k) const;
  LevelGradients& level(Agent agent, int k);

  std::span<const double> d_policy(Agent agent, int k, StateId s,
                                   ActionId a) const;
  std::span<const double> d_value(Agent agent, int k, StateId s) const;

 private:
  ParamLayout layout_;
  int num_states_ = 0;
  std::array<int, 2> num_actions_ = {0, 0};
  int k_max_ = 0;
  double kappa_ = kDefaultKappa;
  std::array<std::vector<double>, 2> level0_;
  std::array<std::vector<LevelGradients>, 2> levels_;
};

// Jacobian of the follower row at (s, leader action): [own action][p].
// Only agent's own reward block is non-zero.
std::vector<double> level0_policy_gradient(const GameSpec& spec,
                                           const RewardParams& rp,
                                           const ParamLayout& layout,
                                           StateId s, ActionId a_leader,
                                           Agent agent);

// Gradient of the ego's belief about the opponent, laid out like the
// OpponentModel it accompanies with a trailing parameter index.
class OpponentGradient {
 public:
  static OpponentGradient follower(std::span<const double> table,
                                   int ego_actions, int opp_actions,
                                   int num_params);
  static OpponentGradient unconditional(std::span<const double> table,
                                        int opp_actions, int num_params);

  // [opp action][p]
  std::span<const double> row(StateId s, ActionId ego) const {
    const std::size_t stride =
        static_cast<std::size_t>(opp_actions_) * num_params_;
    const std::size_t base =
        conditional_ ? (static_cast<std::size_t>(s) * ego_actions_ + ego) *
                           stride
                     : static_cast<std::size_t>(s) * stride;
    return table_.subspan(base, stride);
  }

 private:
  OpponentGradient(std::span<const double> table, bool conditional,
                   int ego_actions, int opp_actions, int num_params)
      : table_(table),
        conditional_(conditional),
        ego_actions_(ego_actions),
        opp_actions_(opp_actions),
        num_params_(num_params) {}

  std::span<const double> table_;
  bool conditional_;
  int ego_actions_;
  int opp_actions_;
  int num_params_;
};

struct GradBellmanResult {
  std::vector<double> d_value;  // [s][p]
  std::vector<double> d_q;      // [s][a][p]
};

// One sweep of the value-gradient recursion for `agent` around converged
// forward tables (value, q). Refuses to run when the contraction condition
// fails.
GradBellmanResult grad_bellman(const GameSpec& spec, const RewardParams& rp,
                               const CptParams& cpt, const ParamLayout& layout,
                               std::span<const double> value,
                               std::span<const double> q,
                               std::span<const double> d_value,
                               const OpponentModel& opp,
                               const OpponentGradient& d_opp, Agent agent,
                               double kappa);

// Gradients for every agent and level of `policies` (which must have been
// solved with the same parameters). Levels are processed bottom-up.
GradientTables solve_gradients(const GameSpec& spec, const RewardParams& rp,
                               const CptParams& cpt,
                               const LevelPolicySet& policies,
                               const ParamLayout& layout,
                               const GradientOptions& opts = {});

}  // namespace brsmg
