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

#pragma once

#include <array>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace brsmg {

using StateId = int;
using ActionId = int;

enum class Agent : int { kFirst = 0, kSecond = 1 };

inline constexpr std::array<Agent, 2> kAgents = {Agent::kFirst,
                                                 Agent::kSecond};

constexpr int index(Agent agent) { return static_cast<int>(agent); }
constexpr Agent opponent(Agent agent) {
  return agent == Agent::kFirst ? Agent::kSecond : Agent::kFirst;
}

// Error hierarchy. Everything thrown by the library derives from Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ParameterError : public Error {
 public:
  using Error::Error;
};
class DomainError : public Error {
 public:
  using Error::Error;
};
class ContractError : public Error {
 public:
  using Error::Error;
};
class IndexError : public Error {
 public:
  using Error::Error;
};
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, int sweeps)
      : Error(what), residual_(residual), sweeps_(sweeps) {}
  double residual() const { return residual_; }
  int sweeps() const { return sweeps_; }

 private:
  double residual_;
  int sweeps_;
};

// Joint action (a1, a2) from an agent-relative (own, opponent) pair.
constexpr std::pair<ActionId, ActionId> joint_action(Agent agent, ActionId own,
                                                     ActionId opp) {
  return agent == Agent::kFirst ? std::pair{own, opp} : std::pair{opp, own};
}

// Two-player Markov game with deterministic transitions. All functions are
// tabulated at construction; afterwards the object is immutable.
class GameSpec {
 public:
  using TransitionFn = std::function<StateId(StateId, ActionId, ActionId)>;
  // (state, own action, opponent action, agent, out feature vector)
  using FeatureFn = std::function<void(StateId, ActionId, ActionId, Agent,
                                       std::span<double>)>;
  using CollisionFn = std::function<bool(StateId, ActionId, ActionId)>;

  GameSpec(int num_states, std::array<int, 2> num_actions, int feature_dim,
           double discount, const TransitionFn& transition,
           const FeatureFn& features, const CollisionFn& collision,
           std::vector<StateId> terminal_states);

  int num_states() const { return num_states_; }
  int num_actions(Agent agent) const { return num_actions_[index(agent)]; }
  int feature_dim() const { return feature_dim_; }
  double discount() const { return discount_; }
  const std::vector<StateId>& terminal_states() const { return terminal_; }
  bool is_terminal(StateId s) const;

  StateId next(StateId s, ActionId a1, ActionId a2) const;
  bool collision(StateId s, ActionId a1, ActionId a2) const;
  // Feature vector of `agent` for (state, own action, opponent action).
  std::span<const double> features(StateId s, ActionId own, ActionId opp,
                                   Agent agent) const;

  void check_state(StateId s) const;
  void check_action(Agent agent, ActionId a) const;

 private:
  std::size_t joint_index(StateId s, ActionId a1, ActionId a2) const {
    return (static_cast<std::size_t>(s) * num_actions_[0] + a1) *
               num_actions_[1] +
           a2;
  }

  int num_states_;
  std::array<int, 2> num_actions_;
  int feature_dim_;
  double discount_;
  std::vector<StateId> next_;
  std::vector<unsigned char> collision_;
  std::vector<unsigned char> terminal_mask_;
  std::vector<StateId> terminal_;
  // [agent][s][a1][a2][d]
  std::vector<double> features_;
};

struct RewardParams {
  std::array<std::vector<double>, 2> omega;
  double collision_reward = 1.0;

  const std::vector<double>& weights(Agent agent) const {
    return omega[index(agent)];
  }
};

struct CptParams {
  std::array<double, 2> alpha = {1.0, 1.0};
  std::array<double, 2> gamma = {1.0, 1.0};
  double boltzmann_beta = 1.0;

  static CptParams risk_neutral() { return {}; }
  static CptParams uniform(double alpha, double gamma, double beta = 1.0) {
    return {{alpha, alpha}, {gamma, gamma}, beta};
  }
  // Throws ParameterError unless all exponents lie in (0, 1] and beta >= 0.
  void validate() const;
};

// Realized one-step reward of `agent`: collision_reward on collisions,
// otherwise omega^T phi.
double reward(const GameSpec& spec, const RewardParams& rp, StateId s,
              ActionId own, ActionId opp, Agent agent);

struct RewardBounds {
  double min;
  double max;
};

// Exact bounds by enumeration of every (s, a1, a2, agent).
RewardBounds reward_bounds(const GameSpec& spec, const RewardParams& rp);

// Contraction condition for value-gradient iteration, checked for both
// agents' alpha: (R_max / R_min^(2 - alpha)) * alpha * discount < 1.
bool check_gradient_condition(const GameSpec& spec, const RewardParams& rp,
                              const CptParams& cpt);
bool check_gradient_condition(RewardBounds bounds, double alpha,
                              double discount);

// Throws ParameterError if dimensions mismatch or any realized reward < 1.
void validate_rewards(const GameSpec& spec, const RewardParams& rp);

// Dense table of realized rewards, indexed [agent][s][own][opp].
class RewardTable {
 public:
  RewardTable(const GameSpec& spec, const RewardParams& rp);

  double operator()(Agent agent, StateId s, ActionId own, ActionId opp) const {
    return table_[offset(agent, s, own, opp)];
  }
  RewardBounds bounds() const { return bounds_; }

 private:
  std::size_t offset(Agent agent, StateId s, ActionId own, ActionId opp) const {
    const int n_own = num_actions_[index(agent)];
    const int n_opp = num_actions_[index(opponent(agent))];
    return agent_offset_[index(agent)] +
           (static_cast<std::size_t>(s) * n_own + own) * n_opp + opp;
  }

  std::array<int, 2> num_actions_;
  std::array<std::size_t, 2> agent_offset_;
  std::vector<double> table_;
  RewardBounds bounds_;
};

}  // namespace brsmg
