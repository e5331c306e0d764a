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

#include "brsmg/game_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace brsmg {

GameSpec::GameSpec(int num_states, std::array<int, 2> num_actions,
                   int feature_dim, double discount,
                   const TransitionFn& transition, const FeatureFn& features,
                   const CollisionFn& collision,
                   std::vector<StateId> terminal_states)
    : num_states_(num_states),
      num_actions_(num_actions),
      feature_dim_(feature_dim),
      discount_(discount),
      terminal_(std::move(terminal_states)) {
  if (num_states <= 0 || num_actions[0] <= 0 || num_actions[1] <= 0 ||
      feature_dim <= 0) {
    throw ParameterError("GameSpec: sizes must be positive");
  }
  if (!(discount > 0.0 && discount < 1.0)) {
    throw ParameterError("GameSpec: discount must lie strictly inside (0,1)");
  }

  const std::size_t n_joint = static_cast<std::size_t>(num_states) *
                              num_actions[0] * num_actions[1];
  next_.resize(n_joint);
  collision_.resize(n_joint);
  for (StateId s = 0; s < num_states; ++s) {
    for (ActionId a1 = 0; a1 < num_actions[0]; ++a1) {
      for (ActionId a2 = 0; a2 < num_actions[1]; ++a2) {
        const StateId sn = transition(s, a1, a2);
        if (sn < 0 || sn >= num_states) {
          std::ostringstream os;
          os << "GameSpec: transition(" << s << "," << a1 << "," << a2
             << ") = " << sn << " is outside the state set";
          throw ContractError(os.str());
        }
        next_[joint_index(s, a1, a2)] = sn;
        collision_[joint_index(s, a1, a2)] = collision(s, a1, a2) ? 1 : 0;
      }
    }
  }

  terminal_mask_.assign(num_states, 0);
  for (StateId t : terminal_) {
    check_state(t);
    terminal_mask_[t] = 1;
    for (ActionId a1 = 0; a1 < num_actions[0]; ++a1) {
      for (ActionId a2 = 0; a2 < num_actions[1]; ++a2) {
        if (next_[joint_index(t, a1, a2)] != t) {
          throw ContractError("GameSpec: absorbing state " +
                              std::to_string(t) + " does not self-loop");
        }
      }
    }
  }

  features_.assign(n_joint * 2 * feature_dim, 0.0);
  std::size_t offset = 0;
  for (Agent agent : kAgents) {
    const int n_own = num_actions[index(agent)];
    const int n_opp = num_actions[index(opponent(agent))];
    for (StateId s = 0; s < num_states; ++s) {
      for (ActionId own = 0; own < n_own; ++own) {
        for (ActionId opp = 0; opp < n_opp; ++opp) {
          features(s, own, opp, agent,
                   std::span<double>(features_.data() + offset, feature_dim));
          offset += feature_dim;
        }
      }
    }
  }
}

bool GameSpec::is_terminal(StateId s) const {
  check_state(s);
  return terminal_mask_[s] != 0;
}

void GameSpec::check_state(StateId s) const {
  if (s < 0 || s >= num_states_) {
    throw IndexError("state index " + std::to_string(s) + " out of range");
  }
}

void GameSpec::check_action(Agent agent, ActionId a) const {
  if (a < 0 || a >= num_actions_[index(agent)]) {
    throw IndexError("action index " + std::to_string(a) +
                     " out of range for agent " +
                     std::to_string(index(agent) + 1));
  }
}

StateId GameSpec::next(StateId s, ActionId a1, ActionId a2) const {
  return next_[joint_index(s, a1, a2)];
}

bool GameSpec::collision(StateId s, ActionId a1, ActionId a2) const {
  return collision_[joint_index(s, a1, a2)] != 0;
}

std::span<const double> GameSpec::features(StateId s, ActionId own,
                                           ActionId opp, Agent agent) const {
  const int n_own = num_actions_[index(agent)];
  const int n_opp = num_actions_[index(opponent(agent))];
  const std::size_t per_agent =
      static_cast<std::size_t>(num_states_) * n_own * n_opp * feature_dim_;
  const std::size_t offset =
      index(agent) * per_agent +
      ((static_cast<std::size_t>(s) * n_own + own) * n_opp + opp) *
          feature_dim_;
  return {features_.data() + offset, static_cast<std::size_t>(feature_dim_)};
}

void CptParams::validate() const {
  for (int i = 0; i < 2; ++i) {
    if (!(alpha[i] > 0.0 && alpha[i] <= 1.0)) {
      throw ParameterError("CptParams: alpha must lie in (0,1]");
    }
    if (!(gamma[i] > 0.0 && gamma[i] <= 1.0)) {
      throw ParameterError("CptParams: gamma must lie in (0,1]");
    }
  }
  if (!(boltzmann_beta >= 0.0)) {
    throw ParameterError("CptParams: beta must be non-negative");
  }
}

double reward(const GameSpec& spec, const RewardParams& rp, StateId s,
              ActionId own, ActionId opp, Agent agent) {
  spec.check_state(s);
  spec.check_action(agent, own);
  spec.check_action(opponent(agent), opp);
  const auto [a1, a2] = joint_action(agent, own, opp);
  if (spec.collision(s, a1, a2)) return rp.collision_reward;
  const auto phi = spec.features(s, own, opp, agent);
  const auto& w = rp.weights(agent);
  if (w.size() != phi.size()) {
    throw ParameterError("reward: omega dimension does not match features");
  }
  double r = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) r += w[j] * phi[j];
  return r;
}

RewardBounds reward_bounds(const GameSpec& spec, const RewardParams& rp) {
  RewardBounds b{std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity()};
  for (Agent agent : kAgents) {
    for (StateId s = 0; s < spec.num_states(); ++s) {
      for (ActionId own = 0; own < spec.num_actions(agent); ++own) {
        for (ActionId opp = 0; opp < spec.num_actions(opponent(agent)); ++opp) {
          const double r = reward(spec, rp, s, own, opp, agent);
          b.min = std::min(b.min, r);
          b.max = std::max(b.max, r);
        }
      }
    }
  }
  return b;
}

bool check_gradient_condition(RewardBounds bounds, double alpha,
                              double discount) {
  return bounds.max / std::pow(bounds.min, 2.0 - alpha) * alpha * discount <
         1.0;
}

bool check_gradient_condition(const GameSpec& spec, const RewardParams& rp,
                              const CptParams& cpt) {
  const RewardBounds b = reward_bounds(spec, rp);
  return check_gradient_condition(b, cpt.alpha[0], spec.discount()) &&
         check_gradient_condition(b, cpt.alpha[1], spec.discount());
}

void validate_rewards(const GameSpec& spec, const RewardParams& rp) {
  for (Agent agent : kAgents) {
    if (rp.weights(agent).size() !=
        static_cast<std::size_t>(spec.feature_dim())) {
      throw ParameterError("RewardParams: omega_" +
                           std::to_string(index(agent) + 1) +
                           " has wrong dimension");
    }
  }
  const RewardBounds b = reward_bounds(spec, rp);
  if (!(b.min >= 1.0)) {
    std::ostringstream os;
    os << "RewardParams: realized reward " << b.min
       << " < 1 violates the R_min >= 1 requirement";
    throw ParameterError(os.str());
  }
}

RewardTable::RewardTable(const GameSpec& spec, const RewardParams& rp)
    : num_actions_{spec.num_actions(Agent::kFirst),
                   spec.num_actions(Agent::kSecond)} {
  const std::size_t per_agent = static_cast<std::size_t>(spec.num_states()) *
                                num_actions_[0] * num_actions_[1];
  agent_offset_ = {0, per_agent};
  table_.resize(2 * per_agent);
  bounds_ = {std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity()};
  for (Agent agent : kAgents) {
    const auto& w = rp.weights(agent);
    if (w.size() != static_cast<std::size_t>(spec.feature_dim())) {
      throw ParameterError("RewardTable: omega dimension mismatch");
    }
    for (StateId s = 0; s < spec.num_states(); ++s) {
      for (ActionId own = 0; own < spec.num_actions(agent); ++own) {
        for (ActionId opp = 0; opp < spec.num_actions(opponent(agent)); ++opp) {
          const auto [a1, a2] = joint_action(agent, own, opp);
          double r = rp.collision_reward;
          if (!spec.collision(s, a1, a2)) {
            const auto phi = spec.features(s, own, opp, agent);
            r = 0.0;
            for (std::size_t j = 0; j < phi.size(); ++j) r += w[j] * phi[j];
          }
          table_[offset(agent, s, own, opp)] = r;
          bounds_.min = std::min(bounds_.min, r);
          bounds_.max = std::max(bounds_.max, r);
        }
      }
    }
  }
}

}  // namespace brsmg
