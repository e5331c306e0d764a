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

#include "brsmg/forward_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "brsmg/cpt_measure.hpp"
#include "brsmg/log.hpp"
#include "cpt_backup.hpp"
#include "parallel.hpp"

namespace brsmg {

OpponentModel OpponentModel::follower(std::span<const double> table,
                                      int ego_actions, int opp_actions) {
  return OpponentModel(table, true, ego_actions, opp_actions);
}

OpponentModel OpponentModel::unconditional(std::span<const double> table,
                                           int opp_actions) {
  return OpponentModel(table, false, 0, opp_actions);
}

LevelPolicySet::LevelPolicySet(int num_states, std::array<int, 2> num_actions,
                               int k_max)
    : num_states_(num_states), num_actions_(num_actions), k_max_(k_max) {
  if (k_max < 1) throw ParameterError("k_max must be at least 1");
  for (Agent agent : kAgents) {
    levels_[index(agent)].resize(k_max);
  }
}

const LevelTables& LevelPolicySet::level(Agent agent, int k) const {
  if (k < 1 || k > k_max_) {
    throw IndexError("level " + std::to_string(k) + " outside [1, k_max]");
  }
  return levels_[index(agent)][k - 1];
}

LevelTables& LevelPolicySet::level(Agent agent, int k) {
  if (k < 1 || k > k_max_) {
    throw IndexError("level " + std::to_string(k) + " outside [1, k_max]");
  }
  return levels_[index(agent)][k - 1];
}

std::span<const double> LevelPolicySet::policy_row(Agent agent, int k,
                                                   StateId s) const {
  const auto& pol = level(agent, k).policy;
  const int n = num_actions(agent);
  return {pol.data() + static_cast<std::size_t>(s) * n,
          static_cast<std::size_t>(n)};
}

OpponentModel LevelPolicySet::opponent_model(Agent ego, int k) const {
  const Agent opp = opponent(ego);
  if (k == 1) {
    return OpponentModel::follower(level0(opp), num_actions(ego),
                                   num_actions(opp));
  }
  return OpponentModel::unconditional(level(opp, k - 1).policy,
                                      num_actions(opp));
}

void quantal_policy_into(std::span<const double> q_row, double beta,
                         std::span<double> out) {
  double top = -std::numeric_limits<double>::infinity();
  for (double q : q_row) top = std::max(top, beta * q);
  double total = 0.0;
  for (std::size_t a = 0; a < q_row.size(); ++a) {
    out[a] = std::exp(beta * q_row[a] - top);
    total += out[a];
  }
  for (std::size_t a = 0; a < q_row.size(); ++a) out[a] /= total;
}

std::vector<double> quantal_policy(std::span<const double> q_row,
                                   double beta) {
  std::vector<double> out(q_row.size());
  quantal_policy_into(q_row, beta, out);
  return out;
}

std::vector<double> level0_policy(const GameSpec& spec, const RewardParams& rp,
                                  StateId s, ActionId a_leader, Agent agent) {
  spec.check_action(opponent(agent), a_leader);
  std::vector<double> r(spec.num_actions(agent));
  for (ActionId a = 0; a < spec.num_actions(agent); ++a) {
    r[a] = reward(spec, rp, s, a, a_leader, agent);
  }
  return quantal_policy(r, 1.0);
}

std::vector<double> level0_table(const GameSpec& spec,
                                 const RewardTable& rewards, Agent agent) {
  const int n_own = spec.num_actions(agent);
  const int n_lead = spec.num_actions(opponent(agent));
  std::vector<double> table(static_cast<std::size_t>(spec.num_states()) *
                            n_lead * n_own);
  std::vector<double> r(n_own);
  for (StateId s = 0; s < spec.num_states(); ++s) {
    for (ActionId lead = 0; lead < n_lead; ++lead) {
      for (ActionId a = 0; a < n_own; ++a) r[a] = rewards(agent, s, a, lead);
      const std::size_t base =
          (static_cast<std::size_t>(s) * n_lead + lead) * n_own;
      quantal_policy_into(r, 1.0,
                          std::span<double>(table.data() + base, n_own));
    }
  }
  return table;
}

BellmanResult cpt_bellman(const GameSpec& spec, const RewardTable& rewards,
                          const CptParams& cpt, std::span<const double> value,
                          const OpponentModel& opp, Agent agent, int workers) {
  const int n_states = spec.num_states();
  const int n_own = spec.num_actions(agent);
  const double alpha = cpt.alpha[index(agent)];
  const double gamma = cpt.gamma[index(agent)];
  if (value.size() != static_cast<std::size_t>(n_states)) {
    throw ContractError("cpt_bellman: value table has wrong size");
  }
  BellmanResult out;
  out.value.resize(n_states);
  out.q.resize(static_cast<std::size_t>(n_states) * n_own);
  detail::parallel_for(n_states, workers, [&](int begin, int end) {
    detail::Backup backup;
    for (StateId s = begin; s < end; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (ActionId a = 0; a < n_own; ++a) {
        detail::evaluate_backup(spec, rewards, agent, s, a, opp.row(s, a),
                                value, alpha, gamma, backup);
        out.q[static_cast<std::size_t>(s) * n_own + a] = backup.q;
        best = std::max(best, backup.q);
      }
      out.value[s] = best;
    }
  });
  return out;
}

LevelTables solve_level(const GameSpec& spec, const RewardTable& rewards,
                        const CptParams& cpt, const OpponentModel& opp,
                        Agent agent, const SolverOptions& opts,
                        std::span<const double> initial_value) {
  const int n_states = spec.num_states();
  const int n_own = spec.num_actions(agent);
  const RewardBounds bounds = rewards.bounds();
  if (!(bounds.min >= 1.0)) {
    throw ParameterError("solve_level: requires R_min >= 1");
  }

  LevelTables out;
  if (!initial_value.empty()) {
    if (initial_value.size() != static_cast<std::size_t>(n_states)) {
      throw ContractError("solve_level: initial value has wrong size");
    }
    out.value.assign(initial_value.begin(), initial_value.end());
  } else {
    const double v0 =
        cpt::utility_gain(bounds.min, cpt.alpha[index(agent)]) /
        (1.0 - spec.discount());
    out.value.assign(n_states, v0);
  }

  double residual = std::numeric_limits<double>::infinity();
  int sweeps = 0;
  while (residual > opts.tol) {
    if (sweeps >= opts.max_sweeps) {
      std::ostringstream os;
      os << "value iteration for agent " << index(agent) + 1
         << " did not converge in " << sweeps << " sweeps (residual "
         << residual << ")";
      throw ConvergenceError(os.str(), residual, sweeps);
    }
    BellmanResult next =
        cpt_bellman(spec, rewards, cpt, out.value, opp, agent, opts.workers);
    residual = 0.0;
    for (StateId s = 0; s < n_states; ++s) {
      residual = std::max(residual, std::abs(next.value[s] - out.value[s]));
    }
    out.value = std::move(next.value);
    out.residual_history.push_back(residual);
    ++sweeps;
  }
  out.sweeps = sweeps;
  out.residual = residual;

  // Q-values consistent with the converged value table.
  BellmanResult final_backup =
      cpt_bellman(spec, rewards, cpt, out.value, opp, agent, opts.workers);
  out.q = std::move(final_backup.q);
  out.policy.resize(out.q.size());
  for (StateId s = 0; s < n_states; ++s) {
    const std::size_t base = static_cast<std::size_t>(s) * n_own;
    quantal_policy_into(std::span<const double>(out.q.data() + base, n_own),
                        cpt.boltzmann_beta,
                        std::span<double>(out.policy.data() + base, n_own));
  }
  return out;
}

LevelPolicySet solve_all(const GameSpec& spec, const RewardParams& rp,
                         const CptParams& cpt, int k_max,
                         const SolverOptions& opts,
                         const LevelPolicySet* warm_start) {
  cpt.validate();
  validate_rewards(spec, rp);
  const RewardTable rewards(spec, rp);
  if (!check_gradient_condition(rewards.bounds(), cpt.alpha[0],
                                spec.discount()) ||
      !check_gradient_condition(rewards.bounds(), cpt.alpha[1],
                                spec.discount())) {
    log_message(LogLevel::kWarning,
                "reward bounds violate the value-gradient contraction "
                "condition; forward solving is unaffected");
  }

  LevelPolicySet set(spec.num_states(),
                     {spec.num_actions(Agent::kFirst),
                      spec.num_actions(Agent::kSecond)},
                     k_max);
  for (Agent agent : kAgents) {
    set.level0(agent) = level0_table(spec, rewards, agent);
  }
  for (int k = 1; k <= k_max; ++k) {
    for (Agent agent : kAgents) {
      std::span<const double> init;
      if (warm_start != nullptr && warm_start->k_max() >= k &&
          warm_start->num_states() == spec.num_states()) {
        init = warm_start->level(agent, k).value;
      }
      set.level(agent, k) = solve_level(spec, rewards, cpt,
                                        set.opponent_model(agent, k), agent,
                                        opts, init);
    }
  }
  return set;
}

}  // namespace brsmg
