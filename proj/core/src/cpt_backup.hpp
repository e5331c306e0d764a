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

// CPT backup of a single (state, ego action) pair, shared by the forward and
// gradient solvers so both see the same ranking and decision weights.

#pragma once

#include <span>
#include <vector>

#include "brsmg/cpt_measure.hpp"
#include "brsmg/game_model.hpp"

namespace brsmg::detail {

struct Backup {
  // Everything below is in rank order (descending outcome value).
  std::vector<int> order;         // opponent action
  std::vector<StateId> next;      // successor state
  std::vector<double> reward;     // realized ego reward
  std::vector<double> x;          // reward + discount * V(next)
  std::vector<double> prob;       // clamped opponent probability
  std::vector<double> rho_tilde;  // rank-dependent decision weights
  std::vector<double> rho;        // normalized weights
  double rho_sum = 0.0;
  double q = 0.0;

  void resize(int n) {
    order.resize(n);
    next.resize(n);
    reward.resize(n);
    x.resize(n);
    prob.resize(n);
    rho_tilde.resize(n);
    rho.resize(n);
  }
};

inline void evaluate_backup(const GameSpec& spec, const RewardTable& rewards,
                            Agent agent, StateId s, ActionId own,
                            std::span<const double> opp_probs,
                            std::span<const double> value, double alpha,
                            double gamma, Backup& out) {
  const int n = static_cast<int>(opp_probs.size());
  out.resize(n);
  const double discount = spec.discount();
  for (int b = 0; b < n; ++b) {
    const auto [a1, a2] = joint_action(agent, own, b);
    out.order[b] = b;
    out.next[b] = spec.next(s, a1, a2);
    out.reward[b] = rewards(agent, s, own, b);
    out.x[b] = out.reward[b] + discount * value[out.next[b]];
  }
  // Stable insertion sort by descending x; ties keep opponent-action order.
  for (int i = 1; i < n; ++i) {
    for (int j = i; j > 0 && out.x[j] > out.x[j - 1]; --j) {
      std::swap(out.order[j], out.order[j - 1]);
      std::swap(out.next[j], out.next[j - 1]);
      std::swap(out.reward[j], out.reward[j - 1]);
      std::swap(out.x[j], out.x[j - 1]);
    }
  }
  for (int j = 0; j < n; ++j) {
    const double p = opp_probs[out.order[j]];
    out.prob[j] = p < cpt::kProbabilityFloor ? 0.0 : p;
  }
  cpt::decision_weights_into(out.prob, gamma, out.rho_tilde);
  double total = 0.0;
  for (int j = 0; j < n; ++j) total += out.rho_tilde[j];
  if (!(total > 0.0)) {
    throw DomainError("degenerate decision weights: all entries are zero");
  }
  out.rho_sum = total;
  double q = 0.0;
  for (int j = 0; j < n; ++j) {
    out.rho[j] = out.rho_tilde[j] / total;
    if (!(out.x[j] >= 0.0)) {
      throw ContractError("CPT backup: negative utility argument");
    }
    q += out.rho[j] * cpt::utility_gain(out.x[j], alpha);
  }
  out.q = q;
}

}  // namespace brsmg::detail
