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

#include "brsmg/baseline_meirl.hpp"

#include <algorithm>
#include <cmath>

#include "parallel.hpp"

namespace brsmg {
namespace {

ActionId own_action(const DemoStep& step, Agent agent) {
  return agent == Agent::kFirst ? step.a1 : step.a2;
}

ActionId opp_action(const DemoStep& step, Agent agent) {
  return agent == Agent::kFirst ? step.a2 : step.a1;
}

double log_sum_exp(std::span<const double> x) {
  const double m = *std::max_element(x.begin(), x.end());
  double z = 0.0;
  for (double v : x) z += std::exp(v - m);
  return m + std::log(z);
}

}  // namespace

InducedMdp induce_mdp(const GameSpec& spec, const RewardParams& rp,
                      const Demonstration& demo, Agent agent) {
  return induce_mdp(spec, RewardTable(spec, rp), demo, agent);
}

InducedMdp induce_mdp(const GameSpec& spec, const RewardTable& rewards,
                      const Demonstration& demo, Agent agent) {
  validate_demo(spec, demo);
  InducedMdp mdp;
  mdp.spec = &spec;
  mdp.agent = agent;
  mdp.horizon = static_cast<int>(demo.size());
  mdp.num_states = spec.num_states();
  mdp.num_actions = spec.num_actions(agent);
  mdp.start = demo.steps.front().state;
  const std::size_t n = static_cast<std::size_t>(mdp.horizon) *
                        mdp.num_states * mdp.num_actions;
  mdp.next.assign(n, 0);
  mdp.reward.assign(n, 0.0);
  std::vector<unsigned char> seen(mdp.num_states);
  std::vector<StateId> frontier = {mdp.start};
  for (int t = 0; t < mdp.horizon; ++t) {
    const ActionId b = opp_action(demo.steps[t], agent);
    mdp.opp_actions.push_back(b);
    std::fill(seen.begin(), seen.end(), 0);
    std::vector<StateId> next_frontier;
    for (StateId s : frontier) {
      for (ActionId a = 0; a < mdp.num_actions; ++a) {
        const auto [a1, a2] = joint_action(agent, a, b);
        const StateId s2 = spec.next(s, a1, a2);
        mdp.next[mdp.at(t, s, a)] = s2;
        mdp.reward[mdp.at(t, s, a)] = rewards(agent, s, a, b);
        if (!seen[s2]) {
          seen[s2] = 1;
          next_frontier.push_back(s2);
        }
      }
    }
    mdp.reachable.push_back(frontier);
    std::sort(next_frontier.begin(), next_frontier.end());
    frontier = std::move(next_frontier);
  }
  return mdp;
}

SoftSolution soft_value_iteration(const InducedMdp& mdp) {
  const int ns = mdp.num_states;
  const int na = mdp.num_actions;
  SoftSolution sol;
  sol.value.assign(static_cast<std::size_t>(mdp.horizon + 1) * ns, 0.0);
  sol.policy.assign(static_cast<std::size_t>(mdp.horizon) * ns * na, 0.0);
  std::vector<double> q(na);
  for (int t = mdp.horizon - 1; t >= 0; --t) {
    const double* v_next =
        sol.value.data() + static_cast<std::size_t>(t + 1) * ns;
    for (StateId s : mdp.reachable[t]) {
      for (ActionId a = 0; a < na; ++a) {
        const std::size_t i = mdp.at(t, s, a);
        q[a] = mdp.reward[i] + v_next[mdp.next[i]];
      }
      const double v = log_sum_exp(q);
      sol.value[static_cast<std::size_t>(t) * ns + s] = v;
      for (ActionId a = 0; a < na; ++a) {
        sol.policy[mdp.at(t, s, a)] = std::exp(q[a] - v);
      }
    }
  }
  return sol;
}

std::vector<double> expected_feature_counts(const InducedMdp& mdp,
                                            const SoftSolution& sol) {
  if (!mdp.spec) throw ContractError("expected_feature_counts: no game");
  const GameSpec& spec = *mdp.spec;
  const int dim = spec.feature_dim();
  std::vector<double> counts(dim, 0.0);
  std::vector<double> dist(mdp.num_states, 0.0), next_dist(mdp.num_states);
  dist[mdp.start] = 1.0;
  for (int t = 0; t < mdp.horizon; ++t) {
    std::fill(next_dist.begin(), next_dist.end(), 0.0);
    const ActionId b = mdp.opp_actions[t];
    for (StateId s : mdp.reachable[t]) {
      if (dist[s] == 0.0) continue;
      for (ActionId a = 0; a < mdp.num_actions; ++a) {
        const std::size_t i = mdp.at(t, s, a);
        const double mass = dist[s] * sol.policy[i];
        next_dist[mdp.next[i]] += mass;
        const auto [a1, a2] = joint_action(mdp.agent, a, b);
        if (spec.collision(s, a1, a2)) continue;
        const auto phi = spec.features(s, a, b, mdp.agent);
        for (int d = 0; d < dim; ++d) counts[d] += mass * phi[d];
      }
    }
    dist.swap(next_dist);
  }
  return counts;
}

std::vector<double> empirical_feature_counts(const GameSpec& spec,
                                             const Demonstration& demo,
                                             Agent agent) {
  const int dim = spec.feature_dim();
  std::vector<double> counts(dim, 0.0);
  for (const DemoStep& step : demo.steps) {
    if (spec.collision(step.state, step.a1, step.a2)) continue;
    const auto phi = spec.features(step.state, own_action(step, agent),
                                   opp_action(step, agent), agent);
    for (int d = 0; d < dim; ++d) counts[d] += phi[d];
  }
  return counts;
}

MeirlGradient meirl_gradient(const GameSpec& spec, const RewardParams& rp,
                             std::span<const Demonstration> demos, Agent agent,
                             int workers) {
  const int dim = spec.feature_dim();
  const RewardTable rewards(spec, rp);
  std::vector<MeirlGradient> terms(demos.size());
  detail::parallel_for(
      static_cast<int>(demos.size()), workers, [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
          const Demonstration& demo = demos[i];
          const InducedMdp mdp = induce_mdp(spec, rewards, demo, agent);
          const SoftSolution sol = soft_value_iteration(mdp);
          MeirlGradient& out = terms[i];
          out.grad = empirical_feature_counts(spec, demo, agent);
          const auto expected = expected_feature_counts(mdp, sol);
          for (int d = 0; d < dim; ++d) out.grad[d] -= expected[d];
          for (int t = 0; t < mdp.horizon; ++t) {
            const DemoStep& step = demo.steps[t];
            out.loglik += std::log(
                sol.policy[mdp.at(t, step.state, own_action(step, agent))]);
          }
        }
      });
  MeirlGradient total;
  total.grad.assign(dim, 0.0);
  for (const auto& t : terms) {
    total.loglik += t.loglik;
    for (int d = 0; d < dim; ++d) total.grad[d] += t.grad[d];
  }
  return total;
}

MeirlTrace meirl_learn(const GameSpec& spec,
                       std::span<const Demonstration> demos, Agent agent,
                       const RewardParams& init, const MeirlOptions& opts) {
  if (demos.empty()) throw ContractError("meirl_learn: no demonstrations");
  if (opts.epochs < 0 || !(opts.eta >= 0.0)) {
    throw ParameterError("meirl_learn: epochs and eta must be non-negative");
  }
  RewardParams rp = init;
  auto& omega = rp.omega[index(agent)];
  if (static_cast<int>(omega.size()) != spec.feature_dim()) {
    throw ParameterError(
        "meirl_learn: omega dimension does not match features");
  }
  const double scale =
      opts.mean_gradient ? 1.0 / static_cast<double>(demos.size()) : 1.0;
  MeirlTrace trace;
  trace.omega = omega;
  for (int epoch = 0; epoch <= opts.epochs; ++epoch) {
    const MeirlGradient g =
        meirl_gradient(spec, rp, demos, agent, opts.workers);
    const bool finite =
        std::isfinite(g.loglik) &&
        std::all_of(g.grad.begin(), g.grad.end(),
                    [](double x) { return std::isfinite(x); });
    if (!finite) {
      trace.diverged = true;
      trace.message =
          "non-finite likelihood or gradient at epoch " + std::to_string(epoch);
      break;
    }
    MeirlEpoch rec;
    rec.epoch = epoch;
    rec.loglik = g.loglik;
    double sq = 0.0;
    for (double x : g.grad) sq += x * x;
    rec.grad_norm = std::sqrt(sq);
    rec.omega = omega;
    trace.epochs.push_back(std::move(rec));
    trace.omega = omega;
    if (epoch == opts.epochs) break;
    for (std::size_t d = 0; d < omega.size(); ++d) {
      omega[d] = std::clamp(omega[d] + opts.eta * scale * g.grad[d],
                            opts.omega_min, opts.omega_max);
    }
  }
  return trace;
}

}  // namespace brsmg
