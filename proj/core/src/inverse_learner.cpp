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

#include "brsmg/inverse_learner.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "brsmg/log.hpp"
#include "parallel.hpp"

namespace brsmg {
namespace {

ActionId action_of(const DemoStep& step, Agent agent) {
  return agent == Agent::kFirst ? step.a1 : step.a2;
}

LevelBelief level_likelihood(const LevelPolicySet& policies, StateId s,
                             ActionId a, Agent agent) {
  return {policies.policy(agent, kLevels[0], s, a),
          policies.policy(agent, kLevels[1], s, a)};
}

void require_levels(const LevelPolicySet& policies) {
  if (policies.k_max() < kLevels[1]) {
    throw ContractError("level posteriors need policies up to level 2");
  }
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

// Log-likelihood (and gradient, if grads is non-null) of one demo.
LikelihoodResult demo_term(const LevelPolicySet& policies,
                           const GradientTables* grads,
                           const Demonstration& demo) {
  LikelihoodResult out;
  const std::size_t np = grads ? grads->num_params() : 0;
  out.grad.assign(np, 0.0);
  std::vector<double> h0(np), h1(np);
  for (Agent agent : kAgents) {
    LevelBelief belief = uniform_level_prior();
    BeliefGradient g = {std::vector<double>(np, 0.0),
                        std::vector<double>(np, 0.0)};
    for (const DemoStep& step : demo.steps) {
      const ActionId a = action_of(step, agent);
      const LevelBelief pi = level_likelihood(policies, step.state, a, agent);
      const double m = pi[0] * belief[0] + pi[1] * belief[1];
      out.loglik += std::log(m);
      const LevelBelief post = {pi[0] * belief[0] / m, pi[1] * belief[1] / m};
      if (grads) {
        const auto d0 = grads->d_policy(agent, kLevels[0], step.state, a);
        const auto d1 = grads->d_policy(agent, kLevels[1], step.state, a);
        for (std::size_t p = 0; p < np; ++p) {
          h0[p] = d0[p] / pi[0] + g[0][p];
          h1[p] = d1[p] / pi[1] + g[1][p];
          const double dm = post[0] * h0[p] + post[1] * h1[p];
          out.grad[p] += dm;
          g[0][p] = h0[p] - dm;
          g[1][p] = h1[p] - dm;
        }
      }
      belief = post;
    }
  }
  return out;
}

LikelihoodResult sum_terms(const LevelPolicySet& policies,
                           const GradientTables* grads,
                           std::span<const Demonstration> demos, int workers) {
  require_levels(policies);
  std::vector<LikelihoodResult> terms(demos.size());
  detail::parallel_for(static_cast<int>(demos.size()), workers,
                       [&](int begin, int end) {
                         for (int i = begin; i < end; ++i) {
                           terms[i] = demo_term(policies, grads, demos[i]);
                         }
                       });
  LikelihoodResult total;
  total.grad.assign(grads ? grads->num_params() : 0, 0.0);
  for (const auto& t : terms) {
    total.loglik += t.loglik;
    for (std::size_t p = 0; p < total.grad.size(); ++p) {
      total.grad[p] += t.grad[p];
    }
  }
  if (!grads) total.grad.clear();
  return total;
}

}  // namespace

LevelBelief bayes_update(const LevelBelief& prior,
                         const LevelBelief& likelihood) {
  const double z = prior[0] * likelihood[0] + prior[1] * likelihood[1];
  if (!(z > 0.0)) {
    throw DomainError("bayes_update: zero normalizer");
  }
  return {prior[0] * likelihood[0] / z, prior[1] * likelihood[1] / z};
}

LevelBelief level_posterior_update(const LevelBelief& prior,
                                   const LevelPolicySet& policies, StateId s,
                                   ActionId a, Agent agent) {
  require_levels(policies);
  return bayes_update(prior, level_likelihood(policies, s, a, agent));
}

double expected_action_loglik(const LevelPolicySet& policies,
                              const LevelBelief& belief_1,
                              const LevelBelief& belief_2, StateId s,
                              ActionId a1, ActionId a2) {
  require_levels(policies);
  const LevelBelief p1 = level_likelihood(policies, s, a1, Agent::kFirst);
  const LevelBelief p2 = level_likelihood(policies, s, a2, Agent::kSecond);
  return std::log(p1[0] * belief_1[0] + p1[1] * belief_1[1]) +
         std::log(p2[0] * belief_2[0] + p2[1] * belief_2[1]);
}

BeliefGradient posterior_gradient_step(const BeliefGradient& prev,
                                       const LevelBelief& prior,
                                       const LevelPolicySet& policies,
                                       const GradientTables& grads, StateId s,
                                       ActionId a, Agent agent) {
  require_levels(policies);
  const std::size_t np = grads.num_params();
  if (prev[0].size() != np || prev[1].size() != np) {
    throw ContractError("posterior_gradient_step: gradient size mismatch");
  }
  const LevelBelief pi = level_likelihood(policies, s, a, agent);
  const LevelBelief post = bayes_update(prior, pi);
  const auto d0 = grads.d_policy(agent, kLevels[0], s, a);
  const auto d1 = grads.d_policy(agent, kLevels[1], s, a);
  BeliefGradient out = {std::vector<double>(np), std::vector<double>(np)};
  for (std::size_t p = 0; p < np; ++p) {
    const double h0 = d0[p] / pi[0] + prev[0][p];
    const double h1 = d1[p] / pi[1] + prev[1][p];
    const double mean = post[0] * h0 + post[1] * h1;
    out[0][p] = h0 - mean;
    out[1][p] = h1 - mean;
  }
  return out;
}

std::vector<std::array<LevelBelief, 2>> replay_beliefs(
    const LevelPolicySet& policies, const Demonstration& demo) {
  require_levels(policies);
  std::vector<std::array<LevelBelief, 2>> out;
  out.reserve(demo.size());
  std::array<LevelBelief, 2> belief = {uniform_level_prior(),
                                       uniform_level_prior()};
  for (const DemoStep& step : demo.steps) {
    for (Agent agent : kAgents) {
      belief[index(agent)] =
          level_posterior_update(belief[index(agent)], policies, step.state,
                                 action_of(step, agent), agent);
    }
    out.push_back(belief);
  }
  return out;
}

double demo_loglik(const LevelPolicySet& policies,
                   std::span<const Demonstration> demos, int workers) {
  return sum_terms(policies, nullptr, demos, workers).loglik;
}

LikelihoodResult demo_loglik_and_grad(const LevelPolicySet& policies,
                                      const GradientTables& grads,
                                      std::span<const Demonstration> demos,
                                      int workers) {
  if (grads.k_max() < kLevels[1]) {
    throw ContractError("demo_loglik_and_grad: gradients up to level 2 needed");
  }
  return sum_terms(policies, &grads, demos, workers);
}

std::array<int, 2> infer_levels(const LevelPolicySet& policies,
                                const Demonstration& demo) {
  if (demo.steps.empty()) {
    throw ContractError("infer_levels: empty demonstration");
  }
  const auto beliefs = replay_beliefs(policies, demo);
  std::array<int, 2> out{};
  for (Agent agent : kAgents) {
    const LevelBelief& b = beliefs.back()[index(agent)];
    out[index(agent)] = b[1] > b[0] ? kLevels[1] : kLevels[0];
  }
  return out;
}

LearnState initial_learn_state(const GameSpec& spec, const CptParams& base_cpt,
                               double collision_reward, std::uint64_t seed) {
  LearnState st;
  st.cpt = base_cpt;
  st.cpt.gamma = {0.8, 0.8};
  st.rp.collision_reward = collision_reward;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(1.2, 2.2);
  for (Agent agent : kAgents) {
    auto& w = st.rp.omega[index(agent)];
    w.resize(spec.feature_dim());
    for (double& x : w) x = dist(rng);
  }
  return st;
}

void project_params(const ParamLayout& layout, const LearnOptions& opts,
                    std::span<double> theta) {
  if (theta.size() != static_cast<std::size_t>(layout.size())) {
    throw ContractError("project_params: size mismatch");
  }
  for (int i = 0; i < layout.num_gamma(); ++i) {
    theta[i] = std::clamp(theta[i], opts.gamma_min, opts.gamma_max);
  }
  for (std::size_t i = layout.num_gamma(); i < theta.size(); ++i) {
    theta[i] = std::clamp(theta[i], opts.omega_min, opts.omega_max);
  }
}

LearnTrace learn(const GameSpec& spec, std::span<const Demonstration> demos,
                 const LearnState& init, const LearnOptions& opts,
                 const EpochHook& hook) {
  if (demos.empty()) throw ContractError("learn: no demonstrations");
  if (opts.epochs < 0 || !(opts.eta >= 0.0)) {
    throw ParameterError("learn: epochs and eta must be non-negative");
  }
  for (const auto& d : demos) validate_demo(spec, d);

  const ParamLayout layout = ParamLayout::for_game(spec, opts.shared_gamma);
  LearnTrace trace;
  LearnState state = init;
  std::vector<double> theta = pack_params(layout, state.cpt, state.rp);
  std::optional<LevelPolicySet> prev;
  int calm_epochs = 0;
  const double scale =
      opts.mean_gradient ? 1.0 / static_cast<double>(demos.size()) : 1.0;

  for (int epoch = 0; epoch <= opts.epochs; ++epoch) {
    LevelPolicySet policies;
    LikelihoodResult lr;
    try {
      policies = solve_all(spec, state.rp, state.cpt, kLevels[1], opts.solver,
                           prev ? &*prev : nullptr);
      const GradientTables grads =
          solve_gradients(spec, state.rp, state.cpt, policies, layout,
                          opts.gradient);
      lr = demo_loglik_and_grad(policies, grads, demos, opts.workers);
    } catch (const Error& e) {
      trace.diverged = true;
      trace.message = std::string("epoch ") + std::to_string(epoch) + ": " +
                      e.what();
      break;
    }
    if (!std::isfinite(lr.loglik) || !all_finite(lr.grad)) {
      trace.diverged = true;
      trace.message =
          "non-finite likelihood or gradient at epoch " + std::to_string(epoch);
      break;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loglik = lr.loglik;
    double sq = 0.0;
    for (double g : lr.grad) sq += g * g;
    rec.grad_norm = std::sqrt(sq);
    rec.theta = theta;
    if (hook) hook(rec, policies);
    log_message(LogLevel::kInfo, "learn: epoch " + std::to_string(epoch) +
                                     " loglik " + std::to_string(lr.loglik));

    if (!trace.epochs.empty() &&
        std::abs(lr.loglik - trace.epochs.back().loglik) < opts.converge_tol) {
      ++calm_epochs;
    } else {
      calm_epochs = 0;
    }
    trace.epochs.push_back(std::move(rec));
    trace.final_state = state;
    trace.final_policies = policies;
    if (opts.converge_patience > 0 && calm_epochs >= opts.converge_patience) {
      trace.converged = true;
      break;
    }
    if (epoch == opts.epochs) break;

    for (std::size_t p = 0; p < theta.size(); ++p) {
      theta[p] += opts.eta * scale * lr.grad[p];
    }
    project_params(layout, opts, theta);
    unpack_params(layout, theta, state.cpt, state.rp);
    prev = std::move(policies);
  }
  if (trace.epochs.empty()) {
    trace.final_state = init;
  }
  return trace;
}

}  // namespace brsmg
