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

// Inverse learning of rewards and the probability-weighting exponent from
// joint demonstrations.
//
// Each demonstrating agent is assumed to play one of the quantal level-k
// policies with k in {1, 2}; which one is unknown and tracked by a Bayesian
// belief that starts uniform and is updated after every observed action.
// The likelihood of step t mixes the level policies under the belief held
// before the step:
//
//   log L_t = log sum_k pi^{1,k}(s_t, a1_t) P1_{t-1}(k)
//           + log sum_k pi^{2,k}(s_t, a2_t) P2_{t-1}(k)
//
// Gradients combine the policy gradients from the value-gradient solver with
// the gradient of the belief recursion.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "brsmg/demonstration.hpp"
#include "brsmg/forward_solver.hpp"
#include "brsmg/game_model.hpp"
#include "brsmg/gradient_solver.hpp"

namespace brsmg {

// Hypothesis levels; level 0 only anchors the hierarchy.
inline constexpr std::array<int, 2> kLevels = {1, 2};

// Belief over kLevels.
using LevelBelief = std::array<double, 2>;
// d log P(k) over the parameter layout: [k][p].
using BeliefGradient = std::array<std::vector<double>, 2>;

inline LevelBelief uniform_level_prior() { return {0.5, 0.5}; }

// posterior(k) proportional to likelihood(k) * prior(k).
LevelBelief bayes_update(const LevelBelief& prior,
                         const LevelBelief& likelihood);
LevelBelief level_posterior_update(const LevelBelief& prior,
                                   const LevelPolicySet& policies, StateId s,
                                   ActionId a, Agent agent);

// Log-likelihood of one joint action given both agents' current beliefs.
double expected_action_loglik(const LevelPolicySet& policies,
                              const LevelBelief& belief_1,
                              const LevelBelief& belief_2, StateId s,
                              ActionId a1, ActionId a2);

// Gradient of log P(k | xi_t) from the gradient at t-1. `prior` is the belief
// before the step; the uniform initial belief has zero gradient.
BeliefGradient posterior_gradient_step(const BeliefGradient& prev,
                                       const LevelBelief& prior,
                                       const LevelPolicySet& policies,
                                       const GradientTables& grads, StateId s,
                                       ActionId a, Agent agent);

// Beliefs after each step of a demo: result[t][agent].
std::vector<std::array<LevelBelief, 2>> replay_beliefs(
    const LevelPolicySet& policies, const Demonstration& demo);

struct LikelihoodResult {
  double loglik = 0.0;
  std::vector<double> grad;  // empty when not requested
};

// Total log-likelihood of the demos. Terms are computed per demo in parallel
// and summed in demo order.
double demo_loglik(const LevelPolicySet& policies,
                   std::span<const Demonstration> demos, int workers = 1);
LikelihoodResult demo_loglik_and_grad(const LevelPolicySet& policies,
                                      const GradientTables& grads,
                                      std::span<const Demonstration> demos,
                                      int workers = 1);

// Argmax of the final belief per agent; ties go to level 1.
std::array<int, 2> infer_levels(const LevelPolicySet& policies,
                                const Demonstration& demo);

struct LearnOptions {
  double eta = 0.0015;
  int epochs = 100;
  bool shared_gamma = true;
  // Projection box applied after every step.
  double gamma_min = 0.05;
  double gamma_max = 1.0;
  double omega_min = 1.0;
  double omega_max = 2.5;
  // Stop early once |delta loglik| < converge_tol for this many epochs in a
  // row. Zero disables early stopping.
  double converge_tol = 1e-4;
  int converge_patience = 5;
  // The gradient is divided by the number of demos before the step.
  bool mean_gradient = true;
  SolverOptions solver;
  GradientOptions gradient;
  int workers = 1;
};

struct LearnState {
  CptParams cpt;
  RewardParams rp;
};

// omega entries uniform in [1.2, 2.2], gamma 0.8; alpha, beta and the
// collision reward are copied from `base`.
LearnState initial_learn_state(const GameSpec& spec, const CptParams& base_cpt,
                               double collision_reward, std::uint64_t seed);

// Clips the learnable entries into the projection box.
void project_params(const ParamLayout& layout, const LearnOptions& opts,
                    std::span<double> theta);

struct EpochRecord {
  int epoch = 0;
  double loglik = 0.0;
  double grad_norm = 0.0;
  std::vector<double> theta;  // parameters the epoch was evaluated at
};

struct LearnTrace {
  std::vector<EpochRecord> epochs;
  LearnState final_state;
  LevelPolicySet final_policies;
  bool converged = false;
  bool diverged = false;
  std::string message;
};

// Called after each epoch's evaluation with the policies at that epoch.
using EpochHook =
    std::function<void(const EpochRecord&, const LevelPolicySet&)>;

// Full-batch projected gradient ascent. Record e holds the parameters before
// the e-th step, so a run of E epochs yields E + 1 records. A non-finite
// likelihood or gradient stops the run with diverged = true and the last
// finite state.
LearnTrace learn(const GameSpec& spec, std::span<const Demonstration> demos,
                 const LearnState& init, const LearnOptions& opts,
                 const EpochHook& hook = {});

}  // namespace brsmg
