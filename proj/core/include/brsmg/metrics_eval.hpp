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

// Evaluation statistics: parameter and policy errors, correlations between
// learned and true rewards, rollout success rates, level identification.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brsmg/forward_solver.hpp"
#include "brsmg/gradient_solver.hpp"
#include "brsmg/gridworld_env.hpp"

namespace brsmg {

// Mean of |learned_i - truth_i| / |truth_i|. Entries with zero truth are
// skipped with a warning; throws DomainError if nothing is left.
double ppe(std::span<const double> learned, std::span<const double> truth);

struct PpeBlocks {
  double gamma = 0.0;
  double omega_1 = 0.0;
  double omega_2 = 0.0;
  double aggregate = 0.0;  // mean over every learnable entry
};
PpeBlocks ppe_blocks(const ParamLayout& layout,
                     std::span<const double> learned,
                     std::span<const double> truth);

// Mean absolute difference of two equally shaped tables.
double policy_loss(std::span<const double> learned,
                   std::span<const double> truth);

// Mean |pi_learned - pi_truth| over levels 1..2, the states with
// mask[s] true (all states if the mask is empty), and the agent's actions.
double policy_loss(const LevelPolicySet& learned, const LevelPolicySet& truth,
                   Agent agent, const std::vector<bool>& state_mask = {});
// Both agents pooled.
double policy_loss(const LevelPolicySet& learned, const LevelPolicySet& truth,
                   const std::vector<bool>& state_mask = {});

// States an episode can visit.
std::vector<bool> feasible_state_mask(const grid::GridWorld& world);

// Average ranks (1-based) with ties sharing the mean rank.
std::vector<double> average_ranks(std::span<const double> x);
// Throw DomainError for fewer than two points or a constant input, and
// ContractError on a size mismatch.
double pcc(std::span<const double> x, std::span<const double> y);
double scc(std::span<const double> x, std::span<const double> y);

double rate_of_success(std::span<const grid::Outcome> outcomes);

std::array<double, 2> id_accuracy(std::span<const std::array<int, 2>> inferred,
                                  std::span<const std::array<int, 2>> truth);

struct Correlations {
  std::array<double, 2> scc = {0.0, 0.0};
  std::array<double, 2> pcc = {0.0, 0.0};
  double scc_average = 0.0;  // mean of the per-agent values
  double pcc_average = 0.0;
  double scc_joint = 0.0;    // over the concatenated weights
  double pcc_joint = 0.0;
};
Correlations reward_correlations(const RewardParams& learned,
                                 const RewardParams& truth);

struct EvalReport {
  std::optional<PpeBlocks> ppe;
  std::optional<double> pl;
  std::map<std::string, double> rs;  // scenario label -> rate
  std::optional<std::array<double, 2>> id_accuracy;
  std::optional<Correlations> correlations;
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, int> counts;
};

std::string report_to_json(const EvalReport& report);
// metric,value rows.
std::string report_to_csv(const EvalReport& report);

}  // namespace brsmg
