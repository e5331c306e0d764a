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

// Text formats for solver tables, demonstrations, learned parameters and
// rollout batches. CSV files carry a header row; numbers are written with
// 17 significant digits so that files round-trip exactly.

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "brsmg/demonstration.hpp"
#include "brsmg/forward_solver.hpp"
#include "brsmg/game_model.hpp"
#include "brsmg/gridworld_env.hpp"

namespace brsmg {

// agent,level,state,action,q,policy for levels >= 1 (agents and levels are
// 1-based).
void write_policy_csv(std::ostream& os, const LevelPolicySet& policies);
// agent,level,state,value
void write_value_csv(std::ostream& os, const LevelPolicySet& policies);
// agent,level,sweep,residual
void write_convergence_csv(std::ostream& os, const LevelPolicySet& policies);

// demo_id,t,state,a1,a2,k1,k2,seed. The last three columns are empty for
// demonstrations without provenance.
void write_demos_csv(std::ostream& os, std::span<const Demonstration> demos);
// Rows of one demo must be contiguous and ordered by t. Throws ParameterError
// on malformed input.
std::vector<Demonstration> read_demos_csv(std::istream& is);

// {"gamma": g or [g1, g2], "omega_1": [...], "omega_2": [...]}. A single
// gamma is written when both agents share it.
std::string params_to_json(const CptParams& cpt, const RewardParams& rp);
// Fills gamma and omega; everything else in `cpt` and `rp` is kept.
void params_from_json(const std::string& text, CptParams& cpt,
                      RewardParams& rp);

// scenario,risk_mode,seed,level_1,level_2,outcome,steps
struct RolloutRow {
  std::string scenario;
  std::string risk_mode;
  grid::EpisodeRecord record;
};
void write_rollouts_csv(std::ostream& os, std::span<const RolloutRow> rows);

}  // namespace brsmg
