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

// Two-agent room-exit navigation game.
//
// Each agent lives on the same W x H grid and must leave through its own door
// by stepping outward from the door cell. Both agents move simultaneously.
// Moves off the grid or into an obstacle leave the agent in place. Ending in
// the same cell, or swapping cells, is a collision: both agents collect the
// fixed collision reward and the game enters an absorbing crashed state.
// Otherwise agent i collects the navigation reward of its post-move cell (of
// its door cell once it has exited).
//
// Joint state index: pos1 * (C + 1) + pos2, where C = W * H and position C
// means "exited"; the crashed state is (C + 1)^2.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "brsmg/demonstration.hpp"
#include "brsmg/forward_solver.hpp"
#include "brsmg/game_model.hpp"

namespace brsmg::grid {

enum Move : ActionId { kLeft = 0, kRight = 1, kUp = 2, kDown = 3, kStay = 4 };
inline constexpr int kNumMoves = 5;

std::string move_name(ActionId a);

struct Cell {
  int x = 0;
  int y = 0;  // rows grow downward; kUp decreases y

  friend bool operator==(const Cell&, const Cell&) = default;
};

struct GridConfig {
  int width = 5;
  int height = 5;
  // Row-major navigation reward per agent, entries in [1.0, 2.5].
  std::array<std::vector<double>, 2> nav_reward;
  std::array<Cell, 2> door;
  // Move that leaves the grid from each door.
  std::array<ActionId, 2> exit_move = {kRight, kLeft};
  std::vector<Cell> obstacles;
  // Cells each agent may start in; empty means any free non-door cell.
  std::array<std::vector<Cell>, 2> start_region;
  int max_episode_steps = 40;
  double discount = 0.1;
  double collision_reward = 1.0;
  std::uint64_t seed = 0;

  // Throws ParameterError when the configuration is inconsistent.
  void validate() const;

  static GridConfig default_config();
};

enum class Outcome { kSuccess, kCollision, kDeadlock };
std::string outcome_name(Outcome outcome);

class GridWorld {
 public:
  explicit GridWorld(GridConfig config);

  const GridConfig& config() const { return config_; }
  const GameSpec& spec() const { return spec_; }
  const RewardParams& rewards() const { return rewards_; }

  int num_cells() const { return config_.width * config_.height; }
  int exited() const { return num_cells(); }
  int cell_index(Cell c) const { return c.y * config_.width + c.x; }
  Cell cell_at(int pos) const {
    return {pos % config_.width, pos / config_.width};
  }
  bool is_obstacle(int pos) const { return obstacle_[pos] != 0; }

  StateId encode(int pos1, int pos2) const {
    return pos1 * (num_cells() + 1) + pos2;
  }
  // Positions of both agents; exited() for an agent that has left.
  std::pair<int, int> decode(StateId s) const;
  StateId crashed_state() const {
    return (num_cells() + 1) * (num_cells() + 1);
  }
  StateId both_exited_state() const { return encode(exited(), exited()); }
  bool both_exited(StateId s) const { return s == both_exited_state(); }
  bool crashed(StateId s) const { return s == crashed_state(); }
  // False for tabulated states no episode can visit: an agent inside an
  // obstacle, or both agents on one cell.
  bool feasible(StateId s) const;

  // Cells an agent may start in: its start region if one is configured,
  // otherwise every cell that is neither an obstacle nor a door.
  std::vector<int> start_cells(Agent agent) const;

  // Same game with different reward weights (rewards are not revalidated).
  RewardParams reward_params(std::vector<double> omega1,
                             std::vector<double> omega2) const;

 private:
  int step_agent(int pos, ActionId a, Agent agent) const;
  StateId transition(StateId s, ActionId a1, ActionId a2) const;
  bool collides(StateId s, ActionId a1, ActionId a2) const;

  GridConfig config_;
  std::vector<unsigned char> obstacle_;
  std::array<int, 2> door_pos_;
  GameSpec spec_;
  RewardParams rewards_;
};

// Game and ground-truth reward parameters for a configuration.
struct BuiltGame {
  GameSpec spec;
  RewardParams rewards;
};
BuiltGame build_game(const GridConfig& config);

struct RolloutResult {
  Demonstration trajectory;
  Outcome outcome = Outcome::kDeadlock;
  int steps = 0;
};

// Simulates both agents sampling their quantal policies simultaneously.
// Levels must be in [1, k_max]. The trajectory ends on collision, when both
// agents have exited, or after max_episode_steps.
RolloutResult rollout(const GridWorld& world, const LevelPolicySet& policies,
                      std::array<int, 2> levels, StateId start,
                      std::uint64_t seed);

// Random non-overlapping start state drawn from the agents' start cells.
StateId sample_start(const GridWorld& world, std::uint64_t seed);

struct EpisodeRecord {
  std::uint64_t seed;
  std::array<int, 2> levels;
  Outcome outcome;
  int steps;
};

// Episodes with seeds derived from `seed`; episode e uses start
// sample_start(world, derive_seed(seed, e)).
std::vector<EpisodeRecord> simulate_batch(const GridWorld& world,
                                          const LevelPolicySet& policies,
                                          std::array<int, 2> levels,
                                          int episodes, std::uint64_t seed);

// M demonstrations with levels drawn uniformly from {1, 2} per agent.
std::vector<Demonstration> gen_demos(const GridWorld& world,
                                     const LevelPolicySet& policies, int m,
                                     std::uint64_t seed);

// Deterministic sub-seed derivation (splitmix64 of seed and stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace brsmg::grid
