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

#include "brsmg/gridworld_env.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "sampling.hpp"

namespace brsmg {

void validate_demo(const GameSpec& spec, const Demonstration& demo) {
  if (demo.steps.empty()) {
    throw ContractError("demonstration " + std::to_string(demo.id) +
                        " is empty");
  }
  for (std::size_t t = 0; t < demo.steps.size(); ++t) {
    const DemoStep& st = demo.steps[t];
    spec.check_state(st.state);
    spec.check_action(Agent::kFirst, st.a1);
    spec.check_action(Agent::kSecond, st.a2);
    if (t + 1 < demo.steps.size() &&
        spec.next(st.state, st.a1, st.a2) != demo.steps[t + 1].state) {
      std::ostringstream os;
      os << "demonstration " << demo.id << ": step " << t + 1
         << " state is inconsistent with the transition function";
      throw ContractError(os.str());
    }
  }
}

namespace grid {
namespace {

constexpr int kDx[kNumMoves] = {-1, 1, 0, 0, 0};
constexpr int kDy[kNumMoves] = {0, 0, -1, 1, 0};

bool inside(const GridConfig& c, int x, int y) {
  return x >= 0 && y >= 0 && x < c.width && y < c.height;
}

GameSpec make_spec(const GridConfig& config,
                   const std::function<StateId(StateId, ActionId, ActionId)>&
                       transition,
                   const std::function<bool(StateId, ActionId, ActionId)>&
                       collides,
                   const std::function<std::pair<int, int>(StateId)>& decode,
                   const std::array<int, 2>& door_pos, StateId crashed,
                   StateId both_exited) {
  const int cells = config.width * config.height;
  auto features = [&](StateId s, ActionId own, ActionId opp, Agent agent,
                      std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    const auto [a1, a2] = joint_action(agent, own, opp);
    if (collides(s, a1, a2)) return;
    const StateId sn = transition(s, a1, a2);
    const auto [p1, p2] = decode(sn);
    int pos = agent == Agent::kFirst ? p1 : p2;
    if (pos == cells) pos = door_pos[index(agent)];
    out[pos] = 1.0;
  };
  return GameSpec((cells + 1) * (cells + 1) + 1, {kNumMoves, kNumMoves}, cells,
                  config.discount, transition, features, collides,
                  {both_exited, crashed});
}

}  // namespace

std::string move_name(ActionId a) {
  static const char* names[kNumMoves] = {"left", "right", "up", "down", "stay"};
  if (a < 0 || a >= kNumMoves) return "?";
  return names[a];
}

std::string outcome_name(Outcome outcome) {
  switch (outcome) {
    case Outcome::kSuccess:
      return "success";
    case Outcome::kCollision:
      return "collision";
    case Outcome::kDeadlock:
      return "deadlock";
  }
  return "?";
}

void GridConfig::validate() const {
  if (width < 2 || height < 2) {
    throw ParameterError("GridConfig: grid must be at least 2x2");
  }
  const std::size_t cells = static_cast<std::size_t>(width) * height;
  for (int i = 0; i < 2; ++i) {
    if (nav_reward[i].size() != cells) {
      throw ParameterError("GridConfig: nav_reward_" + std::to_string(i + 1) +
                           " must have width*height entries");
    }
    for (double r : nav_reward[i]) {
      if (!(r >= 1.0 && r <= 2.5)) {
        throw ParameterError("GridConfig: navigation rewards must lie in "
                             "[1.0, 2.5]");
      }
    }
    if (!inside(*this, door[i].x, door[i].y)) {
      throw ParameterError("GridConfig: door outside the grid");
    }
    if (exit_move[i] < 0 || exit_move[i] >= kStay ||
        inside(*this, door[i].x + kDx[exit_move[i]],
               door[i].y + kDy[exit_move[i]])) {
      throw ParameterError(
          "GridConfig: exit move must leave the grid from the door cell");
    }
    for (const Cell& o : obstacles) {
      if (o == door[i]) {
        throw ParameterError("GridConfig: obstacle placed on a door");
      }
    }
  }
  if (door[0] == door[1]) throw ParameterError("GridConfig: doors must differ");
  for (int i = 0; i < 2; ++i) {
    for (const Cell& c : start_region[i]) {
      const bool blocked =
          std::find(obstacles.begin(), obstacles.end(), c) != obstacles.end();
      if (!inside(*this, c.x, c.y) || blocked || c == door[0] ||
          c == door[1]) {
        throw ParameterError(
            "GridConfig: start cells must be free, non-door grid cells");
      }
    }
  }
  for (const Cell& o : obstacles) {
    if (!inside(*this, o.x, o.y)) {
      throw ParameterError("GridConfig: obstacle outside the grid");
    }
  }
  if (max_episode_steps < 1) {
    throw ParameterError("GridConfig: max_episode_steps must be positive");
  }
  if (!(collision_reward >= 1.0)) {
    throw ParameterError("GridConfig: collision reward must be >= 1");
  }
}

GridConfig GridConfig::default_config() {
  GridConfig c;
  // Agent 1 leaves through the right wall, agent 2 through the left wall, and
  // each starts in the column opposite its door, so every episode is a
  // crossing. The room is open: an obstacle cell's weight is never realized
  // by any reachable state and so could never be learned.
  //
  //   y=0   1  .  .  .  2
  //   y=1   1  .  .  .  2
  //   y=2   D2 .  .  .  D1
  //   y=3   1  .  .  .  2
  //   y=4   1  .  .  .  2
  c.door = {Cell{4, 2}, Cell{0, 2}};
  c.exit_move = {kRight, kLeft};
  for (int y = 0; y < c.height; ++y) {
    if (y == c.door[0].y) continue;
    c.start_region[0].push_back(Cell{0, y});
    c.start_region[1].push_back(Cell{c.width - 1, y});
  }
  // Navigation rewards fall off linearly with walking distance from the
  // agent's own door, from 2.5 at the door to 1.5 in the far corners.
  c.nav_reward[0] = {
      1.50, 1.67, 1.83, 2.00, 2.17,  //
      1.67, 1.83, 2.00, 2.17, 2.33,  //
      1.83, 2.00, 2.17, 2.33, 2.50,  //
      1.67, 1.83, 2.00, 2.17, 2.33,  //
      1.50, 1.67, 1.83, 2.00, 2.17,  //
  };
  c.nav_reward[1] = {
      2.17, 2.00, 1.83, 1.67, 1.50,  //
      2.33, 2.17, 2.00, 1.83, 1.67,  //
      2.50, 2.33, 2.17, 2.00, 1.83,  //
      2.33, 2.17, 2.00, 1.83, 1.67,  //
      2.17, 2.00, 1.83, 1.67, 1.50,  //
  };
  // A short horizon keeps the crash penalty local, which is what lets a
  // level-1 agent gamble on the other side yielding.
  c.discount = 0.1;
  return c;
}

GridWorld::GridWorld(GridConfig config)
    : config_((config.validate(), std::move(config))),
      obstacle_(static_cast<std::size_t>(config_.width) * config_.height, 0),
      door_pos_{cell_index(config_.door[0]), cell_index(config_.door[1])},
      spec_([this] {
        for (const Cell& o : config_.obstacles) obstacle_[cell_index(o)] = 1;
        return make_spec(
            config_,
            [this](StateId s, ActionId a1, ActionId a2) {
              return transition(s, a1, a2);
            },
            [this](StateId s, ActionId a1, ActionId a2) {
              return collides(s, a1, a2);
            },
            [this](StateId s) { return decode(s); }, door_pos_,
            crashed_state(), both_exited_state());
      }()) {
  rewards_.omega = config_.nav_reward;
  rewards_.collision_reward = config_.collision_reward;
  validate_rewards(spec_, rewards_);
}

std::pair<int, int> GridWorld::decode(StateId s) const {
  if (s == crashed_state()) {
    throw IndexError("decode: crashed state has no positions");
  }
  return {s / (num_cells() + 1), s % (num_cells() + 1)};
}

int GridWorld::step_agent(int pos, ActionId a, Agent agent) const {
  if (pos == exited()) return pos;
  if (pos == door_pos_[index(agent)] && a == config_.exit_move[index(agent)]) {
    return exited();
  }
  const Cell c = cell_at(pos);
  const int nx = c.x + kDx[a];
  const int ny = c.y + kDy[a];
  if (!inside(config_, nx, ny)) return pos;
  const int target = cell_index({nx, ny});
  return is_obstacle(target) ? pos : target;
}

bool GridWorld::collides(StateId s, ActionId a1, ActionId a2) const {
  if (s == crashed_state()) return true;
  const auto [p1, p2] = decode(s);
  const int n1 = step_agent(p1, a1, Agent::kFirst);
  const int n2 = step_agent(p2, a2, Agent::kSecond);
  if (n1 == exited() || n2 == exited()) return false;
  if (n1 == n2) return true;
  return n1 == p2 && n2 == p1 && p1 != p2;
}

StateId GridWorld::transition(StateId s, ActionId a1, ActionId a2) const {
  if (s == crashed_state()) return s;
  if (collides(s, a1, a2)) return crashed_state();
  const auto [p1, p2] = decode(s);
  return encode(step_agent(p1, a1, Agent::kFirst),
                step_agent(p2, a2, Agent::kSecond));
}

bool GridWorld::feasible(StateId s) const {
  spec_.check_state(s);
  if (crashed(s)) return true;
  const auto [p1, p2] = decode(s);
  if (p1 != exited() && is_obstacle(p1)) return false;
  if (p2 != exited() && is_obstacle(p2)) return false;
  return p1 == exited() || p1 != p2;
}

std::vector<int> GridWorld::start_cells(Agent agent) const {
  std::vector<int> cells;
  const auto& region = config_.start_region[index(agent)];
  if (!region.empty()) {
    for (const Cell& c : region) cells.push_back(cell_index(c));
    return cells;
  }
  for (int pos = 0; pos < num_cells(); ++pos) {
    if (is_obstacle(pos) || pos == door_pos_[0] || pos == door_pos_[1]) {
      continue;
    }
    cells.push_back(pos);
  }
  return cells;
}

RewardParams GridWorld::reward_params(std::vector<double> omega1,
                                      std::vector<double> omega2) const {
  RewardParams rp;
  rp.omega = {std::move(omega1), std::move(omega2)};
  rp.collision_reward = config_.collision_reward;
  return rp;
}

BuiltGame build_game(const GridConfig& config) {
  GridWorld world(config);
  return {world.spec(), world.rewards()};
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return detail::splitmix64(seed ^
                            detail::splitmix64(stream + 0x632be59bd9b4e019ULL));
}

StateId sample_start(const GridWorld& world, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<int> first = world.start_cells(Agent::kFirst);
  const int p1 =
      first[detail::uniform_index(rng, static_cast<int>(first.size()))];
  std::vector<int> second = world.start_cells(Agent::kSecond);
  std::erase(second, p1);
  if (second.empty()) {
    throw ParameterError("sample_start: start regions leave no distinct pair");
  }
  const int p2 =
      second[detail::uniform_index(rng, static_cast<int>(second.size()))];
  return world.encode(p1, p2);
}

RolloutResult rollout(const GridWorld& world, const LevelPolicySet& policies,
                      std::array<int, 2> levels, StateId start,
                      std::uint64_t seed) {
  const GameSpec& spec = world.spec();
  spec.check_state(start);
  for (int k : levels) {
    if (k < 1 || k > policies.k_max()) {
      throw ParameterError("rollout: level outside [1, k_max]");
    }
  }
  std::mt19937_64 rng(seed);
  RolloutResult result;
  result.trajectory.true_levels = levels;
  result.trajectory.seed = seed;
  StateId s = start;
  const int cap = world.config().max_episode_steps;
  for (int t = 0; t < cap; ++t) {
    if (world.both_exited(s)) {
      result.outcome = Outcome::kSuccess;
      result.steps = t;
      return result;
    }
    const auto [p1, p2] = world.decode(s);
    const ActionId a1 =
        p1 == world.exited()
            ? kStay
            : detail::sample_categorical(
                  rng, policies.policy_row(Agent::kFirst, levels[0], s));
    const ActionId a2 =
        p2 == world.exited()
            ? kStay
            : detail::sample_categorical(
                  rng, policies.policy_row(Agent::kSecond, levels[1], s));
    result.trajectory.steps.push_back({s, a1, a2});
    if (spec.collision(s, a1, a2)) {
      result.outcome = Outcome::kCollision;
      result.steps = t + 1;
      return result;
    }
    s = spec.next(s, a1, a2);
  }
  result.steps = cap;
  result.outcome =
      world.both_exited(s) ? Outcome::kSuccess : Outcome::kDeadlock;
  return result;
}

std::vector<EpisodeRecord> simulate_batch(const GridWorld& world,
                                          const LevelPolicySet& policies,
                                          std::array<int, 2> levels,
                                          int episodes, std::uint64_t seed) {
  std::vector<EpisodeRecord> records;
  records.reserve(episodes);
  for (int e = 0; e < episodes; ++e) {
    const std::uint64_t ep_seed = derive_seed(seed, e);
    const StateId start = sample_start(world, ep_seed);
    const RolloutResult r =
        rollout(world, policies, levels, start, derive_seed(ep_seed, 1));
    records.push_back({ep_seed, levels, r.outcome, r.steps});
  }
  return records;
}

std::vector<Demonstration> gen_demos(const GridWorld& world,
                                     const LevelPolicySet& policies, int m,
                                     std::uint64_t seed) {
  if (policies.k_max() < 2) {
    throw ParameterError("gen_demos: policies must include levels 1 and 2");
  }
  std::vector<Demonstration> demos;
  demos.reserve(m);
  for (int i = 0; i < m; ++i) {
    const std::uint64_t demo_seed = derive_seed(seed, i);
    std::mt19937_64 rng(demo_seed);
    const std::array<int, 2> levels = {1 + detail::uniform_index(rng, 2),
                                       1 + detail::uniform_index(rng, 2)};
    const StateId start = sample_start(world, derive_seed(demo_seed, 1));
    RolloutResult r =
        rollout(world, policies, levels, start, derive_seed(demo_seed, 2));
    r.trajectory.id = i;
    r.trajectory.seed = demo_seed;
    demos.push_back(std::move(r.trajectory));
  }
  return demos;
}

}  // namespace grid
}  // namespace brsmg
