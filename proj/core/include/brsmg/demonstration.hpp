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

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "brsmg/game_model.hpp"

namespace brsmg {

struct DemoStep {
  StateId state;
  ActionId a1;
  ActionId a2;

  friend bool operator==(const DemoStep&, const DemoStep&) = default;
};

// A joint trajectory. Synthetic demonstrations also carry their provenance.
struct Demonstration {
  int id = 0;
  std::vector<DemoStep> steps;
  std::optional<std::array<int, 2>> true_levels;
  std::optional<std::uint64_t> seed;

  std::size_t size() const { return steps.size(); }
};

// Throws ContractError if the demo is empty, has out-of-range indices, or
// consecutive states are inconsistent with the game's transition.
void validate_demo(const GameSpec& spec, const Demonstration& demo);

}  // namespace brsmg
