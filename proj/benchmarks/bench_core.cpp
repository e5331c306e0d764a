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

#include <benchmark/benchmark.h>

#include <random>

#include "brsmg/cpt_measure.hpp"
#include "brsmg/forward_solver.hpp"
#include "brsmg/gradient_solver.hpp"
#include "brsmg/gridworld_env.hpp"
#include "brsmg/inverse_learner.hpp"

namespace brsmg {
namespace {

const CptParams kCpt = CptParams::uniform(0.7, 0.5, 30.0);

const grid::GridWorld& world() {
  static const grid::GridWorld w(grid::GridConfig::default_config());
  return w;
}

const LevelPolicySet& truth() {
  static const LevelPolicySet p =
      solve_all(world().spec(), world().rewards(), kCpt, 2);
  return p;
}

void BM_CptValue(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<cpt::Outcome> out;
  double total = 0.0;
  for (int i = 0; i < 5; ++i) {
    out.push_back({1.0 + 2.0 * u(rng), u(rng), i});
    total += out.back().prob;
  }
  for (auto& o : out) o.prob /= total;
  for (auto _ : state) {
    const auto ws = cpt::WeightedOutcomeSet::from_unsorted(out);
    benchmark::DoNotOptimize(cpt::cpt_value(ws, 0.7, 0.5));
  }
}
BENCHMARK(BM_CptValue);

void BM_BellmanSweep(benchmark::State& state) {
  const GameSpec& spec = world().spec();
  const RewardTable rewards(spec, world().rewards());
  const auto opp = truth().opponent_model(Agent::kFirst, 2);
  const auto& v = truth().level(Agent::kFirst, 2).value;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cpt_bellman(spec, rewards, kCpt, v, opp,
                                         Agent::kFirst,
                                         static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_BellmanSweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_SolveAll(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        solve_all(world().spec(), world().rewards(), kCpt, 2));
  }
}
BENCHMARK(BM_SolveAll)->Unit(benchmark::kMillisecond);

void BM_SolveGradients(benchmark::State& state) {
  const auto layout = ParamLayout::for_game(world().spec(), true);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_gradients(
        world().spec(), world().rewards(), kCpt, truth(), layout));
  }
}
BENCHMARK(BM_SolveGradients)->Unit(benchmark::kMillisecond);

void BM_DemoLoglikAndGrad(benchmark::State& state) {
  const auto layout = ParamLayout::for_game(world().spec(), true);
  const auto grads = solve_gradients(world().spec(), world().rewards(), kCpt,
                                     truth(), layout);
  const auto demos = grid::gen_demos(world(), truth(), 100, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(demo_loglik_and_grad(truth(), grads, demos));
  }
}
BENCHMARK(BM_DemoLoglikAndGrad)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace brsmg

BENCHMARK_MAIN();
