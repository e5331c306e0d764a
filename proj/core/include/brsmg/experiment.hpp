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

// Experiment configuration and the commands behind the brsmg tool. Every
// command is a function of the resolved configuration and its input files;
// randomness comes from the master seed through named sub-seeds.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "brsmg/baseline_meirl.hpp"
#include "brsmg/forward_solver.hpp"
#include "brsmg/gradient_solver.hpp"
#include "brsmg/gridworld_env.hpp"
#include "brsmg/inverse_learner.hpp"
#include "brsmg/metrics_eval.hpp"

namespace brsmg {

enum class RiskMode { kCpt, kNeutral };
std::string risk_mode_name(RiskMode mode);
RiskMode parse_risk_mode(const std::string& name);

// Ground-truth behaviour parameters for a risk mode: the configured CPT
// parameters, or alpha = gamma = 1 with the same beta.
CptParams cpt_for_mode(const CptParams& cpt, RiskMode mode);

// "L1-L2" -> {1, 2}
std::array<int, 2> parse_scenario(const std::string& label);

struct ExperimentConfig {
  grid::GridConfig game = grid::GridConfig::default_config();
  // Ground-truth parameters of the demonstrators.
  CptParams cpt = CptParams::uniform(0.7, 0.5, 30.0);
  int k_max = 2;

  struct Solver {
    double tol = 1e-6;
    int max_sweeps = 10000;
    double kappa = kDefaultKappa;
  } solver;

  struct Learn {
    int demos = 100;
    double eta = 0.005;
    int epochs = 2500;
    bool shared_gamma = true;
    bool mean_gradient = true;
    double converge_tol = 1e-4;
    int converge_patience = 5;
  } learn;

  struct Baseline {
    double eta = 0.05;
    int epochs = 1000;
  } baseline;

  struct Simulate {
    int episodes = 100;
    std::vector<std::string> scenarios = {"L1-L1", "L2-L2", "L1-L2"};
  } simulate;

  struct GradCheck {
    int samples = 200;
    double h = 1e-5;
    double abs_tol = 1e-4;
    double rel_tol = 1e-3;
    double kappa = 1e8;
    double forward_tol = 1e-10;
  } gradcheck;

  struct Paths {
    std::string demos;   // input demos; generated from the seed if empty
    std::string params;  // learned parameters for eval
  } paths;

  // solve and simulate run both modes when unset; the demonstrators of
  // gen-demos, learn, baseline and eval default to cpt.
  std::optional<RiskMode> risk_mode;

  std::uint64_t seed = 1;
  int workers = 1;  // not part of the config hash
};

// Parses a JSON document. Unknown keys anywhere are an error
// (ParameterError naming the key path).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
// Canonical JSON of every result-affecting field.
std::string config_to_json(const ExperimentConfig& cfg);
// 16 hex digits of FNV-1a over config_to_json.
std::string config_hash(const ExperimentConfig& cfg);

// Named sub-seeds derived from the master seed.
enum class SeedStream : std::uint64_t {
  kDemos = 1,
  kInit = 2,
  kSimulate = 3,
  kGradCheck = 4,
  kHeldOut = 5,
};
std::uint64_t sub_seed(const ExperimentConfig& cfg, SeedStream stream);

struct GradCheckOptions {
  int samples = 200;
  double h = 1e-5;
  double abs_tol = 1e-4;
  double rel_tol = 1e-3;
  double kappa = kDefaultKappa;
  double forward_tol = 1e-10;
  int max_sweeps = 100000;
  int states_per_param = 10;
  bool shared_gamma = true;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct GradCheckSample {
  int param = 0;
  Agent agent = Agent::kFirst;
  int level = 1;
  StateId state = 0;
  double analytic = 0.0;
  double central = 0.0;
  double forward = 0.0;   // one-sided differences
  double backward = 0.0;
  bool kink = false;      // one-sided differences disagree; not scored
  bool pass = false;
};

struct GradCheckReport {
  std::vector<GradCheckSample> samples;
  int checked = 0;
  int failed = 0;
  int kinks = 0;
  int skipped_params = 0;  // perturbation left the valid parameter region
  double worst_ratio = 0.0;  // max |analytic - central| / tolerance
  bool passed(int min_checked) const {
    return checked >= min_checked && failed == 0;
  }
};

// Compares d V / d theta from solve_gradients against central differences
// of full forward solves at random (parameter, agent, level, state) samples
// until `samples` non-kink points have been scored. Samples where the two
// one-sided differences disagree by more than the tolerance straddle a
// non-differentiable point of the value (a rank or argmax switch) and are
// reported as kinks instead.
GradCheckReport gradient_check(const GameSpec& spec, const RewardParams& rp,
                               const CptParams& cpt, int k_max,
                               const GradCheckOptions& opts);

// Output directory for a command: <out>/<verb>-<hash>.
std::filesystem::path command_dir(const std::filesystem::path& out,
                                  const std::string& verb,
                                  const ExperimentConfig& cfg);

// Each command writes into its directory (created if needed), including a
// manifest.json with the resolved config, hash and sub-seeds, and returns
// the directory. cmd_gradcheck additionally reports pass/fail through
// `passed`.
std::filesystem::path cmd_solve(const ExperimentConfig& cfg,
                                const std::filesystem::path& out);
std::filesystem::path cmd_simulate(const ExperimentConfig& cfg,
                                   const std::filesystem::path& out);
std::filesystem::path cmd_gen_demos(const ExperimentConfig& cfg,
                                    const std::filesystem::path& out);
std::filesystem::path cmd_learn(const ExperimentConfig& cfg,
                                const std::filesystem::path& out);
std::filesystem::path cmd_baseline(const ExperimentConfig& cfg,
                                   const std::filesystem::path& out);
std::filesystem::path cmd_eval(const ExperimentConfig& cfg,
                               const std::filesystem::path& out);
std::filesystem::path cmd_gradcheck(const ExperimentConfig& cfg,
                                    const std::filesystem::path& out,
                                    bool* passed = nullptr);

}  // namespace brsmg
