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

// brsmg <verb> [--config PATH] [--out DIR] [--seed U64] [--workers N]
//              [--risk-mode cpt|neutral]
//
// Prints the output directory on success. Exit codes: 0 ok, 1 error,
// 2 usage, 3 gradient check failed.

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "brsmg/experiment.hpp"
#include "brsmg/log.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> risk_mode;
  bool ci = false;
  bool verbose = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config (defaults if omitted)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output root")->capture_default_str();
  cmd->add_option("--seed", f.seed, "master seed (overrides the config)");
  cmd->add_option("--workers", f.workers, "worker threads")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--risk-mode", f.risk_mode, "cpt or neutral")
      ->check(CLI::IsMember({"cpt", "neutral"}));
  cmd->add_flag("-v,--verbose", f.verbose, "log progress to stderr");
}

brsmg::ExperimentConfig resolve(const Flags& f) {
  brsmg::ExperimentConfig cfg;
  if (!f.config.empty()) cfg = brsmg::load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.workers) cfg.workers = *f.workers;
  if (f.risk_mode) cfg.risk_mode = brsmg::parse_risk_mode(*f.risk_mode);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-sensitive level-k Markov games: solve, simulate, learn"};
  app.require_subcommand(1);
  Flags flags;
  const std::map<std::string, std::string> verbs = {
      {"solve", "solve level-k policies and write tables"},
      {"simulate", "roll out scenario batches and report rates of success"},
      {"gen-demos", "generate demonstrations from the true parameters"},
      {"learn", "fit CPT and reward parameters to demonstrations"},
      {"baseline", "fit the maximum-entropy IRL baseline"},
      {"eval", "score learned parameters against the truth"},
      {"gradcheck", "check value gradients against finite differences"},
  };
  for (const auto& [name, help] : verbs) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_common(cmd, flags);
    if (name == "learn") {
      cmd->add_flag("--ci", flags.ci,
                    "run the gradient check first and stop if it fails");
    }
  }
  CLI11_PARSE(app, argc, argv);
  const std::string verb = app.get_subcommands().front()->get_name();

  if (flags.verbose) {
    brsmg::set_log_sink([](brsmg::LogLevel, std::string_view msg) {
      std::cerr << msg << '\n';
    });
  }

  try {
    const brsmg::ExperimentConfig cfg = resolve(flags);
    std::filesystem::path dir;
    if (verb == "solve") {
      dir = brsmg::cmd_solve(cfg, flags.out);
    } else if (verb == "simulate") {
      dir = brsmg::cmd_simulate(cfg, flags.out);
    } else if (verb == "gen-demos") {
      dir = brsmg::cmd_gen_demos(cfg, flags.out);
    } else if (verb == "learn") {
      if (flags.ci) {
        bool ok = false;
        const auto gc = brsmg::cmd_gradcheck(cfg, flags.out, &ok);
        if (!ok) {
          std::cerr << "gradient check failed, see " << gc.string() << '\n';
          return 3;
        }
      }
      dir = brsmg::cmd_learn(cfg, flags.out);
    } else if (verb == "baseline") {
      dir = brsmg::cmd_baseline(cfg, flags.out);
    } else if (verb == "eval") {
      dir = brsmg::cmd_eval(cfg, flags.out);
    } else {
      bool ok = false;
      dir = brsmg::cmd_gradcheck(cfg, flags.out, &ok);
      std::cout << dir.string() << '\n';
      if (!ok) {
        std::cerr << "gradient check failed\n";
        return 3;
      }
      return 0;
    }
    std::cout << dir.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
