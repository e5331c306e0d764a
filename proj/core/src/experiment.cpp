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

#include "brsmg/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "brsmg/table_io.hpp"

namespace brsmg {
namespace {

using nlohmann::json;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Walks a JSON object, remembering which keys were read, so that leftovers
// can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ParameterError(where() + " must be an object");
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (const json* v = find(key)) {
      try {
        out = v->get<T>();
      } catch (const json::exception& e) {
        throw ParameterError(child(key) + ": " + e.what());
      }
    }
  }

  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) {
        throw ParameterError("unknown config key '" + child(key) + "'");
      }
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

grid::Cell parse_cell(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() ||
      !j[1].is_number_integer()) {
    throw ParameterError(path + ": a cell is [x, y]");
  }
  return {j[0].get<int>(), j[1].get<int>()};
}

std::vector<grid::Cell> parse_cells(const json& j, const std::string& path) {
  if (!j.is_array()) throw ParameterError(path + ": expected a list of cells");
  std::vector<grid::Cell> out;
  for (const auto& c : j) out.push_back(parse_cell(c, path));
  return out;
}

ActionId parse_move(const json& j, const std::string& path) {
  const std::string name = j.is_string() ? j.get<std::string>() : "";
  for (ActionId a = 0; a < grid::kNumMoves; ++a) {
    if (grid::move_name(a) == name) return a;
  }
  throw ParameterError(path + ": unknown move '" + j.dump() + "'");
}

std::array<double, 2> parse_pair(const json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), j.get<double>()};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  throw ParameterError(path + ": expected a number or a pair");
}

void parse_game(const json& j, grid::GridConfig& g) {
  ObjectReader r(j, "game");
  r.read("width", g.width);
  r.read("height", g.height);
  r.read("max_episode_steps", g.max_episode_steps);
  r.read("discount", g.discount);
  r.read("collision_reward", g.collision_reward);
  r.read("seed", g.seed);
  r.read("nav_reward_1", g.nav_reward[0]);
  r.read("nav_reward_2", g.nav_reward[1]);
  if (const json* v = r.find("door_1")) {
    g.door[0] = parse_cell(*v, "game.door_1");
  }
  if (const json* v = r.find("door_2")) {
    g.door[1] = parse_cell(*v, "game.door_2");
  }
  if (const json* v = r.find("exit_move_1")) {
    g.exit_move[0] = parse_move(*v, "game.exit_move_1");
  }
  if (const json* v = r.find("exit_move_2")) {
    g.exit_move[1] = parse_move(*v, "game.exit_move_2");
  }
  if (const json* v = r.find("obstacles")) {
    g.obstacles = parse_cells(*v, "game.obstacles");
  }
  if (const json* v = r.find("start_region_1")) {
    g.start_region[0] = parse_cells(*v, "game.start_region_1");
  }
  if (const json* v = r.find("start_region_2")) {
    g.start_region[1] = parse_cells(*v, "game.start_region_2");
  }
  r.finish();
}

ojson cells_json(const std::vector<grid::Cell>& cells) {
  ojson a = ojson::array();
  for (const auto& c : cells) a.push_back({c.x, c.y});
  return a;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParameterError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << text;
}

template <typename Fn>
void write_stream(const fs::path& path, Fn&& fn) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  fn(os);
}

std::vector<RiskMode> selected_modes(const ExperimentConfig& cfg) {
  if (cfg.risk_mode) return {*cfg.risk_mode};
  return {RiskMode::kNeutral, RiskMode::kCpt};
}

// Parameters of the demonstrators.
CptParams truth_cpt(const ExperimentConfig& cfg) {
  return cpt_for_mode(cfg.cpt, cfg.risk_mode.value_or(RiskMode::kCpt));
}

SolverOptions solver_options(const ExperimentConfig& cfg) {
  SolverOptions o;
  o.tol = cfg.solver.tol;
  o.max_sweeps = cfg.solver.max_sweeps;
  o.workers = cfg.workers;
  return o;
}

LevelPolicySet solve_truth(const grid::GridWorld& world,
                           const ExperimentConfig& cfg) {
  return solve_all(world.spec(), world.rewards(), truth_cpt(cfg), cfg.k_max,
                   solver_options(cfg));
}

LevelPolicySet solve_mode(const grid::GridWorld& world,
                          const ExperimentConfig& cfg, RiskMode mode) {
  return solve_all(world.spec(), world.rewards(), cpt_for_mode(cfg.cpt, mode),
                   cfg.k_max, solver_options(cfg));
}

ojson seeds_json(const ExperimentConfig& cfg) {
  return {{"master", cfg.seed},
          {"demos", sub_seed(cfg, SeedStream::kDemos)},
          {"init", sub_seed(cfg, SeedStream::kInit)},
          {"simulate", sub_seed(cfg, SeedStream::kSimulate)},
          {"gradcheck", sub_seed(cfg, SeedStream::kGradCheck)},
          {"held_out", sub_seed(cfg, SeedStream::kHeldOut)}};
}

fs::path prepare(const fs::path& out, const std::string& verb,
                 const ExperimentConfig& cfg) {
  const fs::path dir = command_dir(out, verb, cfg);
  fs::create_directories(dir);
  return dir;
}

void write_manifest(const fs::path& dir, const std::string& verb,
                    const ExperimentConfig& cfg, const ojson& results) {
  ojson m;
  m["command"] = verb;
  m["config_hash"] = config_hash(cfg);
  m["config"] = ojson::parse(config_to_json(cfg));
  m["seeds"] = seeds_json(cfg);
  m["results"] = results;
  write_file(dir / "manifest.json", m.dump(2) + "\n");
}

// Demonstrations from paths.demos, or generated with the true parameters.
std::vector<Demonstration> load_or_generate_demos(
    const grid::GridWorld& world, const ExperimentConfig& cfg,
    const LevelPolicySet& truth) {
  if (!cfg.paths.demos.empty()) {
    std::ifstream is(cfg.paths.demos);
    if (!is) throw ParameterError("cannot open demos " + cfg.paths.demos);
    auto demos = read_demos_csv(is);
    if (demos.empty()) throw ParameterError("no demos in " + cfg.paths.demos);
    for (const auto& d : demos) validate_demo(world.spec(), d);
    return demos;
  }
  return grid::gen_demos(world, truth, cfg.learn.demos,
                         sub_seed(cfg, SeedStream::kDemos));
}

std::vector<double> truth_theta(const grid::GridWorld& world,
                                const ExperimentConfig& cfg,
                                const ParamLayout& layout) {
  CptParams c = truth_cpt(cfg);
  if (layout.shared_gamma) c.gamma = {c.gamma[0], c.gamma[0]};
  return pack_params(layout, c, world.rewards());
}

}  // namespace

std::string risk_mode_name(RiskMode mode) {
  return mode == RiskMode::kCpt ? "cpt" : "neutral";
}

RiskMode parse_risk_mode(const std::string& name) {
  if (name == "cpt") return RiskMode::kCpt;
  if (name == "neutral") return RiskMode::kNeutral;
  throw ParameterError("unknown risk mode '" + name + "'");
}

CptParams cpt_for_mode(const CptParams& cpt, RiskMode mode) {
  if (mode == RiskMode::kCpt) return cpt;
  CptParams c = CptParams::risk_neutral();
  c.boltzmann_beta = cpt.boltzmann_beta;
  return c;
}

std::array<int, 2> parse_scenario(const std::string& label) {
  int k1 = 0, k2 = 0;
  char tail = 0;
  if (std::sscanf(label.c_str(), "L%d-L%d%c", &k1, &k2, &tail) != 2 ||
      k1 < 1 || k2 < 1) {
    throw ParameterError("bad scenario '" + label + "' (expected Lk-Lk)");
  }
  return {k1, k2};
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  ObjectReader r(j, "");
  if (const json* v = r.find("game")) parse_game(*v, cfg.game);
  if (const json* v = r.find("cpt")) {
    ObjectReader c(*v, "cpt");
    if (const json* a = c.find("alpha")) {
      cfg.cpt.alpha = parse_pair(*a, "cpt.alpha");
    }
    if (const json* g = c.find("gamma")) {
      cfg.cpt.gamma = parse_pair(*g, "cpt.gamma");
    }
    c.read("beta", cfg.cpt.boltzmann_beta);
    c.finish();
  }
  r.read("k_max", cfg.k_max);
  if (const json* v = r.find("solver")) {
    ObjectReader s(*v, "solver");
    s.read("tol", cfg.solver.tol);
    s.read("max_sweeps", cfg.solver.max_sweeps);
    s.read("kappa", cfg.solver.kappa);
    s.finish();
  }
  if (const json* v = r.find("learn")) {
    ObjectReader s(*v, "learn");
    s.read("demos", cfg.learn.demos);
    s.read("eta", cfg.learn.eta);
    s.read("epochs", cfg.learn.epochs);
    s.read("shared_gamma", cfg.learn.shared_gamma);
    s.read("mean_gradient", cfg.learn.mean_gradient);
    s.read("converge_tol", cfg.learn.converge_tol);
    s.read("converge_patience", cfg.learn.converge_patience);
    s.finish();
  }
  if (const json* v = r.find("baseline")) {
    ObjectReader s(*v, "baseline");
    s.read("eta", cfg.baseline.eta);
    s.read("epochs", cfg.baseline.epochs);
    s.finish();
  }
  if (const json* v = r.find("simulate")) {
    ObjectReader s(*v, "simulate");
    s.read("episodes", cfg.simulate.episodes);
    s.read("scenarios", cfg.simulate.scenarios);
    s.finish();
  }
  if (const json* v = r.find("gradcheck")) {
    ObjectReader s(*v, "gradcheck");
    s.read("samples", cfg.gradcheck.samples);
    s.read("h", cfg.gradcheck.h);
    s.read("abs_tol", cfg.gradcheck.abs_tol);
    s.read("rel_tol", cfg.gradcheck.rel_tol);
    s.read("kappa", cfg.gradcheck.kappa);
    s.read("forward_tol", cfg.gradcheck.forward_tol);
    s.finish();
  }
  if (const json* v = r.find("paths")) {
    ObjectReader s(*v, "paths");
    s.read("demos", cfg.paths.demos);
    s.read("params", cfg.paths.params);
    s.finish();
  }
  if (const json* v = r.find("risk_mode")) {
    if (!v->is_string()) throw ParameterError("risk_mode must be a string");
    cfg.risk_mode = parse_risk_mode(v->get<std::string>());
  }
  if (const json* v = r.find("seed")) {
    if (!v->is_number_unsigned()) {
      throw ParameterError("seed must be a non-negative integer");
    }
    cfg.seed = v->get<std::uint64_t>();
  }
  r.read("workers", cfg.workers);
  r.finish();

  cfg.game.validate();
  cfg.cpt.validate();
  if (cfg.k_max < 2) throw ParameterError("k_max must be at least 2");
  for (const auto& s : cfg.simulate.scenarios) {
    const auto k = parse_scenario(s);
    if (k[0] > cfg.k_max || k[1] > cfg.k_max) {
      throw ParameterError("scenario " + s + " exceeds k_max");
    }
  }
  if (cfg.learn.demos < 1 || cfg.simulate.episodes < 1) {
    throw ParameterError("learn.demos and simulate.episodes must be positive");
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  return parse_config(read_file(path));
}

std::string config_to_json(const ExperimentConfig& cfg) {
  const auto& g = cfg.game;
  ojson j;
  j["game"] = {{"width", g.width},
               {"height", g.height},
               {"nav_reward_1", g.nav_reward[0]},
               {"nav_reward_2", g.nav_reward[1]},
               {"door_1", {g.door[0].x, g.door[0].y}},
               {"door_2", {g.door[1].x, g.door[1].y}},
               {"exit_move_1", grid::move_name(g.exit_move[0])},
               {"exit_move_2", grid::move_name(g.exit_move[1])},
               {"obstacles", cells_json(g.obstacles)},
               {"start_region_1", cells_json(g.start_region[0])},
               {"start_region_2", cells_json(g.start_region[1])},
               {"max_episode_steps", g.max_episode_steps},
               {"discount", g.discount},
               {"collision_reward", g.collision_reward},
               {"seed", g.seed}};
  j["cpt"] = {{"alpha", cfg.cpt.alpha},
              {"gamma", cfg.cpt.gamma},
              {"beta", cfg.cpt.boltzmann_beta}};
  j["k_max"] = cfg.k_max;
  j["solver"] = {{"tol", cfg.solver.tol},
                 {"max_sweeps", cfg.solver.max_sweeps},
                 {"kappa", cfg.solver.kappa}};
  j["learn"] = {{"demos", cfg.learn.demos},
                {"eta", cfg.learn.eta},
                {"epochs", cfg.learn.epochs},
                {"shared_gamma", cfg.learn.shared_gamma},
                {"mean_gradient", cfg.learn.mean_gradient},
                {"converge_tol", cfg.learn.converge_tol},
                {"converge_patience", cfg.learn.converge_patience}};
  j["baseline"] = {{"eta", cfg.baseline.eta},
                   {"epochs", cfg.baseline.epochs}};
  j["simulate"] = {{"episodes", cfg.simulate.episodes},
                   {"scenarios", cfg.simulate.scenarios}};
  j["gradcheck"] = {{"samples", cfg.gradcheck.samples},
                    {"h", cfg.gradcheck.h},
                    {"abs_tol", cfg.gradcheck.abs_tol},
                    {"rel_tol", cfg.gradcheck.rel_tol},
                    {"kappa", cfg.gradcheck.kappa},
                    {"forward_tol", cfg.gradcheck.forward_tol}};
  j["paths"] = {{"demos", cfg.paths.demos}, {"params", cfg.paths.params}};
  j["risk_mode"] =
      cfg.risk_mode ? risk_mode_name(*cfg.risk_mode) : std::string("both");
  j["seed"] = cfg.seed;
  return j.dump(2);
}

std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(config_to_json(cfg))));
  return buf;
}

std::uint64_t sub_seed(const ExperimentConfig& cfg, SeedStream stream) {
  return grid::derive_seed(cfg.seed, static_cast<std::uint64_t>(stream));
}

GradCheckReport gradient_check(const GameSpec& spec, const RewardParams& rp,
                               const CptParams& cpt, int k_max,
                               const GradCheckOptions& opts) {
  const ParamLayout layout = ParamLayout::for_game(spec, opts.shared_gamma);
  SolverOptions so;
  so.tol = opts.forward_tol;
  so.max_sweeps = opts.max_sweeps;
  so.workers = opts.workers;
  const LevelPolicySet base = solve_all(spec, rp, cpt, k_max, so);
  GradientOptions go;
  go.kappa = opts.kappa;
  go.tol = opts.forward_tol;
  go.max_sweeps = opts.max_sweeps;
  go.workers = opts.workers;
  const GradientTables grads = solve_gradients(spec, rp, cpt, base, layout, go);
  const std::vector<double> theta = pack_params(layout, cpt, rp);

  GradCheckReport report;
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<int> pick_param(0, layout.size() - 1);
  std::uniform_int_distribution<int> pick_state(0, spec.num_states() - 1);
  std::uniform_int_distribution<int> pick_level(1, k_max);
  std::uniform_int_distribution<int> pick_agent(0, 1);
  const int max_rounds =
      4 * ((opts.samples + opts.states_per_param - 1) / opts.states_per_param) +
      8;
  for (int round = 0; round < max_rounds && report.checked < opts.samples;
       ++round) {
    const int p = pick_param(rng);
    std::vector<double> tp = theta, tm = theta;
    tp[p] += opts.h;
    tm[p] -= opts.h;
    CptParams cp = cpt, cm = cpt;
    RewardParams rpp = rp, rpm = rp;
    unpack_params(layout, tp, cp, rpp);
    unpack_params(layout, tm, cm, rpm);
    LevelPolicySet plus, minus;
    try {
      plus = solve_all(spec, rpp, cp, k_max, so);
      minus = solve_all(spec, rpm, cm, k_max, so);
    } catch (const ParameterError&) {
      ++report.skipped_params;
      continue;
    }
    for (int i = 0; i < opts.states_per_param && report.checked < opts.samples;
         ++i) {
      GradCheckSample smp;
      smp.param = p;
      smp.agent = pick_agent(rng) == 0 ? Agent::kFirst : Agent::kSecond;
      smp.level = pick_level(rng);
      smp.state = pick_state(rng);
      const double v0 = base.level(smp.agent, smp.level).value[smp.state];
      const double vp = plus.level(smp.agent, smp.level).value[smp.state];
      const double vm = minus.level(smp.agent, smp.level).value[smp.state];
      smp.central = (vp - vm) / (2.0 * opts.h);
      smp.forward = (vp - v0) / opts.h;
      smp.backward = (v0 - vm) / opts.h;
      smp.analytic = grads.d_value(smp.agent, smp.level, smp.state)[p];
      const double tol =
          std::max(opts.abs_tol, opts.rel_tol * std::abs(smp.central));
      if (std::abs(smp.forward - smp.backward) > tol) {
        smp.kink = true;
        ++report.kinks;
      } else {
        const double err = std::abs(smp.analytic - smp.central);
        smp.pass = err <= tol;
        ++report.checked;
        if (!smp.pass) ++report.failed;
        report.worst_ratio = std::max(report.worst_ratio, err / tol);
      }
      report.samples.push_back(smp);
    }
  }
  return report;
}

fs::path command_dir(const fs::path& out, const std::string& verb,
                     const ExperimentConfig& cfg) {
  return out / (verb + "-" + config_hash(cfg));
}

fs::path cmd_solve(const ExperimentConfig& cfg, const fs::path& out) {
  const fs::path dir = prepare(out, "solve", cfg);
  const grid::GridWorld world(cfg.game);
  ojson results = ojson::object();
  for (RiskMode mode : selected_modes(cfg)) {
    const std::string name = risk_mode_name(mode);
    const LevelPolicySet pol = solve_mode(world, cfg, mode);
    write_stream(dir / ("policy_" + name + ".csv"),
                 [&](std::ostream& os) { write_policy_csv(os, pol); });
    write_stream(dir / ("value_" + name + ".csv"),
                 [&](std::ostream& os) { write_value_csv(os, pol); });
    write_stream(dir / ("convergence_" + name + ".csv"),
                 [&](std::ostream& os) { write_convergence_csv(os, pol); });
    ojson levels = ojson::array();
    for (Agent agent : kAgents) {
      for (int k = 1; k <= pol.k_max(); ++k) {
        const auto& t = pol.level(agent, k);
        levels.push_back({{"agent", index(agent) + 1},
                          {"level", k},
                          {"sweeps", t.sweeps},
                          {"residual", t.residual}});
      }
    }
    results[name] = levels;
  }
  write_manifest(dir, "solve", cfg, results);
  return dir;
}

fs::path cmd_simulate(const ExperimentConfig& cfg, const fs::path& out) {
  const fs::path dir = prepare(out, "simulate", cfg);
  const grid::GridWorld world(cfg.game);
  const std::uint64_t seed = sub_seed(cfg, SeedStream::kSimulate);
  std::vector<RolloutRow> rows;
  std::ostringstream summary;
  summary << "scenario,risk_mode,episodes,rs\n";
  ojson results = ojson::object();
  for (RiskMode mode : selected_modes(cfg)) {
    const std::string name = risk_mode_name(mode);
    const LevelPolicySet pol = solve_mode(world, cfg, mode);
    for (const std::string& scenario : cfg.simulate.scenarios) {
      // Every cell replays the same start states and random streams.
      const auto records = grid::simulate_batch(
          world, pol, parse_scenario(scenario), cfg.simulate.episodes, seed);
      std::vector<grid::Outcome> outcomes;
      for (const auto& rec : records) {
        outcomes.push_back(rec.outcome);
        rows.push_back({scenario, name, rec});
      }
      const double rs = rate_of_success(outcomes);
      summary << scenario << ',' << name << ',' << records.size() << ','
              << rs << '\n';
      results[name][scenario] = rs;
    }
  }
  write_stream(dir / "rollouts.csv",
               [&](std::ostream& os) { write_rollouts_csv(os, rows); });
  write_file(dir / "rs_summary.csv", summary.str());
  write_manifest(dir, "simulate", cfg, results);
  return dir;
}

fs::path cmd_gen_demos(const ExperimentConfig& cfg, const fs::path& out) {
  const fs::path dir = prepare(out, "gen-demos", cfg);
  const grid::GridWorld world(cfg.game);
  const LevelPolicySet truth = solve_truth(world, cfg);
  const auto demos = grid::gen_demos(world, truth, cfg.learn.demos,
                                     sub_seed(cfg, SeedStream::kDemos));
  write_stream(dir / "demos.csv",
               [&](std::ostream& os) { write_demos_csv(os, demos); });
  std::size_t steps = 0;
  for (const auto& d : demos) steps += d.size();
  write_manifest(dir, "gen-demos", cfg,
                 {{"demos", demos.size()}, {"steps", steps}});
  return dir;
}

fs::path cmd_learn(const ExperimentConfig& cfg, const fs::path& out) {
  const fs::path dir = prepare(out, "learn", cfg);
  const grid::GridWorld world(cfg.game);
  const LevelPolicySet truth = solve_truth(world, cfg);
  const auto demos = load_or_generate_demos(world, cfg, truth);
  const ParamLayout layout =
      ParamLayout::for_game(world.spec(), cfg.learn.shared_gamma);
  const std::vector<double> theta_true = truth_theta(world, cfg, layout);
  const std::vector<bool> mask = feasible_state_mask(world);

  LearnOptions opts;
  opts.eta = cfg.learn.eta;
  opts.epochs = cfg.learn.epochs;
  opts.shared_gamma = cfg.learn.shared_gamma;
  opts.mean_gradient = cfg.learn.mean_gradient;
  opts.converge_tol = cfg.learn.converge_tol;
  opts.converge_patience = cfg.learn.converge_patience;
  opts.solver = solver_options(cfg);
  opts.gradient.kappa = cfg.solver.kappa;
  opts.gradient.tol = cfg.solver.tol;
  opts.gradient.max_sweeps = cfg.solver.max_sweeps;
  opts.gradient.workers = cfg.workers;
  opts.workers = cfg.workers;

  const LearnState init =
      initial_learn_state(world.spec(), truth_cpt(cfg),
                          cfg.game.collision_reward,
                          sub_seed(cfg, SeedStream::kInit));
  std::ostringstream trace_csv;
  trace_csv.precision(17);
  trace_csv << "epoch,loglik,grad_norm,ppe_gamma,ppe_omega_1,ppe_omega_2,"
               "ppe_aggregate,pl\n";
  auto hook = [&](const EpochRecord& rec, const LevelPolicySet& pol) {
    const PpeBlocks e = ppe_blocks(layout, rec.theta, theta_true);
    trace_csv << rec.epoch << ',' << rec.loglik << ',' << rec.grad_norm << ','
              << e.gamma << ',' << e.omega_1 << ',' << e.omega_2 << ','
              << e.aggregate << ',' << policy_loss(pol, truth, mask) << '\n';
  };
  const LearnTrace trace = learn(world.spec(), demos, init, opts, hook);
  write_file(dir / "trace.csv", trace_csv.str());
  write_file(dir / "params.json",
             params_to_json(trace.final_state.cpt, trace.final_state.rp));
  ojson results = {{"epochs_run", trace.epochs.size()},
                   {"converged", trace.converged},
                   {"diverged", trace.diverged},
                   {"message", trace.message}};
  if (!trace.epochs.empty()) {
    results["final_loglik"] = trace.epochs.back().loglik;
  }
  write_manifest(dir, "learn", cfg, results);
  if (trace.diverged) {
    throw Error("learn diverged: " + trace.message + " (trace kept in " +
                dir.string() + ")");
  }
  return dir;
}

fs::path cmd_baseline(const ExperimentConfig& cfg, const fs::path& out) {
  const fs::path dir = prepare(out, "baseline", cfg);
  const grid::GridWorld world(cfg.game);
  std::vector<Demonstration> demos;
  if (cfg.paths.demos.empty()) {
    const LevelPolicySet truth = solve_truth(world, cfg);
    demos = load_or_generate_demos(world, cfg, truth);
  } else {
    demos = load_or_generate_demos(world, cfg, LevelPolicySet());
  }
  // Same starting weights as the BRSMG learner.
  const LearnState init =
      initial_learn_state(world.spec(), truth_cpt(cfg),
                          cfg.game.collision_reward,
                          sub_seed(cfg, SeedStream::kInit));
  MeirlOptions opts;
  opts.eta = cfg.baseline.eta;
  opts.epochs = cfg.baseline.epochs;
  opts.mean_gradient = cfg.learn.mean_gradient;
  opts.workers = cfg.workers;
  RewardParams learned = init.rp;
  std::ostringstream trace_csv;
  trace_csv.precision(17);
  trace_csv << "agent,epoch,loglik,grad_norm\n";
  ojson results = ojson::object();
  bool diverged = false;
  for (Agent agent : kAgents) {
    const MeirlTrace t = meirl_learn(world.spec(), demos, agent, init.rp, opts);
    learned.omega[index(agent)] = t.omega;
    for (const auto& e : t.epochs) {
      trace_csv << index(agent) + 1 << ',' << e.epoch << ',' << e.loglik << ','
                << e.grad_norm << '\n';
    }
    results["agent_" + std::to_string(index(agent) + 1)] = {
        {"diverged", t.diverged}, {"message", t.message}};
    diverged = diverged || t.diverged;
  }
  write_file(dir / "trace.csv", trace_csv.str());
  // Risk-neutral: no probability weighting.
  write_file(dir / "params.json",
             params_to_json(CptParams::risk_neutral(), learned));
  write_manifest(dir, "baseline", cfg, results);
  if (diverged) {
    throw Error("baseline diverged (trace kept in " + dir.string() + ")");
  }
  return dir;
}

fs::path cmd_eval(const ExperimentConfig& cfg, const fs::path& out) {
  if (cfg.paths.params.empty()) {
    throw ParameterError("eval needs paths.params");
  }
  const fs::path dir = prepare(out, "eval", cfg);
  const grid::GridWorld world(cfg.game);
  const LevelPolicySet truth = solve_truth(world, cfg);

  CptParams learned_cpt = truth_cpt(cfg);
  RewardParams learned_rp = world.rewards();
  params_from_json(read_file(cfg.paths.params), learned_cpt, learned_rp);
  const LevelPolicySet learned = solve_all(world.spec(), learned_rp,
                                           learned_cpt, cfg.k_max,
                                           solver_options(cfg));

  const bool shared = learned_cpt.gamma[0] == learned_cpt.gamma[1];
  const ParamLayout layout = ParamLayout::for_game(world.spec(), shared);
  EvalReport report;
  report.ppe = ppe_blocks(layout, pack_params(layout, learned_cpt, learned_rp),
                          truth_theta(world, cfg, layout));
  report.pl = policy_loss(learned, truth, feasible_state_mask(world));
  report.correlations = reward_correlations(learned_rp, world.rewards());

  const auto held_out = grid::gen_demos(world, truth, cfg.learn.demos,
                                        sub_seed(cfg, SeedStream::kHeldOut));
  std::vector<std::array<int, 2>> inferred, actual;
  for (const auto& d : held_out) {
    inferred.push_back(infer_levels(learned, d));
    actual.push_back(*d.true_levels);
  }
  report.id_accuracy = id_accuracy(inferred, actual);
  report.seeds = {{"master", cfg.seed},
                  {"held_out", sub_seed(cfg, SeedStream::kHeldOut)}};
  report.counts = {{"held_out_demos", static_cast<int>(held_out.size())}};

  write_file(dir / "report.json", report_to_json(report));
  write_file(dir / "report.csv", report_to_csv(report));
  write_manifest(dir, "eval", cfg, ojson::parse(report_to_json(report)));
  return dir;
}

fs::path cmd_gradcheck(const ExperimentConfig& cfg, const fs::path& out,
                       bool* passed) {
  const fs::path dir = prepare(out, "gradcheck", cfg);
  const grid::GridWorld world(cfg.game);
  GradCheckOptions opts;
  opts.samples = cfg.gradcheck.samples;
  opts.h = cfg.gradcheck.h;
  opts.abs_tol = cfg.gradcheck.abs_tol;
  opts.rel_tol = cfg.gradcheck.rel_tol;
  opts.kappa = cfg.gradcheck.kappa;
  opts.forward_tol = cfg.gradcheck.forward_tol;
  opts.shared_gamma = cfg.learn.shared_gamma;
  opts.seed = sub_seed(cfg, SeedStream::kGradCheck);
  opts.workers = cfg.workers;
  const GradCheckReport rep = gradient_check(
      world.spec(), world.rewards(), truth_cpt(cfg), cfg.k_max, opts);
  std::ostringstream csv;
  csv.precision(17);
  csv << "param,agent,level,state,analytic,central,forward,backward,kink,"
         "pass\n";
  for (const auto& s : rep.samples) {
    csv << s.param << ',' << index(s.agent) + 1 << ',' << s.level << ','
        << s.state << ',' << s.analytic << ',' << s.central << ','
        << s.forward << ',' << s.backward << ',' << s.kink << ',' << s.pass
        << '\n';
  }
  write_file(dir / "gradcheck.csv", csv.str());
  const bool ok = rep.passed(opts.samples);
  write_manifest(dir, "gradcheck", cfg,
                 {{"checked", rep.checked},
                  {"failed", rep.failed},
                  {"kinks", rep.kinks},
                  {"skipped_params", rep.skipped_params},
                  {"worst_ratio", rep.worst_ratio},
                  {"passed", ok}});
  if (passed) *passed = ok;
  return dir;
}

}  // namespace brsmg
