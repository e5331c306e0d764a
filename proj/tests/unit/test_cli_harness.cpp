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

#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "brsmg/experiment.hpp"
#include "brsmg/table_io.hpp"
#include "json.hpp"
#include "toys.hpp"

namespace brsmg {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

ExperimentConfig toy_experiment() {
  ExperimentConfig cfg;
  cfg.game = test::toy_config(0.5);
  cfg.cpt = CptParams::uniform(0.7, 0.5, 3.0);
  cfg.learn.demos = 12;
  cfg.learn.epochs = 3;
  cfg.baseline.epochs = 3;
  cfg.simulate.episodes = 10;
  cfg.gradcheck.samples = 60;
  cfg.seed = 7;
  return cfg;
}

class Scratch : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / "brsmg_cli_tests" / info->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST(Config, EmptyDocumentGivesDefaults) {
  const ExperimentConfig cfg = parse_config("{}");
  const ExperimentConfig def;
  EXPECT_EQ(config_hash(cfg), config_hash(def));
  EXPECT_EQ(cfg.k_max, 2);
  EXPECT_EQ(cfg.learn.demos, 100);
  EXPECT_FALSE(cfg.risk_mode.has_value());
}

TEST(Config, UnknownKeysNameTheirPath) {
  try {
    parse_config(R"({"learn": {"epochs": 3, "epohcs": 4}})");
    FAIL() << "no error";
  } catch (const ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("learn.epohcs"), std::string::npos)
        << e.what();
  }
  EXPECT_THROW(parse_config(R"({"bogus": 1})"), ParameterError);
  EXPECT_THROW(parse_config(R"({"game": {"door_3": [0, 0]}})"), ParameterError);
}

TEST(Config, InvalidValuesAreRejected) {
  EXPECT_THROW(parse_config(R"({"k_max": 1})"), ParameterError);
  EXPECT_THROW(parse_config(R"({"cpt": {"alpha": 1.5}})"), ParameterError);
  EXPECT_THROW(parse_config(R"({"learn": {"demos": 0}})"), ParameterError);
  EXPECT_THROW(parse_config(R"({"risk_mode": "greedy"})"), ParameterError);
  EXPECT_THROW(parse_config(R"({"simulate": {"scenarios": ["L1-L3"]}})"),
               ParameterError);
  EXPECT_THROW(parse_config("not json"), ParameterError);
}

TEST(Config, CanonicalJsonRoundTrips) {
  ExperimentConfig cfg = toy_experiment();
  cfg.risk_mode = RiskMode::kNeutral;
  cfg.cpt.gamma = {0.5, 0.6};
  const ExperimentConfig back = parse_config(config_to_json(cfg));
  EXPECT_EQ(config_to_json(back), config_to_json(cfg));
  EXPECT_EQ(config_hash(back), config_hash(cfg));
}

TEST(Config, HashTracksResultsOnly) {
  ExperimentConfig a = toy_experiment();
  ExperimentConfig b = a;
  b.workers = 8;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 8;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  EXPECT_NE(sub_seed(a, SeedStream::kDemos), sub_seed(a, SeedStream::kInit));
}

TEST(Config, ScenarioLabels) {
  EXPECT_EQ(parse_scenario("L1-L2"), (std::array<int, 2>{1, 2}));
  EXPECT_EQ(parse_scenario("L2-L2"), (std::array<int, 2>{2, 2}));
  EXPECT_THROW(parse_scenario("L1L2"), ParameterError);
  const CptParams n = cpt_for_mode(CptParams::uniform(0.7, 0.5, 30.0),
                                   RiskMode::kNeutral);
  EXPECT_EQ(n.alpha, (std::array<double, 2>{1.0, 1.0}));
  EXPECT_EQ(n.gamma, (std::array<double, 2>{1.0, 1.0}));
  EXPECT_EQ(n.boltzmann_beta, 30.0);
}

TEST(TableIo, DemosRoundTrip) {
  const grid::GridWorld world(test::toy_config());
  const auto pols = solve_all(world.spec(), world.rewards(),
                              CptParams::uniform(0.7, 0.5, 3.0), 2);
  auto demos = grid::gen_demos(world, pols, 8, 1);
  demos[3].true_levels.reset();
  demos[3].seed.reset();
  std::stringstream ss;
  write_demos_csv(ss, demos);
  const auto back = read_demos_csv(ss);
  ASSERT_EQ(back.size(), demos.size());
  for (std::size_t i = 0; i < demos.size(); ++i) {
    EXPECT_EQ(back[i].id, demos[i].id);
    EXPECT_EQ(back[i].steps, demos[i].steps);
    EXPECT_EQ(back[i].true_levels, demos[i].true_levels);
    EXPECT_EQ(back[i].seed, demos[i].seed);
  }
}

TEST(TableIo, MalformedDemosAreRejected) {
  std::istringstream missing("demo_id,t,state,a1,a2,k1,k2,seed\n0,0,5,1\n");
  EXPECT_THROW(read_demos_csv(missing), ParameterError);
  std::istringstream order(
      "demo_id,t,state,a1,a2,k1,k2,seed\n0,1,5,1,1,,,\n0,0,5,1,1,,,\n");
  EXPECT_THROW(read_demos_csv(order), ParameterError);
  std::istringstream header("id,t\n");
  EXPECT_THROW(read_demos_csv(header), ParameterError);
}

TEST(TableIo, ParamsRoundTripExactly) {
  CptParams cpt = CptParams::uniform(0.7, 0.123456789012345678, 30.0);
  RewardParams rp;
  rp.omega = {std::vector<double>{1.0 / 3.0, 2.0, 2.5},
              std::vector<double>{1.1, 1.0 + 1e-15, 2.2}};
  CptParams c2 = CptParams::uniform(0.7, 0.9, 30.0);
  RewardParams r2;
  params_from_json(params_to_json(cpt, rp), c2, r2);
  EXPECT_EQ(c2.gamma, cpt.gamma);
  EXPECT_EQ(r2.omega, rp.omega);
  cpt.gamma = {0.4, 0.6};
  params_from_json(params_to_json(cpt, rp), c2, r2);
  EXPECT_EQ(c2.gamma, cpt.gamma);
  EXPECT_TRUE(
      nlohmann::json::parse(params_to_json(cpt, rp))["gamma"].is_array());
}

TEST_F(Scratch, SolveIsByteIdenticalOnRerun) {
  const ExperimentConfig cfg = toy_experiment();
  const fs::path a = cmd_solve(cfg, dir_ / "a");
  const fs::path b = cmd_solve(cfg, dir_ / "b");
  EXPECT_EQ(a.filename(), "solve-" + config_hash(cfg));
  for (const char* f : {"policy_cpt.csv", "value_cpt.csv",
                        "convergence_cpt.csv", "policy_neutral.csv",
                        "manifest.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const auto m = nlohmann::json::parse(slurp(a / "manifest.json"));
  EXPECT_EQ(m["config_hash"], config_hash(cfg));
  EXPECT_EQ(m["config"]["k_max"], 2);
  EXPECT_TRUE(m["seeds"].is_object());
}

TEST_F(Scratch, SimulateEmitsEveryCell) {
  const ExperimentConfig cfg = toy_experiment();
  const fs::path d = cmd_simulate(cfg, dir_);
  std::istringstream rs(slurp(d / "rs_summary.csv"));
  std::string line;
  std::getline(rs, line);
  EXPECT_EQ(line, "scenario,risk_mode,episodes,rs");
  int rows = 0;
  while (std::getline(rs, line)) {
    ++rows;
    const double v = std::stod(line.substr(line.rfind(',') + 1));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_EQ(rows, 3 * 2);
}

TEST_F(Scratch, EvalOfTruthIsExact) {
  ExperimentConfig cfg = toy_experiment();
  const grid::GridWorld world(cfg.game);
  const fs::path params = dir_ / "truth.json";
  std::ofstream(params) << params_to_json(cfg.cpt, world.rewards());
  cfg.paths.params = params.string();
  const fs::path d = cmd_eval(cfg, dir_);
  const auto r = nlohmann::json::parse(slurp(d / "report.json"));
  EXPECT_EQ(r["ppe"]["aggregate"].get<double>(), 0.0);
  EXPECT_EQ(r["ppe"]["gamma"].get<double>(), 0.0);
  EXPECT_EQ(r["pl"].get<double>(), 0.0);
  EXPECT_NEAR(r["pcc"]["average"].get<double>(), 1.0, 1e-12);
  cfg.paths.params.clear();
  EXPECT_THROW(cmd_eval(cfg, dir_), ParameterError);
}

TEST_F(Scratch, LearnAndBaselineUseStoredDemos) {
  ExperimentConfig cfg = toy_experiment();
  const fs::path g = cmd_gen_demos(cfg, dir_);
  cfg.paths.demos = (g / "demos.csv").string();
  const fs::path l = cmd_learn(cfg, dir_);
  const fs::path b = cmd_baseline(cfg, dir_);
  std::istringstream trace(slurp(l / "trace.csv"));
  std::string line;
  int rows = -1;
  while (std::getline(trace, line)) ++rows;
  EXPECT_EQ(rows, cfg.learn.epochs + 1);
  CptParams c = cfg.cpt;
  RewardParams rp;
  EXPECT_NO_THROW(params_from_json(slurp(l / "params.json"), c, rp));
  EXPECT_NO_THROW(params_from_json(slurp(b / "params.json"), c, rp));
  EXPECT_EQ(rp.omega[0].size(), 9u);
}

TEST_F(Scratch, GradcheckPassesOnToyWithinAMinute) {
  ExperimentConfig cfg = toy_experiment();
  cfg.gradcheck = {};
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  const fs::path d = cmd_gradcheck(cfg, dir_, &ok);
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0).count();
  EXPECT_TRUE(ok);
  EXPECT_LT(secs, 60.0);
  const auto m = nlohmann::json::parse(slurp(d / "manifest.json"));
  EXPECT_GE(m["results"]["checked"].get<int>(), 200);
  EXPECT_EQ(m["results"]["failed"].get<int>(), 0);
}

}  // namespace
}  // namespace brsmg
