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

#include "brsmg/metrics_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "brsmg/log.hpp"

namespace brsmg {
namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ContractError(std::string(what) + ": size mismatch (" +
                        std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

double mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) /
         static_cast<double>(x.size());
}

}  // namespace

double ppe(std::span<const double> learned, std::span<const double> truth) {
  require_same_size(learned.size(), truth.size(), "ppe");
  double sum = 0.0;
  int n = 0;
  int skipped = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 0.0) {
      ++skipped;
      continue;
    }
    sum += std::abs(learned[i] - truth[i]) / std::abs(truth[i]);
    ++n;
  }
  if (skipped > 0) {
    log_message(LogLevel::kWarning, "ppe: skipped " + std::to_string(skipped) +
                                        " entries with zero truth");
  }
  if (n == 0) throw DomainError("ppe: truth is all zero");
  return sum / n;
}

PpeBlocks ppe_blocks(const ParamLayout& layout,
                     std::span<const double> learned,
                     std::span<const double> truth) {
  require_same_size(learned.size(), static_cast<std::size_t>(layout.size()),
                    "ppe_blocks");
  require_same_size(truth.size(), learned.size(), "ppe_blocks");
  PpeBlocks out;
  const int ng = layout.num_gamma();
  out.gamma = ppe(learned.subspan(0, ng), truth.subspan(0, ng));
  const int o1 = layout.omega_offset(Agent::kFirst);
  const int o2 = layout.omega_offset(Agent::kSecond);
  out.omega_1 = ppe(learned.subspan(o1, layout.feature_dim[0]),
                    truth.subspan(o1, layout.feature_dim[0]));
  out.omega_2 = ppe(learned.subspan(o2, layout.feature_dim[1]),
                    truth.subspan(o2, layout.feature_dim[1]));
  out.aggregate = ppe(learned, truth);
  return out;
}

double policy_loss(std::span<const double> learned,
                   std::span<const double> truth) {
  require_same_size(learned.size(), truth.size(), "policy_loss");
  if (truth.empty()) throw ContractError("policy_loss: empty tables");
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    sum += std::abs(learned[i] - truth[i]);
  }
  return sum / static_cast<double>(truth.size());
}

double policy_loss(const LevelPolicySet& learned, const LevelPolicySet& truth,
                   Agent agent, const std::vector<bool>& state_mask) {
  require_same_size(learned.num_states(), truth.num_states(), "policy_loss");
  require_same_size(learned.num_actions(agent), truth.num_actions(agent),
                    "policy_loss");
  if (!state_mask.empty()) {
    require_same_size(state_mask.size(), truth.num_states(), "policy_loss");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (int k = 1; k <= 2; ++k) {
    for (StateId s = 0; s < truth.num_states(); ++s) {
      if (!state_mask.empty() && !state_mask[s]) continue;
      const auto a = learned.policy_row(agent, k, s);
      const auto b = truth.policy_row(agent, k, s);
      for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
      n += a.size();
    }
  }
  if (n == 0) throw ContractError("policy_loss: no states selected");
  return sum / static_cast<double>(n);
}

double policy_loss(const LevelPolicySet& learned, const LevelPolicySet& truth,
                   const std::vector<bool>& state_mask) {
  // Both agents have the same action count in every game built here, so the
  // pooled mean is the mean of the two.
  double total = 0.0;
  std::size_t n = 0;
  for (Agent agent : kAgents) {
    std::size_t rows = 0;
    for (StateId s = 0; s < truth.num_states(); ++s) {
      if (state_mask.empty() || state_mask[s]) ++rows;
    }
    const std::size_t entries = 2 * rows * truth.num_actions(agent);
    total += policy_loss(learned, truth, agent, state_mask) *
             static_cast<double>(entries);
    n += entries;
  }
  return total / static_cast<double>(n);
}

std::vector<bool> feasible_state_mask(const grid::GridWorld& world) {
  std::vector<bool> mask(world.spec().num_states());
  for (StateId s = 0; s < world.spec().num_states(); ++s) {
    mask[s] = world.feasible(s);
  }
  return mask;
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<int> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double pcc(std::span<const double> x, std::span<const double> y) {
  require_same_size(x.size(), y.size(), "pcc");
  if (x.size() < 2) throw DomainError("pcc: need at least two points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw DomainError("correlation undefined for a constant input");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double scc(std::span<const double> x, std::span<const double> y) {
  require_same_size(x.size(), y.size(), "scc");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pcc(rx, ry);
}

double rate_of_success(std::span<const grid::Outcome> outcomes) {
  if (outcomes.empty()) throw ContractError("rate_of_success: no outcomes");
  const auto wins = std::count(outcomes.begin(), outcomes.end(),
                               grid::Outcome::kSuccess);
  return static_cast<double>(wins) / static_cast<double>(outcomes.size());
}

std::array<double, 2> id_accuracy(std::span<const std::array<int, 2>> inferred,
                                  std::span<const std::array<int, 2>> truth) {
  require_same_size(inferred.size(), truth.size(), "id_accuracy");
  if (truth.empty()) throw ContractError("id_accuracy: no demonstrations");
  std::array<double, 2> out = {0.0, 0.0};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (int j = 0; j < 2; ++j) {
      if (inferred[i][j] == truth[i][j]) out[j] += 1.0;
    }
  }
  for (double& v : out) v /= static_cast<double>(truth.size());
  return out;
}

Correlations reward_correlations(const RewardParams& learned,
                                 const RewardParams& truth) {
  Correlations c;
  std::vector<double> all_l, all_t;
  for (Agent agent : kAgents) {
    const auto& l = learned.weights(agent);
    const auto& t = truth.weights(agent);
    c.scc[index(agent)] = scc(l, t);
    c.pcc[index(agent)] = pcc(l, t);
    all_l.insert(all_l.end(), l.begin(), l.end());
    all_t.insert(all_t.end(), t.begin(), t.end());
  }
  c.scc_average = 0.5 * (c.scc[0] + c.scc[1]);
  c.pcc_average = 0.5 * (c.pcc[0] + c.pcc[1]);
  c.scc_joint = scc(all_l, all_t);
  c.pcc_joint = pcc(all_l, all_t);
  return c;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  if (report.ppe) {
    j["ppe"] = {{"gamma", report.ppe->gamma},
                {"omega_1", report.ppe->omega_1},
                {"omega_2", report.ppe->omega_2},
                {"aggregate", report.ppe->aggregate}};
  }
  if (report.pl) j["pl"] = *report.pl;
  if (!report.rs.empty()) j["rs"] = report.rs;
  if (report.id_accuracy) j["id_accuracy"] = *report.id_accuracy;
  if (report.correlations) {
    const auto& c = *report.correlations;
    j["scc"] = {{"agent_1", c.scc[0]},
                {"agent_2", c.scc[1]},
                {"average", c.scc_average},
                {"joint", c.scc_joint}};
    j["pcc"] = {{"agent_1", c.pcc[0]},
                {"agent_2", c.pcc[1]},
                {"average", c.pcc_average},
                {"joint", c.pcc_joint}};
  }
  j["seeds"] = report.seeds;
  j["counts"] = report.counts;
  return j.dump(2) + "\n";
}

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "metric,value\n";
  auto row = [&](const std::string& name, double v) {
    os << name << ',' << v << '\n';
  };
  if (report.ppe) {
    row("ppe_gamma", report.ppe->gamma);
    row("ppe_omega_1", report.ppe->omega_1);
    row("ppe_omega_2", report.ppe->omega_2);
    row("ppe_aggregate", report.ppe->aggregate);
  }
  if (report.pl) row("pl", *report.pl);
  for (const auto& [label, v] : report.rs) row("rs_" + label, v);
  if (report.id_accuracy) {
    row("id_accuracy_1", (*report.id_accuracy)[0]);
    row("id_accuracy_2", (*report.id_accuracy)[1]);
  }
  if (report.correlations) {
    const auto& c = *report.correlations;
    row("scc_1", c.scc[0]);
    row("scc_2", c.scc[1]);
    row("scc_average", c.scc_average);
    row("scc_joint", c.scc_joint);
    row("pcc_1", c.pcc[0]);
    row("pcc_2", c.pcc[1]);
    row("pcc_average", c.pcc_average);
    row("pcc_joint", c.pcc_joint);
  }
  return os.str();
}

}  // namespace brsmg
