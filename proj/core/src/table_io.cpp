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

#include "brsmg/table_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace brsmg {
namespace {

using nlohmann::json;

// Restores the stream precision on scope exit.
class PrecisionGuard {
 public:
  explicit PrecisionGuard(std::ostream& os) : os_(os), old_(os.precision(17)) {}
  ~PrecisionGuard() { os_.precision(old_); }

 private:
  std::ostream& os_;
  std::streamsize old_;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_number(const std::string& s, int line_no) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParameterError("demos csv line " + std::to_string(line_no) +
                         ": bad number '" + s + "'");
  }
  return value;
}

std::vector<double> read_vector(const json& j, const char* key) {
  if (!j.contains(key)) {
    throw ParameterError(std::string("params: missing '") + key + "'");
  }
  try {
    return j.at(key).get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ParameterError(std::string("params: '") + key + "': " + e.what());
  }
}

}  // namespace

void write_policy_csv(std::ostream& os, const LevelPolicySet& policies) {
  PrecisionGuard guard(os);
  os << "agent,level,state,action,q,policy\n";
  for (Agent agent : kAgents) {
    const int n = policies.num_actions(agent);
    for (int k = 1; k <= policies.k_max(); ++k) {
      const LevelTables& t = policies.level(agent, k);
      for (StateId s = 0; s < policies.num_states(); ++s) {
        for (ActionId a = 0; a < n; ++a) {
          const std::size_t i = static_cast<std::size_t>(s) * n + a;
          os << index(agent) + 1 << ',' << k << ',' << s << ',' << a << ','
             << t.q[i] << ',' << t.policy[i] << '\n';
        }
      }
    }
  }
}

void write_value_csv(std::ostream& os, const LevelPolicySet& policies) {
  PrecisionGuard guard(os);
  os << "agent,level,state,value\n";
  for (Agent agent : kAgents) {
    for (int k = 1; k <= policies.k_max(); ++k) {
      const LevelTables& t = policies.level(agent, k);
      for (StateId s = 0; s < policies.num_states(); ++s) {
        os << index(agent) + 1 << ',' << k << ',' << s << ',' << t.value[s]
           << '\n';
      }
    }
  }
}

void write_convergence_csv(std::ostream& os, const LevelPolicySet& policies) {
  PrecisionGuard guard(os);
  os << "agent,level,sweep,residual\n";
  for (Agent agent : kAgents) {
    for (int k = 1; k <= policies.k_max(); ++k) {
      const auto& h = policies.level(agent, k).residual_history;
      for (std::size_t i = 0; i < h.size(); ++i) {
        os << index(agent) + 1 << ',' << k << ',' << i + 1 << ',' << h[i]
           << '\n';
      }
    }
  }
}

void write_demos_csv(std::ostream& os, std::span<const Demonstration> demos) {
  os << "demo_id,t,state,a1,a2,k1,k2,seed\n";
  for (const Demonstration& d : demos) {
    for (std::size_t t = 0; t < d.steps.size(); ++t) {
      const DemoStep& st = d.steps[t];
      os << d.id << ',' << t << ',' << st.state << ',' << st.a1 << ','
         << st.a2 << ',';
      if (d.true_levels) {
        os << (*d.true_levels)[0] << ',' << (*d.true_levels)[1];
      } else {
        os << ',';
      }
      os << ',';
      if (d.seed) os << *d.seed;
      os << '\n';
    }
  }
}

std::vector<Demonstration> read_demos_csv(std::istream& is) {
  std::vector<Demonstration> demos;
  std::string line;
  int line_no = 0;
  if (!std::getline(is, line)) return demos;
  ++line_no;
  const auto header = split(line);
  if (header.size() < 5 || header[0] != "demo_id" || header[1] != "t") {
    throw ParameterError("demos csv: unexpected header '" + line + "'");
  }
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 5 && f.size() != 8) {
      throw ParameterError("demos csv line " + std::to_string(line_no) +
                           ": expected 5 or 8 fields");
    }
    const int id = parse_number<int>(f[0], line_no);
    const int t = parse_number<int>(f[1], line_no);
    DemoStep step{parse_number<int>(f[2], line_no),
                  parse_number<int>(f[3], line_no),
                  parse_number<int>(f[4], line_no)};
    if (demos.empty() || demos.back().id != id) {
      if (t != 0) {
        throw ParameterError("demos csv line " + std::to_string(line_no) +
                             ": demo does not start at t = 0");
      }
      Demonstration d;
      d.id = id;
      if (f.size() == 8 && !f[5].empty() && !f[6].empty()) {
        d.true_levels = std::array<int, 2>{parse_number<int>(f[5], line_no),
                                           parse_number<int>(f[6], line_no)};
      }
      if (f.size() == 8 && !f[7].empty()) {
        d.seed = parse_number<std::uint64_t>(f[7], line_no);
      }
      demos.push_back(std::move(d));
    } else if (t != static_cast<int>(demos.back().steps.size())) {
      throw ParameterError("demos csv line " + std::to_string(line_no) +
                           ": steps out of order");
    }
    demos.back().steps.push_back(step);
  }
  return demos;
}

std::string params_to_json(const CptParams& cpt, const RewardParams& rp) {
  nlohmann::ordered_json j;
  if (cpt.gamma[0] == cpt.gamma[1]) {
    j["gamma"] = cpt.gamma[0];
  } else {
    j["gamma"] = cpt.gamma;
  }
  j["omega_1"] = rp.omega[0];
  j["omega_2"] = rp.omega[1];
  return j.dump(2) + "\n";
}

void params_from_json(const std::string& text, CptParams& cpt,
                      RewardParams& rp) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParameterError(std::string("params: ") + e.what());
  }
  if (!j.is_object()) throw ParameterError("params: expected an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "gamma" && key != "omega_1" && key != "omega_2") {
      throw ParameterError("params: unknown key '" + key + "'");
    }
  }
  if (!j.contains("gamma")) throw ParameterError("params: missing 'gamma'");
  const json& g = j["gamma"];
  if (g.is_number()) {
    cpt.gamma = {g.get<double>(), g.get<double>()};
  } else if (g.is_array() && g.size() == 2 && g[0].is_number() &&
             g[1].is_number()) {
    cpt.gamma = {g[0].get<double>(), g[1].get<double>()};
  } else {
    throw ParameterError("params: 'gamma' must be a number or a pair");
  }
  rp.omega[0] = read_vector(j, "omega_1");
  rp.omega[1] = read_vector(j, "omega_2");
}

void write_rollouts_csv(std::ostream& os, std::span<const RolloutRow> rows) {
  os << "scenario,risk_mode,seed,level_1,level_2,outcome,steps\n";
  for (const RolloutRow& r : rows) {
    os << r.scenario << ',' << r.risk_mode << ',' << r.record.seed << ','
       << r.record.levels[0] << ',' << r.record.levels[1] << ','
       << grid::outcome_name(r.record.outcome) << ',' << r.record.steps
       << '\n';
  }
}

}  // namespace brsmg
