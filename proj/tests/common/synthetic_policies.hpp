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

// Level policies with a closed-form dependence on a parameter vector,
//   pi^k(a | s; theta) = softmax_a(W^k[s][a] . theta),
// so that the likelihood and posterior machinery can be checked against
// finite differences without running the game solvers.

#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "brsmg/demonstration.hpp"
#include "brsmg/forward_solver.hpp"
#include "brsmg/gradient_solver.hpp"

namespace brsmg::test {

class SyntheticPolicies {
 public:
  SyntheticPolicies(int num_states, int num_actions, int num_params,
                    std::uint64_t seed, double scale = 1.0)
      : s_(num_states), a_(num_actions), p_(num_params) {
    layout_.feature_dim = {num_params - 1 - (num_params - 1) / 2,
                           (num_params - 1) / 2};
    layout_.shared_gamma = true;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, scale);
    w_.resize(static_cast<std::size_t>(2) * 2 * s_ * a_ * p_);
    for (double& v : w_) v = n(rng);
  }

  int num_params() const { return p_; }
  int num_states() const { return s_; }
  int num_actions() const { return a_; }
  const ParamLayout& layout() const { return layout_; }

  LevelPolicySet policies(const std::vector<double>& theta) const {
    LevelPolicySet set(s_, {a_, a_}, 2);
    for (Agent agent : kAgents) {
      for (int k = 1; k <= 2; ++k) {
        auto& pol = set.level(agent, k).policy;
        pol.assign(static_cast<std::size_t>(s_) * a_, 0.0);
        for (int s = 0; s < s_; ++s) {
          const auto row = probs(theta, agent, k, s);
          for (int a = 0; a < a_; ++a) pol[s * a_ + a] = row[a];
        }
      }
    }
    return set;
  }

  GradientTables gradients(const std::vector<double>& theta) const {
    GradientTables g(layout_, s_, {a_, a_}, 2, kDefaultKappa);
    for (Agent agent : kAgents) {
      for (int k = 1; k <= 2; ++k) {
        auto& d = g.level(agent, k).d_policy;
        d.assign(static_cast<std::size_t>(s_) * a_ * p_, 0.0);
        for (int s = 0; s < s_; ++s) {
          const auto pi = probs(theta, agent, k, s);
          std::vector<double> mean(p_, 0.0);
          for (int a = 0; a < a_; ++a) {
            for (int p = 0; p < p_; ++p)
              mean[p] += pi[a] * w(agent, k, s, a, p);
          }
          for (int a = 0; a < a_; ++a) {
            for (int p = 0; p < p_; ++p) {
              d[(static_cast<std::size_t>(s) * a_ + a) * p_ + p] =
                  pi[a] * (w(agent, k, s, a, p) - mean[p]);
            }
          }
        }
      }
    }
    return g;
  }

  // Random walk over states with uniformly drawn actions; transitions are
  // irrelevant to the likelihood.
  Demonstration random_demo(std::mt19937_64& rng, int length, int id) const {
    std::uniform_int_distribution<int> st(0, s_ - 1), ac(0, a_ - 1);
    Demonstration d;
    d.id = id;
    for (int t = 0; t < length; ++t)
      d.steps.push_back({st(rng), ac(rng), ac(rng)});
    return d;
  }

 private:
  double w(Agent agent, int k, int s, int a, int p) const {
    return w_[((((static_cast<std::size_t>(index(agent)) * 2 + (k - 1)) * s_ +
                 s) * a_ + a) * p_) + p];
  }

  std::vector<double> probs(const std::vector<double>& theta, Agent agent,
                            int k, int s) const {
    std::vector<double> z(a_);
    double top = -1e300;
    for (int a = 0; a < a_; ++a) {
      z[a] = 0.0;
      for (int p = 0; p < p_; ++p) z[a] += w(agent, k, s, a, p) * theta[p];
      top = std::max(top, z[a]);
    }
    double total = 0.0;
    for (double& v : z) total += v = std::exp(v - top);
    for (double& v : z) v /= total;
    return z;
  }

  int s_, a_, p_;
  ParamLayout layout_;
  std::vector<double> w_;
};

}  // namespace brsmg::test
