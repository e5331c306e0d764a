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

// Gains-only cumulative prospect theory measure with reference point 0.
//
//   u(x) = x^alpha
//   w(p) = p^gamma / (p^gamma + (1 - p)^gamma)^(1 / gamma)
//
// Outcomes are ranked in descending order of value; the decision weight of
// the i-th ranked outcome is w(P[X >= x_i]) - w(P[X > x_i]).

#pragma once

#include <span>
#include <vector>

namespace brsmg::cpt {

// Probabilities below this are treated as exact zeros before weighting.
inline constexpr double kProbabilityFloor = 1e-12;

double weight(double p, double gamma);
// dw/dgamma. Zero at p = 0 and p = 1 where w is pinned for every gamma.
double weight_derivative_gamma(double p, double gamma);
// dw/dp on the open interval (0, 1).
double weight_derivative_p(double p, double gamma);

double utility_gain(double x, double alpha);

struct Outcome {
  double value;
  double prob;
  // Stable identifier used to break ties in the ranking (opponent action).
  int tag;
};

// Outcome list sorted by descending value, ties broken by ascending tag.
class WeightedOutcomeSet {
 public:
  // Sorts the input. Throws DomainError on negative values or an invalid
  // probability vector.
  static WeightedOutcomeSet from_unsorted(std::vector<Outcome> outcomes);
  // Accepts an already sorted list; throws ContractError if it is not.
  explicit WeightedOutcomeSet(std::vector<Outcome> sorted_outcomes);

  const std::vector<Outcome>& outcomes() const { return outcomes_; }
  std::size_t size() const { return outcomes_.size(); }

 private:
  struct Presorted {};
  WeightedOutcomeSet(std::vector<Outcome> outcomes, Presorted);
  std::vector<Outcome> outcomes_;
};

// Rank-dependent decision weights rho~_i of a sorted outcome set.
std::vector<double> decision_weights(const WeightedOutcomeSet& ws,
                                     double gamma);

// Allocation-free kernel: `sorted_probs` are in rank order; writes
// w(C_i) - w(C_{i-1}) with C_i the cumulative probability of the top i+1.
void decision_weights_into(std::span<const double> sorted_probs, double gamma,
                           std::span<double> out);

// rho = rho~ / sum(rho~). Throws DomainError when every entry is zero.
std::vector<double> normalize_weights(std::span<const double> rho_tilde);

double cpt_value(const WeightedOutcomeSet& ws, double alpha, double gamma);

}  // namespace brsmg::cpt
