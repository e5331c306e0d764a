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

#include "brsmg/cpt_measure.hpp"

#include <algorithm>
#include <cmath>

#include "brsmg/game_model.hpp"

namespace brsmg::cpt {
namespace {

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ParameterError("probability weighting exponent must lie in (0,1]");
  }
}

void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError("probability outside [0,1]");
  }
}

void check_outcomes(const std::vector<Outcome>& outcomes) {
  if (outcomes.empty()) throw DomainError("empty outcome set");
  double total = 0.0;
  for (const Outcome& o : outcomes) {
    if (!(o.value >= 0.0)) {
      throw DomainError("outcome value must be a non-negative gain");
    }
    check_probability(o.prob);
    total += o.prob;
  }
  const double tol = 1e-12 * std::max<double>(1.0, outcomes.size());
  if (std::abs(total - 1.0) > tol) {
    throw DomainError("outcome probabilities do not sum to 1");
  }
}

bool ranked_before(const Outcome& a, const Outcome& b) {
  if (a.value != b.value) return a.value > b.value;
  return a.tag < b.tag;
}

}  // namespace

double weight(double p, double gamma) {
  check_gamma(gamma);
  check_probability(p);
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  if (gamma == 1.0) return p;
  const double pg = std::pow(p, gamma);
  const double qg = std::pow(1.0 - p, gamma);
  return pg / std::pow(pg + qg, 1.0 / gamma);
}

double weight_derivative_gamma(double p, double gamma) {
  check_gamma(gamma);
  check_probability(p);
  if (p == 0.0 || p == 1.0) return 0.0;
  const double q = 1.0 - p;
  const double lp = std::log(p);
  const double lq = std::log(q);
  const double pg = std::pow(p, gamma);
  const double qg = std::pow(q, gamma);
  const double d = pg + qg;
  const double w = pg / std::pow(d, 1.0 / gamma);
  // d/dgamma log w = log p + log(D) / gamma^2 - (p^g log p + q^g log q) / (g D)
  const double dlog =
      lp + std::log(d) / (gamma * gamma) - (pg * lp + qg * lq) / (gamma * d);
  return w * dlog;
}

double weight_derivative_p(double p, double gamma) {
  check_gamma(gamma);
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("weight_derivative_p: p must lie in (0,1)");
  }
  if (gamma == 1.0) return 1.0;
  const double q = 1.0 - p;
  const double pg = std::pow(p, gamma);
  const double qg = std::pow(q, gamma);
  const double d = pg + qg;
  const double w = pg / std::pow(d, 1.0 / gamma);
  // d/dp log w = gamma / p - (p^(g-1) - q^(g-1)) / D
  const double dlog = gamma / p - (pg / p - qg / q) / d;
  return w * dlog;
}

double utility_gain(double x, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ParameterError("utility exponent must lie in (0,1]");
  }
  if (!(x >= 0.0)) {
    throw DomainError("utility_gain is defined for gains (x >= 0) only");
  }
  if (alpha == 1.0) return x;
  return std::pow(x, alpha);
}

WeightedOutcomeSet WeightedOutcomeSet::from_unsorted(
    std::vector<Outcome> outcomes) {
  check_outcomes(outcomes);
  std::stable_sort(outcomes.begin(), outcomes.end(), ranked_before);
  return WeightedOutcomeSet(std::move(outcomes), Presorted{});
}

WeightedOutcomeSet::WeightedOutcomeSet(std::vector<Outcome> sorted_outcomes)
    : outcomes_(std::move(sorted_outcomes)) {
  check_outcomes(outcomes_);
  for (std::size_t i = 1; i < outcomes_.size(); ++i) {
    if (ranked_before(outcomes_[i], outcomes_[i - 1])) {
      throw ContractError(
          "WeightedOutcomeSet: outcomes are not sorted by descending value");
    }
  }
}

WeightedOutcomeSet::WeightedOutcomeSet(std::vector<Outcome> outcomes,
                                       Presorted)
    : outcomes_(std::move(outcomes)) {}

void decision_weights_into(std::span<const double> sorted_probs, double gamma,
                           std::span<double> out) {
  // The last rank with positive probability closes the distribution. Summing
  // up to it can land an ulp short of 1, where w is infinitely steep.
  std::size_t last = sorted_probs.size();
  for (std::size_t i = 0; i < sorted_probs.size(); ++i) {
    if (sorted_probs[i] >= kProbabilityFloor) last = i;
  }
  double cumulative = 0.0;
  double w_prev = 0.0;
  for (std::size_t i = 0; i < sorted_probs.size(); ++i) {
    const double p =
        sorted_probs[i] < kProbabilityFloor ? 0.0 : sorted_probs[i];
    cumulative = i == last ? 1.0 : std::min(1.0, cumulative + p);
    const double w_cur = p == 0.0 ? w_prev : weight(cumulative, gamma);
    out[i] = w_cur - w_prev;
    w_prev = w_cur;
  }
}

std::vector<double> decision_weights(const WeightedOutcomeSet& ws,
                                     double gamma) {
  check_gamma(gamma);
  std::vector<double> probs;
  probs.reserve(ws.size());
  for (const Outcome& o : ws.outcomes()) probs.push_back(o.prob);
  std::vector<double> out(ws.size());
  decision_weights_into(probs, gamma, out);
  return out;
}

std::vector<double> normalize_weights(std::span<const double> rho_tilde) {
  double total = 0.0;
  for (double r : rho_tilde) {
    if (!(r >= 0.0)) throw DomainError("decision weights must be non-negative");
    total += r;
  }
  if (!(total > 0.0)) {
    throw DomainError("degenerate decision weights: all entries are zero");
  }
  std::vector<double> rho(rho_tilde.begin(), rho_tilde.end());
  for (double& r : rho) r /= total;
  return rho;
}

double cpt_value(const WeightedOutcomeSet& ws, double alpha, double gamma) {
  const std::vector<double> rho = decision_weights(ws, gamma);
  double v = 0.0;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    v += rho[i] * utility_gain(ws.outcomes()[i].value, alpha);
  }
  return v;
}

}  // namespace brsmg::cpt
