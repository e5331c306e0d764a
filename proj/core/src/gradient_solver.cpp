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

#include "brsmg/gradient_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "brsmg/cpt_measure.hpp"
#include "cpt_backup.hpp"
#include "parallel.hpp"

namespace brsmg {
namespace {

void require_condition(const GameSpec& spec, const RewardParams& rp,
                       const CptParams& cpt) {
  if (!check_gradient_condition(spec, rp, cpt)) {
    const RewardBounds b = reward_bounds(spec, rp);
    std::ostringstream os;
    os << "value-gradient iteration refused: (R_max / R_min^(2 - alpha)) * "
          "alpha * discount must be < 1 (R_min = "
       << b.min << ", R_max = " << b.max << ", discount = " << spec.discount()
       << ")";
    throw GradientConditionError(os.str());
  }
}

void check_layout(const GameSpec& spec, const RewardParams& rp,
                  const CptParams& cpt, const ParamLayout& layout) {
  for (Agent agent : kAgents) {
    if (layout.feature_dim[index(agent)] != spec.feature_dim() ||
        rp.weights(agent).size() !=
            static_cast<std::size_t>(spec.feature_dim())) {
      throw ParameterError("parameter layout does not match the game");
    }
  }
  if (layout.shared_gamma && cpt.gamma[0] != cpt.gamma[1]) {
    throw ParameterError(
        "shared weighting exponent requested but the agents' gammas differ");
  }
}

// Linearization of the backup at one (state, ego action): dQ = constant +
// sum_j coef_j dV(next_j).
struct Linear {
  std::vector<double> constant;  // [p]
  std::vector<StateId> next;
  std::vector<double> coef;
};

class Linearizer {
 public:
  Linearizer(const GameSpec& spec, const RewardTable& rewards,
             const CptParams& cpt, const ParamLayout& layout, Agent agent)
      : spec_(spec),
        rewards_(rewards),
        layout_(layout),
        agent_(agent),
        alpha_(cpt.alpha[index(agent)]),
        gamma_(cpt.gamma[index(agent)]),
        np_(layout.size()) {}

  void run(StateId s, ActionId own, std::span<const double> opp_probs,
           std::span<const double> d_opp, std::span<const double> value,
           Linear& out) {
    const int n = static_cast<int>(opp_probs.size());
    detail::evaluate_backup(spec_, rewards_, agent_, s, own, opp_probs, value,
                            alpha_, gamma_, backup_);
    const detail::Backup& b = backup_;

    // Last rank with positive probability: its cumulative is exactly 1.
    int last = -1;
    for (int j = 0; j < n; ++j) {
      if (b.prob[j] > 0.0) last = j;
    }

    d_rho_tilde_.assign(static_cast<std::size_t>(n) * np_, 0.0);
    d_cum_.assign(np_, 0.0);
    dw_prev_.assign(np_, 0.0);
    dw_cur_.assign(np_, 0.0);
    double cum = 0.0;
    const int g_idx = layout_.gamma_index(agent_);
    for (int j = 0; j < n; ++j) {
      double* drt = d_rho_tilde_.data() + static_cast<std::size_t>(j) * np_;
      if (b.prob[j] == 0.0) continue;  // rho~_j is pinned at zero
      cum = std::min(1.0, cum + b.prob[j]);
      const double* dp =
          d_opp.data() + static_cast<std::size_t>(b.order[j]) * np_;
      for (int p = 0; p < np_; ++p) d_cum_[p] += dp[p];
      if (j == last || cum >= 1.0) {
        std::fill(dw_cur_.begin(), dw_cur_.end(), 0.0);
      } else {
        const double wp = cpt::weight_derivative_p(cum, gamma_);
        for (int p = 0; p < np_; ++p) dw_cur_[p] = wp * d_cum_[p];
        dw_cur_[g_idx] += cpt::weight_derivative_gamma(cum, gamma_);
      }
      for (int p = 0; p < np_; ++p) drt[p] = dw_cur_[p] - dw_prev_[p];
      std::swap(dw_prev_, dw_cur_);
    }

    // Quotient rule for rho = rho~ / S.
    d_sum_.assign(np_, 0.0);
    for (int j = 0; j < n; ++j) {
      const double* drt =
          d_rho_tilde_.data() + static_cast<std::size_t>(j) * np_;
      for (int p = 0; p < np_; ++p) d_sum_[p] += drt[p];
    }

    out.constant.assign(np_, 0.0);
    out.next.resize(n);
    out.coef.resize(n);
    const double discount = spec_.discount();
    const int w_off = layout_.omega_offset(agent_);
    const int dim = spec_.feature_dim();
    for (int j = 0; j < n; ++j) {
      const double u = cpt::utility_gain(b.x[j], alpha_);
      const double du =
          alpha_ == 1.0 ? 1.0 : alpha_ * std::pow(b.x[j], alpha_ - 1.0);
      const double* drt =
          d_rho_tilde_.data() + static_cast<std::size_t>(j) * np_;
      for (int p = 0; p < np_; ++p) {
        out.constant[p] += (drt[p] - b.rho[j] * d_sum_[p]) / b.rho_sum * u;
      }
      const auto [a1, a2] = joint_action(agent_, own, b.order[j]);
      if (b.rho[j] != 0.0 && !spec_.collision(s, a1, a2)) {
        const auto phi = spec_.features(s, own, b.order[j], agent_);
        for (int d = 0; d < dim; ++d) {
          out.constant[w_off + d] += b.rho[j] * du * phi[d];
        }
      }
      out.next[j] = b.next[j];
      out.coef[j] = b.rho[j] * du * discount;
    }
  }

 private:
  const GameSpec& spec_;
  const RewardTable& rewards_;
  const ParamLayout& layout_;
  Agent agent_;
  double alpha_;
  double gamma_;
  int np_;
  detail::Backup backup_;
  std::vector<double> d_rho_tilde_, d_cum_, dw_prev_, dw_cur_, d_sum_;
};

// All linearizations of one (agent, level) plus the smooth-max weights.
struct LinearSystem {
  int num_actions = 0;
  int np = 0;
  std::vector<Linear> lin;        // [s][a]
  std::vector<double> max_weight;  // [s][a]
};

LinearSystem build_system(const GameSpec& spec, const RewardTable& rewards,
                          const CptParams& cpt, const ParamLayout& layout,
                          std::span<const double> value,
                          std::span<const double> q, const OpponentModel& opp,
                          const OpponentGradient& d_opp, Agent agent,
                          double kappa, int workers) {
  const int n_states = spec.num_states();
  const int n_own = spec.num_actions(agent);
  LinearSystem sys;
  sys.num_actions = n_own;
  sys.np = layout.size();
  sys.lin.resize(static_cast<std::size_t>(n_states) * n_own);
  sys.max_weight.resize(static_cast<std::size_t>(n_states) * n_own);
  detail::parallel_for(n_states, workers, [&](int begin, int end) {
    Linearizer linearizer(spec, rewards, cpt, layout, agent);
    for (StateId s = begin; s < end; ++s) {
      const std::size_t base = static_cast<std::size_t>(s) * n_own;
      for (ActionId a = 0; a < n_own; ++a) {
        linearizer.run(s, a, opp.row(s, a), d_opp.row(s, a), value,
                       sys.lin[base + a]);
      }
      const std::vector<double> w = smooth_max_weights(
          q.subspan(base, static_cast<std::size_t>(n_own)), kappa);
      std::copy(w.begin(), w.end(), sys.max_weight.begin() + base);
    }
  });
  return sys;
}

// dQ(s, a) for the given dV.
void apply_q(const LinearSystem& sys, std::span<const double> d_value,
             StateId s, ActionId a, std::span<double> out) {
  const Linear& l = sys.lin[static_cast<std::size_t>(s) * sys.num_actions + a];
  std::copy(l.constant.begin(), l.constant.end(), out.begin());
  for (std::size_t j = 0; j < l.next.size(); ++j) {
    if (l.coef[j] == 0.0) continue;
    const double* dv =
        d_value.data() + static_cast<std::size_t>(l.next[j]) * sys.np;
    for (int p = 0; p < sys.np; ++p) out[p] += l.coef[j] * dv[p];
  }
}

void sweep(const LinearSystem& sys, std::span<const double> d_value,
           std::span<double> d_value_next, std::span<double> d_q, int workers) {
  const int n_states =
      static_cast<int>(sys.lin.size()) / std::max(1, sys.num_actions);
  detail::parallel_for(n_states, workers, [&](int begin, int end) {
    for (StateId s = begin; s < end; ++s) {
      double* dv = d_value_next.data() + static_cast<std::size_t>(s) * sys.np;
      std::fill(dv, dv + sys.np, 0.0);
      for (ActionId a = 0; a < sys.num_actions; ++a) {
        const std::size_t sa =
            static_cast<std::size_t>(s) * sys.num_actions + a;
        std::span<double> dq(d_q.data() + sa * sys.np,
                             static_cast<std::size_t>(sys.np));
        apply_q(sys, d_value, s, a, dq);
        const double g = sys.max_weight[sa];
        for (int p = 0; p < sys.np; ++p) dv[p] += g * dq[p];
      }
    }
  });
}

void policy_gradient(std::span<const double> policy,
                     std::span<const double> d_q, int n_states, int n_actions,
                     int np, double beta, std::span<double> out) {
  std::vector<double> mean(np);
  for (StateId s = 0; s < n_states; ++s) {
    const std::size_t base = static_cast<std::size_t>(s) * n_actions;
    std::fill(mean.begin(), mean.end(), 0.0);
    for (ActionId a = 0; a < n_actions; ++a) {
      const double* dq = d_q.data() + (base + a) * np;
      for (int p = 0; p < np; ++p) mean[p] += policy[base + a] * dq[p];
    }
    for (ActionId a = 0; a < n_actions; ++a) {
      const double* dq = d_q.data() + (base + a) * np;
      double* dpi = out.data() + (base + a) * np;
      const double scale = beta * policy[base + a];
      for (int p = 0; p < np; ++p) dpi[p] = scale * (dq[p] - mean[p]);
    }
  }
}

}  // namespace

ParamLayout ParamLayout::for_game(const GameSpec& spec, bool shared_gamma) {
  ParamLayout layout;
  layout.feature_dim = {spec.feature_dim(), spec.feature_dim()};
  layout.shared_gamma = shared_gamma;
  return layout;
}

std::vector<double> pack_params(const ParamLayout& layout,
                                const CptParams& cpt, const RewardParams& rp) {
  if (layout.shared_gamma && cpt.gamma[0] != cpt.gamma[1]) {
    throw ParameterError(
        "shared weighting exponent requested but the agents' gammas differ");
  }
  std::vector<double> theta(layout.size());
  for (int g = 0; g < layout.num_gamma(); ++g) theta[g] = cpt.gamma[g];
  for (Agent agent : kAgents) {
    const auto& w = rp.weights(agent);
    if (w.size() !=
        static_cast<std::size_t>(layout.feature_dim[index(agent)])) {
      throw ParameterError("reward weights do not match the parameter layout");
    }
    std::copy(w.begin(), w.end(), theta.begin() + layout.omega_offset(agent));
  }
  return theta;
}

void unpack_params(const ParamLayout& layout, std::span<const double> theta,
                   CptParams& cpt, RewardParams& rp) {
  if (theta.size() != static_cast<std::size_t>(layout.size())) {
    throw ParameterError("parameter vector has the wrong length");
  }
  for (Agent agent : kAgents) {
    cpt.gamma[index(agent)] = theta[layout.gamma_index(agent)];
    const int off = layout.omega_offset(agent);
    rp.omega[index(agent)].assign(
        theta.begin() + off,
        theta.begin() + off + layout.feature_dim[index(agent)]);
  }
}

double smooth_max(std::span<const double> x, double kappa) {
  if (x.empty()) throw DomainError("smooth_max of an empty vector");
  if (!(kappa > 0.0))
    throw ParameterError("smooth_max: kappa must be positive");
  double top = -std::numeric_limits<double>::infinity();
  for (double v : x) {
    if (!(v > 0.0)) throw DomainError("smooth_max: entries must be positive");
    top = std::max(top, std::log(v));
  }
  double acc = 0.0;
  for (double v : x) acc += std::exp(kappa * (std::log(v) - top));
  return std::exp(top + std::log(acc) / kappa);
}

std::vector<double> smooth_max_weights(std::span<const double> x,
                                       double kappa) {
  const double m = smooth_max(x, kappa);
  const double log_m = std::log(m);
  std::vector<double> w(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    w[i] = std::exp((kappa - 1.0) * (std::log(x[i]) - log_m));
  }
  return w;
}

GradientTables::GradientTables(const ParamLayout& layout, int num_states,
                               std::array<int, 2> num_actions, int k_max,
                               double kappa)
    : layout_(layout),
      num_states_(num_states),
      num_actions_(num_actions),
      k_max_(k_max),
      kappa_(kappa) {
  for (Agent agent : kAgents) levels_[index(agent)].resize(k_max);
}

const LevelGradients& GradientTables::level(Agent agent, int k) const {
  if (k < 1 || k > k_max_) {
    throw IndexError("level " + std::to_string(k) + " outside [1, k_max]");
  }
  return levels_[index(agent)][k - 1];
}

LevelGradients& GradientTables::level(Agent agent, int k) {
  if (k < 1 || k > k_max_) {
    throw IndexError("level " + std::to_string(k) + " outside [1, k_max]");
  }
  return levels_[index(agent)][k - 1];
}

std::span<const double> GradientTables::d_policy(Agent agent, int k, StateId s,
                                                 ActionId a) const {
  const auto& t = level(agent, k).d_policy;
  const std::size_t np = layout_.size();
  return {
      t.data() + (static_cast<std::size_t>(s) * num_actions(agent) + a) * np,
      np};
}

std::span<const double> GradientTables::d_value(Agent agent, int k,
                                                StateId s) const {
  const auto& t = level(agent, k).d_value;
  const std::size_t np = layout_.size();
  return {t.data() + static_cast<std::size_t>(s) * np, np};
}

OpponentGradient OpponentGradient::follower(std::span<const double> table,
                                            int ego_actions, int opp_actions,
                                            int num_params) {
  return OpponentGradient(table, true, ego_actions, opp_actions, num_params);
}

OpponentGradient OpponentGradient::unconditional(std::span<const double> table,
                                                 int opp_actions,
                                                 int num_params) {
  return OpponentGradient(table, false, 0, opp_actions, num_params);
}

std::vector<double> level0_policy_gradient(const GameSpec& spec,
                                           const RewardParams& rp,
                                           const ParamLayout& layout,
                                           StateId s, ActionId a_leader,
                                           Agent agent) {
  spec.check_state(s);
  const std::vector<double> pi = level0_policy(spec, rp, s, a_leader, agent);
  const int n = spec.num_actions(agent);
  const int np = layout.size();
  const int dim = spec.feature_dim();
  const int off = layout.omega_offset(agent);
  // dR[a] restricted to the agent's own block.
  std::vector<double> d_r(static_cast<std::size_t>(n) * dim, 0.0);
  std::vector<double> mean(dim, 0.0);
  for (ActionId a = 0; a < n; ++a) {
    const auto [a1, a2] = joint_action(agent, a, a_leader);
    if (spec.collision(s, a1, a2)) continue;
    const auto phi = spec.features(s, a, a_leader, agent);
    for (int d = 0; d < dim; ++d) {
      d_r[static_cast<std::size_t>(a) * dim + d] = phi[d];
      mean[d] += pi[a] * phi[d];
    }
  }
  std::vector<double> out(static_cast<std::size_t>(n) * np, 0.0);
  for (ActionId a = 0; a < n; ++a) {
    for (int d = 0; d < dim; ++d) {
      out[static_cast<std::size_t>(a) * np + off + d] =
          pi[a] * (d_r[static_cast<std::size_t>(a) * dim + d] - mean[d]);
    }
  }
  return out;
}

GradBellmanResult grad_bellman(const GameSpec& spec, const RewardParams& rp,
                               const CptParams& cpt, const ParamLayout& layout,
                               std::span<const double> value,
                               std::span<const double> q,
                               std::span<const double> d_value,
                               const OpponentModel& opp,
                               const OpponentGradient& d_opp, Agent agent,
                               double kappa) {
  cpt.validate();
  check_layout(spec, rp, cpt, layout);
  require_condition(spec, rp, cpt);
  const int n_states = spec.num_states();
  const int n_own = spec.num_actions(agent);
  const std::size_t np = layout.size();
  if (value.size() != static_cast<std::size_t>(n_states) ||
      q.size() != static_cast<std::size_t>(n_states) * n_own ||
      d_value.size() != n_states * np) {
    throw ContractError("grad_bellman: table sizes do not match the game");
  }
  const RewardTable rewards(spec, rp);
  const LinearSystem sys = build_system(spec, rewards, cpt, layout, value, q,
                                        opp, d_opp, agent, kappa, 1);
  GradBellmanResult out;
  out.d_value.resize(n_states * np);
  out.d_q.resize(static_cast<std::size_t>(n_states) * n_own * np);
  sweep(sys, d_value, out.d_value, out.d_q, 1);
  return out;
}

GradientTables solve_gradients(const GameSpec& spec, const RewardParams& rp,
                               const CptParams& cpt,
                               const LevelPolicySet& policies,
                               const ParamLayout& layout,
                               const GradientOptions& opts) {
  cpt.validate();
  check_layout(spec, rp, cpt, layout);
  require_condition(spec, rp, cpt);
  if (policies.num_states() != spec.num_states()) {
    throw ContractError("solve_gradients: policies belong to another game");
  }
  const RewardTable rewards(spec, rp);
  const int n_states = spec.num_states();
  const int np = layout.size();
  GradientTables tables(layout, n_states,
                        {spec.num_actions(Agent::kFirst),
                         spec.num_actions(Agent::kSecond)},
                        policies.k_max(), opts.kappa);

  for (Agent agent : kAgents) {
    const int n_own = spec.num_actions(agent);
    const int n_lead = spec.num_actions(opponent(agent));
    auto& table = tables.level0(agent);
    table.resize(static_cast<std::size_t>(n_states) * n_lead * n_own * np);
    detail::parallel_for(n_states, opts.workers, [&](int begin, int end) {
      for (StateId s = begin; s < end; ++s) {
        for (ActionId lead = 0; lead < n_lead; ++lead) {
          const std::vector<double> g =
              level0_policy_gradient(spec, rp, layout, s, lead, agent);
          std::copy(g.begin(), g.end(),
                    table.begin() +
                        (static_cast<std::size_t>(s) * n_lead + lead) * n_own *
                            np);
        }
      }
    });
  }

  for (int k = 1; k <= policies.k_max(); ++k) {
    for (Agent agent : kAgents) {
      const Agent opp_agent = opponent(agent);
      const int n_own = spec.num_actions(agent);
      const int n_opp = spec.num_actions(opp_agent);
      const OpponentModel opp = policies.opponent_model(agent, k);
      const OpponentGradient d_opp =
          k == 1 ? OpponentGradient::follower(tables.level0(opp_agent), n_own,
                                              n_opp, np)
                 : OpponentGradient::unconditional(
                       tables.level(opp_agent, k - 1).d_policy, n_opp, np);
      const LevelTables& fwd = policies.level(agent, k);
      const LinearSystem sys =
          build_system(spec, rewards, cpt, layout, fwd.value, fwd.q, opp,
                       d_opp, agent, opts.kappa, opts.workers);

      LevelGradients& out = tables.level(agent, k);
      out.d_value.assign(static_cast<std::size_t>(n_states) * np, 0.0);
      out.d_q.assign(static_cast<std::size_t>(n_states) * n_own * np, 0.0);
      std::vector<double> next(out.d_value.size());
      double residual = std::numeric_limits<double>::infinity();
      int sweeps = 0;
      while (residual > opts.tol) {
        if (sweeps >= opts.max_sweeps) {
          std::ostringstream os;
          os << "value-gradient iteration for agent " << index(agent) + 1
             << " level " << k << " did not converge in " << sweeps
             << " sweeps (residual " << residual << ")";
          throw ConvergenceError(os.str(), residual, sweeps);
        }
        sweep(sys, out.d_value, next, out.d_q, opts.workers);
        residual = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i) {
          residual = std::max(residual, std::abs(next[i] - out.d_value[i]));
        }
        std::swap(out.d_value, next);
        out.residual_history.push_back(residual);
        ++sweeps;
      }
      out.sweeps = sweeps;
      out.residual = residual;
      // dQ consistent with the converged dV.
      sweep(sys, out.d_value, next, out.d_q, opts.workers);
      out.d_policy.resize(out.d_q.size());
      policy_gradient(fwd.policy, out.d_q, n_states, n_own, np,
                      cpt.boltzmann_beta, out.d_policy);
    }
  }
  return tables;
}

}  // namespace brsmg
