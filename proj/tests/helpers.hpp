// Shared test fixtures: the hand-built two-state MDP, its exhaustive policy
// oracles, and naive (forward-only) loss reimplementations used as
// finite-difference oracles against the analytic gradients.
#pragma once

#include <cmath>
#include <vector>

#include "chefshat/agents.hpp"

namespace testutil {

using namespace chefshat;

// ---- fixed 2-state / 2-action MDP (deterministic rewards) ----
//   s0 --a0--> s0, r 0.01     s0 --a1--> s1, r 0.0
//   s1 --a0--> s0, r 0.0      s1 --a1--> s1, r 0.1
// Optimal policy at every state is a1 (Q* = 0.082/0.09 at s0, 0.081/0.1 at
// s1 under gamma 0.9).
struct ChainMdp {
  static constexpr int kStates = 2;
  static constexpr int kActions = 2;
  double gamma = 0.9;

  static int next_state(int s, int a) { return a == 0 ? 0 : 1; }
  static double reward(int s, int a) {
    if (s == 0 && a == 0) return 0.01;
    if (s == 1 && a == 1) return 0.1;
    return 0.0;
  }

  static StateVec encode(int s) {
    StateVec v{};
    v[s] = 1.0;
    return v;
  }

  static MaskVector mask() {
    MaskVector m{};
    m[0] = m[1] = 1;
    return m;
  }

  // Q* by tabular value iteration to fixed point.
  std::vector<std::vector<double>> optimal_q(int sweeps = 10000) const {
    std::vector<std::vector<double>> q(kStates,
                                       std::vector<double>(kActions, 0.0));
    for (int it = 0; it < sweeps; ++it) {
      auto next = q;
      for (int s = 0; s < kStates; ++s)
        for (int a = 0; a < kActions; ++a) {
          const int s2 = next_state(s, a);
          next[s][a] = reward(s, a) + gamma * std::max(q[s2][0], q[s2][1]);
        }
      q = next;
    }
    return q;
  }

  // Exhaustive policy evaluation: value of each of the four stationary
  // deterministic policies at each state (long-horizon backward induction).
  // Returns the optimal action per state.
  std::vector<int> optimal_actions(int horizon = 400) const {
    std::vector<int> best(kStates, -1);
    std::vector<double> best_value(kStates,
                                   -std::numeric_limits<double>::infinity());
    for (int pa0 = 0; pa0 < kActions; ++pa0)
      for (int pa1 = 0; pa1 < kActions; ++pa1) {
        const int policy[2] = {pa0, pa1};
        std::vector<double> v(kStates, 0.0);
        for (int t = 0; t < horizon; ++t) {
          std::vector<double> nv(kStates);
          for (int s = 0; s < kStates; ++s) {
            const int a = policy[s];
            nv[s] = reward(s, a) + gamma * v[next_state(s, a)];
          }
          v = nv;
        }
        for (int s = 0; s < kStates; ++s)
          if (v[s] > best_value[s] + 1e-9) {
            best_value[s] = v[s];
            best[s] = policy[s];
          }
      }
    return best;
  }
};

// ---- forward-only loss oracles (independent reimplementation used by the
// finite-difference checks; advantages/targets are frozen constants) ----

inline double dql_loss_value(const Network& online,
                             const std::vector<Experience>& batch,
                             const std::vector<double>& targets) {
  double loss = 0.0;
  for (size_t i = 0; i < batch.size(); ++i) {
    const auto q = forward(online, batch[i].state)[0];
    const double d = q[batch[i].action] - targets[i];
    loss += d * d;
  }
  return loss / batch.size();
}

inline double a2c_loss_value(const Network& net,
                             const std::vector<EpisodeStep>& steps,
                             const std::vector<double>& returns,
                             const std::vector<double>& frozen_advantages,
                             double entropy_coef) {
  double loss = 0.0;
  for (size_t t = 0; t < steps.size(); ++t) {
    const auto heads = forward(net, steps[t].state);
    const auto p = masked_softmax(heads[0], steps[t].mask);
    const double v = heads[1][0];
    loss += -std::log(p[steps[t].action]) * frozen_advantages[t] -
            entropy_coef * masked_entropy(p, steps[t].mask) +
            (v - returns[t]) * (v - returns[t]);
  }
  return loss / steps.size();
}

inline double ppo_actor_loss_value(const Network& actor,
                                   const std::vector<EpisodeStep>& steps,
                                   const std::vector<double>& advantages,
                                   double beta) {
  double loss = 0.0;
  int included = 0;
  for (size_t t = 0; t < steps.size(); ++t) {
    if (steps[t].old_dist[steps[t].action] <= 0.0) continue;
    ++included;
    const auto p = masked_softmax(forward(actor, steps[t].state)[0],
                                  steps[t].mask);
    loss += -advantages[t] * p[steps[t].action] /
                steps[t].old_dist[steps[t].action] +
            beta * masked_kl(steps[t].old_dist, p, steps[t].mask);
  }
  return loss / included;
}

inline std::vector<double> flatten_grads(const Network& net,
                                         const Gradients& g) {
  std::vector<double> flat;
  for (size_t i = 0; i < net.trunk.size(); ++i) {
    flat.insert(flat.end(), g.trunk_dw[i].data.begin(),
                g.trunk_dw[i].data.end());
    flat.insert(flat.end(), g.trunk_db[i].begin(), g.trunk_db[i].end());
  }
  for (size_t i = 0; i < net.heads.size(); ++i) {
    flat.insert(flat.end(), g.head_dw[i].data.begin(),
                g.head_dw[i].data.end());
    flat.insert(flat.end(), g.head_db[i].begin(), g.head_db[i].end());
  }
  return flat;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1e-6, std::abs(a), std::abs(b)});
}

// Central finite difference of a scalar function of the network parameters.
template <typename LossFn>
double central_fd(Network& net, size_t param_index, double h, LossFn loss) {
  std::vector<double> params = flatten_params(net);
  const double orig = params[param_index];
  params[param_index] = orig + h;
  unflatten_params(net, params);
  const double up = loss();
  params[param_index] = orig - h;
  unflatten_params(net, params);
  const double down = loss();
  params[param_index] = orig;
  unflatten_params(net, params);
  return (up - down) / (2 * h);
}

// Random episode batch over the game's 200-slot catalog for gradient checks.
inline std::vector<EpisodeStep> random_episode(Rng& rng, int length,
                                               bool with_old_dist) {
  std::vector<EpisodeStep> steps(length);
  for (auto& st : steps) {
    for (double& v : st.state) v = rng.uniform_double();
    const int allowed = 2 + static_cast<int>(rng.uniform_int(12));
    while (mask_cardinality(st.mask) < allowed)
      st.mask[rng.uniform_int(kActionCount)] = 1;
    st.action = masked_uniform(st.mask, rng);
    st.reward = rng.uniform_double() < 0.2 ? 1.0 : -0.01;
    if (with_old_dist) {
      std::vector<double> logits(kActionCount);
      for (double& v : logits) v = rng.uniform_double() * 2 - 1;
      st.old_dist = masked_softmax(logits, st.mask);
    }
  }
  return steps;
}

}  // namespace testutil
