#pragma once

#include <algorithm>
#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chefshat/actions.hpp"
#include "chefshat/engine.hpp"
#include "chefshat/net.hpp"
#include "chefshat/rng.hpp"

#include "json.hpp"

namespace chefshat {

using StateVec = std::array<double, kStateWidth>;

// One transition as consumed by the learners. next_state / next_mask describe
// the agent's next acting turn; both are ignored on terminal records.
struct Experience {
  StateVec state{};
  int action = 0;
  double reward = 0.0;
  StateVec next_state{};
  MaskVector next_mask{};
  bool terminal = false;
};

// act() result: the chosen slot, its softmaxed probability over allowed slots
// (the confidence trace plotted by the telemetry), and the mask cardinality.
struct ActChoice {
  int action = 0;
  double confidence = 1.0;
  int allowed = 0;
};

// Multiplicative decay applied once per policy update, floored at minimum.
struct EpsilonSchedule {
  double start = 1.0;
  double minimum = 0.1;
  double decay = 0.995;
  double value = 1.0;

  void reset() { value = start; }
  void step() { value = std::max(minimum, value * decay); }
};

struct AgentConfig {
  std::string kind = "random";  // random | dql | a2c | ppo
  std::vector<int> hidden{256, 256};
  Activation activation = Activation::Relu;
  double learning_rate = 0.0;  // 0 picks the per-kind default
  double gamma = 0.99;
  EpsilonSchedule epsilon;
  int replay_capacity = 10000;
  int batch_size = 64;
  int target_sync = 100;
  int update_every = 4;  // DQL gradient step cadence, in recorded transitions
  double kl_target = 0.01;
  double beta_init = 1.0;
  int ppo_epochs = 4;
  double entropy_coef = 0.01;
  bool eval_greedy = false;  // force argmax instead of sampling at evaluation
  uint64_t seed = 0;

  double effective_learning_rate() const;
};

nlohmann::json agent_config_to_json(const AgentConfig& cfg);
AgentConfig agent_config_from_json(const nlohmann::json& j);

// Uniform acting/learning interface for the table's four players.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual std::string kind() const = 0;
  // Never returns a masked-out slot.
  virtual ActChoice act(const StateVec& state, const MaskVector& mask,
                        Rng& rng) = 0;
  // Raw 200-wide action head (Q-values or policy logits); empty for agents
  // without a network.
  virtual std::vector<double> action_outputs(const StateVec&) const {
    return {};
  }
  virtual void record(const Experience&) {}
  virtual void train_step() {}
  virtual void end_of_match(const std::vector<int>& /*positions*/) {}

  virtual void set_learning(bool on) { learning_ = on; }
  bool learning() const { return learning_; }

  // Snapshot of the policy and learning state. Replay/rollout buffers are
  // not copied: a snapshot starts collecting afresh.
  virtual std::unique_ptr<Agent> clone() const = 0;

  virtual void save(const std::string& path) const;
  virtual uint64_t weights_hash() const { return 0; }

  // Introspection for tests and diagnostics (epsilon, beta, update counts).
  virtual nlohmann::json debug_state() const { return nlohmann::json::object(); }

 protected:
  bool learning_ = true;
};

std::unique_ptr<Agent> make_agent(const AgentConfig& cfg);
std::unique_ptr<Agent> load_agent(const std::string& path,
                                  std::optional<uint64_t> seed_override = {});

// ---- learning math shared by the trainers and the gradient tests ----

// R_t = r_t + gamma * R_{t+1}, computed backward.
std::vector<double> discounted_returns(const std::vector<double>& rewards,
                                       double gamma);

double masked_entropy(const std::vector<double>& p, const MaskVector& mask);
double masked_kl(const std::vector<double>& p_old,
                 const std::vector<double>& p_new, const MaskVector& mask);

// Adaptive penalty rule: doubles beta when kl > 1.5 * target, halves it when
// kl < target / 1.5.
double adapt_kl_beta(double beta, double kl, double kl_target);

// d/dlogits of  -A * log p[a] - entropy_coef * H(p)  over the masked softmax.
void a2c_logit_grad(const std::vector<double>& p, const MaskVector& mask,
                    int action, double advantage, double entropy_coef,
                    double* out);

// d/dlogits of  -A * p[a]/p_old[a] + beta * KL(p_old || p).
void ppo_logit_grad(const std::vector<double>& p_new,
                    const std::vector<double>& p_old, const MaskVector& mask,
                    int action, double advantage, double beta, double* out);

struct EpisodeStep {
  StateVec state{};
  int action = 0;
  double reward = 0.0;
  MaskVector mask{};
  std::vector<double> old_dist;  // collection-time policy (PPO only)
};

// Double-estimator regression targets: a* is the online argmax over the next
// mask, bootstrapped through the target network; terminal targets are r.
std::vector<double> dql_targets(const Network& online, const Network& target,
                                const std::vector<Experience>& batch,
                                double gamma);

// Mean squared error on the taken actions only.
Gradients dql_gradients(const Network& online,
                        const std::vector<Experience>& batch,
                        const std::vector<double>& targets);

// Combined actor-critic step for one episode: policy-gradient actor loss with
// entropy bonus on head 0, squared-error critic regression on head 1.
Gradients a2c_episode_gradients(const Network& net,
                                const std::vector<EpisodeStep>& steps,
                                double gamma, double entropy_coef);

// KL-penalized surrogate for the PPO actor. Samples whose collection-time
// probability of the taken action is zero are excluded; their count is added
// to *excluded when given.
Gradients ppo_actor_gradients(const Network& actor,
                              const std::vector<EpisodeStep>& steps,
                              const std::vector<double>& advantages,
                              double beta, int* excluded = nullptr);

// Mean squared (V - target) regression for a single-value head.
Gradients value_gradients(const Network& critic,
                          const std::vector<EpisodeStep>& steps,
                          const std::vector<double>& targets);

}  // namespace chefshat
