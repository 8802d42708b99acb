#include "chefshat/agents.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace chefshat {

namespace {

Matrix stack_states(const std::vector<EpisodeStep>& steps) {
  Matrix X(static_cast<int>(steps.size()), kStateWidth);
  for (size_t i = 0; i < steps.size(); ++i)
    std::copy(steps[i].state.begin(), steps[i].state.end(), X.row(i));
  return X;
}

// Inverse-CDF draw from a masked distribution; falls back to the last
// allowed slot if rounding leaves a sliver of probability unassigned.
int sample_masked(const std::vector<double>& p, const MaskVector& mask,
                  Rng& rng) {
  const double u = rng.uniform_double();
  double acc = 0.0;
  int last = -1;
  for (int i = 0; i < kActionCount; ++i) {
    if (!mask[i]) continue;
    last = i;
    acc += p[i];
    if (u < acc) return i;
  }
  if (last < 0) throw std::invalid_argument("sample_masked: all-zero mask");
  return last;
}

std::vector<double> rewards_of(const std::vector<EpisodeStep>& steps) {
  std::vector<double> r(steps.size());
  for (size_t i = 0; i < steps.size(); ++i) r[i] = steps[i].reward;
  return r;
}

}  // namespace

double AgentConfig::effective_learning_rate() const {
  if (learning_rate > 0.0) return learning_rate;
  if (kind == "dql") return 1e-3;
  return 3e-4;
}

nlohmann::json agent_config_to_json(const AgentConfig& cfg) {
  return {{"kind", cfg.kind},
          {"hidden", cfg.hidden},
          {"activation", activation_name(cfg.activation)},
          {"learning_rate", cfg.learning_rate},
          {"gamma", cfg.gamma},
          {"epsilon",
           {{"start", cfg.epsilon.start},
            {"min", cfg.epsilon.minimum},
            {"decay", cfg.epsilon.decay}}},
          {"replay_capacity", cfg.replay_capacity},
          {"batch_size", cfg.batch_size},
          {"target_sync", cfg.target_sync},
          {"update_every", cfg.update_every},
          {"kl_target", cfg.kl_target},
          {"beta_init", cfg.beta_init},
          {"ppo_epochs", cfg.ppo_epochs},
          {"entropy_coef", cfg.entropy_coef},
          {"eval_greedy", cfg.eval_greedy},
          {"seed", cfg.seed}};
}

AgentConfig agent_config_from_json(const nlohmann::json& j) {
  AgentConfig cfg;
  cfg.kind = j.value("kind", cfg.kind);
  if (j.contains("hidden")) cfg.hidden = j.at("hidden").get<std::vector<int>>();
  if (j.contains("activation"))
    cfg.activation = activation_from_name(j.at("activation").get<std::string>());
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.gamma = j.value("gamma", cfg.gamma);
  if (j.contains("epsilon")) {
    const auto& e = j.at("epsilon");
    cfg.epsilon.start = e.value("start", cfg.epsilon.start);
    cfg.epsilon.minimum = e.value("min", cfg.epsilon.minimum);
    cfg.epsilon.decay = e.value("decay", cfg.epsilon.decay);
  }
  cfg.epsilon.reset();
  cfg.replay_capacity = j.value("replay_capacity", cfg.replay_capacity);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.target_sync = j.value("target_sync", cfg.target_sync);
  cfg.update_every = j.value("update_every", cfg.update_every);
  cfg.kl_target = j.value("kl_target", cfg.kl_target);
  cfg.beta_init = j.value("beta_init", cfg.beta_init);
  cfg.ppo_epochs = j.value("ppo_epochs", cfg.ppo_epochs);
  cfg.entropy_coef = j.value("entropy_coef", cfg.entropy_coef);
  cfg.eval_greedy = j.value("eval_greedy", cfg.eval_greedy);
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

void Agent::save(const std::string&) const {
  throw std::logic_error("this agent kind does not support save");
}

// ---- learning math ----

std::vector<double> discounted_returns(const std::vector<double>& rewards,
                                       double gamma) {
  if (gamma < 0.0 || gamma > 1.0)
    throw std::invalid_argument("discounted_returns: gamma outside [0, 1]");
  std::vector<double> ret(rewards.size());
  double acc = 0.0;
  for (int t = static_cast<int>(rewards.size()) - 1; t >= 0; --t) {
    acc = rewards[t] + gamma * acc;
    ret[t] = acc;
  }
  return ret;
}

double masked_entropy(const std::vector<double>& p, const MaskVector& mask) {
  double h = 0.0;
  for (int i = 0; i < kActionCount; ++i)
    if (mask[i] && p[i] > 0.0) h -= p[i] * std::log(p[i]);
  return h;
}

double masked_kl(const std::vector<double>& p_old,
                 const std::vector<double>& p_new, const MaskVector& mask) {
  double kl = 0.0;
  for (int i = 0; i < kActionCount; ++i) {
    if (!mask[i] || p_old[i] <= 0.0) continue;
    kl += p_old[i] * (std::log(p_old[i]) - std::log(p_new[i]));
  }
  return kl;
}

double adapt_kl_beta(double beta, double kl, double kl_target) {
  if (kl > 1.5 * kl_target) return beta * 2.0;
  if (kl < kl_target / 1.5) return beta / 2.0;
  return beta;
}

void a2c_logit_grad(const std::vector<double>& p, const MaskVector& mask,
                    int action, double advantage, double entropy_coef,
                    double* out) {
  const double h = masked_entropy(p, mask);
  for (int i = 0; i < kActionCount; ++i) {
    if (!mask[i]) {
      out[i] = 0.0;
      continue;
    }
    double g = -advantage * ((i == action ? 1.0 : 0.0) - p[i]);
    if (entropy_coef != 0.0 && p[i] > 0.0)
      g += entropy_coef * p[i] * (std::log(p[i]) + h);
    out[i] = g;
  }
}

void ppo_logit_grad(const std::vector<double>& p_new,
                    const std::vector<double>& p_old, const MaskVector& mask,
                    int action, double advantage, double beta, double* out) {
  const double ratio_coef = advantage / p_old[action];
  for (int i = 0; i < kActionCount; ++i) {
    if (!mask[i]) {
      out[i] = 0.0;
      continue;
    }
    out[i] = -ratio_coef * p_new[action] * ((i == action ? 1.0 : 0.0) - p_new[i]) +
             beta * (p_new[i] - p_old[i]);
  }
}

std::vector<double> dql_targets(const Network& online, const Network& target,
                                const std::vector<Experience>& batch,
                                double gamma) {
  Matrix Xn(static_cast<int>(batch.size()), kStateWidth);
  for (size_t i = 0; i < batch.size(); ++i)
    std::copy(batch[i].next_state.begin(), batch[i].next_state.end(),
              Xn.row(i));
  const ForwardCache co = forward_batch(online, Xn);
  const ForwardCache ct = forward_batch(target, Xn);
  std::vector<double> y(batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].terminal || mask_cardinality(batch[i].next_mask) == 0) {
      y[i] = batch[i].reward;
      continue;
    }
    std::span<const double> qo(co.head_out[0].row(i), kActionCount);
    const int best = masked_argmax(qo, batch[i].next_mask);
    y[i] = batch[i].reward + gamma * ct.head_out[0].at(i, best);
  }
  return y;
}

Gradients dql_gradients(const Network& online,
                        const std::vector<Experience>& batch,
                        const std::vector<double>& targets) {
  const int B = static_cast<int>(batch.size());
  Matrix X(B, kStateWidth);
  for (int i = 0; i < B; ++i)
    std::copy(batch[i].state.begin(), batch[i].state.end(), X.row(i));
  const ForwardCache cache = forward_batch(online, X);
  Matrix dq(B, kActionCount);
  double loss = 0.0;
  for (int i = 0; i < B; ++i) {
    const double diff = cache.head_out[0].at(i, batch[i].action) - targets[i];
    loss += diff * diff;
    dq.at(i, batch[i].action) = 2.0 * diff / B;
  }
  Gradients g = backward_batch(online, X, cache, {dq});
  g.loss = loss / B;
  if (!std::isfinite(g.loss))
    throw std::runtime_error("dql_gradients: non-finite loss");
  return g;
}

Gradients a2c_episode_gradients(const Network& net,
                                const std::vector<EpisodeStep>& steps,
                                double gamma, double entropy_coef) {
  const int B = static_cast<int>(steps.size());
  const std::vector<double> returns = discounted_returns(rewards_of(steps), gamma);
  const Matrix X = stack_states(steps);
  const ForwardCache cache = forward_batch(net, X);
  Matrix dlogits(B, kActionCount);
  Matrix dvalue(B, 1);
  std::vector<double> tmp(kActionCount);
  double loss = 0.0;
  for (int t = 0; t < B; ++t) {
    std::span<const double> logits(cache.head_out[0].row(t), kActionCount);
    const std::vector<double> p = masked_softmax(logits, steps[t].mask);
    const double v = cache.head_out[1].at(t, 0);
    const double advantage = returns[t] - v;
    a2c_logit_grad(p, steps[t].mask, steps[t].action, advantage, entropy_coef,
                   tmp.data());
    for (int i = 0; i < kActionCount; ++i) dlogits.at(t, i) = tmp[i] / B;
    dvalue.at(t, 0) = 2.0 * (v - returns[t]) / B;
    loss += (-std::log(p[steps[t].action]) * advantage -
             entropy_coef * masked_entropy(p, steps[t].mask) +
             (v - returns[t]) * (v - returns[t])) /
            B;
  }
  Gradients g = backward_batch(net, X, cache, {dlogits, dvalue});
  g.loss = loss;
  if (!std::isfinite(g.loss))
    throw std::runtime_error("a2c_episode_gradients: non-finite loss");
  return g;
}

Gradients ppo_actor_gradients(const Network& actor,
                              const std::vector<EpisodeStep>& steps,
                              const std::vector<double>& advantages,
                              double beta, int* excluded) {
  const int B = static_cast<int>(steps.size());
  const Matrix X = stack_states(steps);
  const ForwardCache cache = forward_batch(actor, X);
  int included = 0;
  for (int t = 0; t < B; ++t)
    if (steps[t].old_dist[steps[t].action] > 0.0) ++included;
  if (excluded) *excluded += B - included;
  Matrix dlogits(B, kActionCount);
  std::vector<double> tmp(kActionCount);
  double loss = 0.0;
  for (int t = 0; t < B; ++t) {
    const double p_old_a = steps[t].old_dist[steps[t].action];
    if (p_old_a <= 0.0) continue;
    std::span<const double> logits(cache.head_out[0].row(t), kActionCount);
    const std::vector<double> p_new = masked_softmax(logits, steps[t].mask);
    ppo_logit_grad(p_new, steps[t].old_dist, steps[t].mask, steps[t].action,
                   advantages[t], beta, tmp.data());
    for (int i = 0; i < kActionCount; ++i)
      dlogits.at(t, i) = tmp[i] / included;
    loss += (-advantages[t] * p_new[steps[t].action] / p_old_a +
             beta * masked_kl(steps[t].old_dist, p_new, steps[t].mask)) /
            included;
  }
  Gradients g = backward_batch(actor, X, cache, {dlogits});
  g.loss = loss;
  if (!std::isfinite(g.loss))
    throw std::runtime_error("ppo_actor_gradients: non-finite loss");
  return g;
}

Gradients value_gradients(const Network& critic,
                          const std::vector<EpisodeStep>& steps,
                          const std::vector<double>& targets) {
  const int B = static_cast<int>(steps.size());
  const Matrix X = stack_states(steps);
  const ForwardCache cache = forward_batch(critic, X);
  Matrix dv(B, 1);
  double loss = 0.0;
  for (int t = 0; t < B; ++t) {
    const double diff = cache.head_out[0].at(t, 0) - targets[t];
    loss += diff * diff / B;
    dv.at(t, 0) = 2.0 * diff / B;
  }
  Gradients g = backward_batch(critic, X, cache, {dv});
  g.loss = loss;
  return g;
}

// ---- agents ----

namespace {

class RandomAgent final : public Agent {
 public:
  explicit RandomAgent(const AgentConfig& cfg) : cfg_(cfg) {}

  std::string kind() const override { return "random"; }

  ActChoice act(const StateVec&, const MaskVector& mask, Rng& rng) override {
    const int allowed = mask_cardinality(mask);
    return {masked_uniform(mask, rng), 1.0 / allowed, allowed};
  }

  std::unique_ptr<Agent> clone() const override {
    return std::make_unique<RandomAgent>(*this);
  }

  void save(const std::string& path) const override {
    nlohmann::json j{{"format_version", 1},
                     {"agent_kind", "random"},
                     {"config", agent_config_to_json(cfg_)}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save: cannot write " + path);
    out << j.dump() << '\n';
  }

 private:
  AgentConfig cfg_;
};

class DqlAgent final : public Agent {
 public:
  explicit DqlAgent(const AgentConfig& cfg)
      : cfg_(cfg), epsilon_(cfg.epsilon), rng_(split_seed(cfg.seed, 0xD01)) {
    epsilon_.reset();
    Rng init(split_seed(cfg.seed, 0xD00));
    online_ = make_network(kStateWidth, cfg.hidden, cfg.activation,
                           {kActionCount}, init);
    target_ = online_;
    opt_.reset(online_, cfg.effective_learning_rate());
  }

  std::string kind() const override { return "dql"; }

  ActChoice act(const StateVec& state, const MaskVector& mask,
                Rng& rng) override {
    const std::vector<double> q = forward(online_, state)[0];
    const int action = learning_
                           ? epsilon_greedy(q, mask, epsilon_.value, rng)
                           : masked_argmax(q, mask);
    const std::vector<double> p = masked_softmax(q, mask);
    return {action, p[action], mask_cardinality(mask)};
  }

  std::vector<double> action_outputs(const StateVec& state) const override {
    return forward(online_, state)[0];
  }

  void record(const Experience& e) override {
    if (!learning_) return;
    if (static_cast<int>(buffer_.size()) < cfg_.replay_capacity) {
      buffer_.push_back(e);
    } else {
      buffer_[write_pos_ % buffer_.size()] = e;
    }
    ++write_pos_;
  }

  void train_step() override {
    if (!learning_) return;
    if (write_pos_ == 0 || write_pos_ % cfg_.update_every != 0) return;
    if (static_cast<int>(buffer_.size()) < cfg_.batch_size) return;

    // uniform sample without replacement (partial Fisher-Yates)
    std::vector<size_t> idx(buffer_.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::vector<Experience> batch;
    batch.reserve(cfg_.batch_size);
    for (int k = 0; k < cfg_.batch_size; ++k) {
      const size_t j = k + rng_.uniform_int(idx.size() - k);
      std::swap(idx[k], idx[j]);
      batch.push_back(buffer_[idx[k]]);
    }

    const std::vector<double> y = dql_targets(online_, target_, batch,
                                              cfg_.gamma);
    const Gradients g = dql_gradients(online_, batch, y);
    adam_step(online_, opt_, g);
    ++updates_;
    if (updates_ % cfg_.target_sync == 0) target_ = online_;
    epsilon_.step();
  }

  std::unique_ptr<Agent> clone() const override {
    auto copy = std::make_unique<DqlAgent>(*this);
    copy->buffer_.clear();
    copy->write_pos_ = 0;
    return copy;
  }

  void save(const std::string& path) const override {
    nlohmann::json j{{"format_version", 1},
                     {"agent_kind", "dql"},
                     {"config", agent_config_to_json(cfg_)},
                     {"networks", {{"online", network_to_json(online_, "dql")}}},
                     {"state",
                      {{"epsilon_value", epsilon_.value},
                       {"updates", updates_}}}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save: cannot write " + path);
    out << j.dump() << '\n';
  }

  void restore(const nlohmann::json& j) {
    online_ = network_from_json(j.at("networks").at("online"));
    target_ = online_;
    opt_.reset(online_, cfg_.effective_learning_rate());
    epsilon_.value = j.at("state").value("epsilon_value", epsilon_.value);
    updates_ = j.at("state").value("updates", int64_t{0});
  }

  uint64_t weights_hash() const override {
    return weights_digest(online_) ^ (weights_digest(target_) << 1);
  }

  nlohmann::json debug_state() const override {
    return {{"epsilon", epsilon_.value},
            {"updates", updates_},
            {"buffer_size", buffer_.size()},
            {"online_digest", weights_digest(online_)},
            {"target_digest", weights_digest(target_)}};
  }

 private:
  AgentConfig cfg_;
  EpsilonSchedule epsilon_;
  Rng rng_;
  Network online_;
  Network target_;
  AdamState opt_;
  std::vector<Experience> buffer_;
  uint64_t write_pos_ = 0;
  int64_t updates_ = 0;
};

// Shared behavior of the two policy-head learners: epsilon-mixed sampling
// from the masked softmax while training, sampling (or forced argmax) while
// frozen.
int policy_pick(const std::vector<double>& logits,
                const std::vector<double>& p, const MaskVector& mask,
                bool learning, const EpsilonSchedule& eps, bool eval_greedy,
                Rng& rng) {
  if (learning) {
    if (rng.uniform_double() <= eps.value && eps.value > 0.0)
      return masked_uniform(mask, rng);
    return sample_masked(p, mask, rng);
  }
  if (eval_greedy) {
    return masked_argmax(logits, mask);
  }
  return sample_masked(p, mask, rng);
}

class A2cAgent final : public Agent {
 public:
  explicit A2cAgent(const AgentConfig& cfg)
      : cfg_(cfg), epsilon_(cfg.epsilon) {
    epsilon_.reset();
    Rng init(split_seed(cfg.seed, 0xA2C));
    net_ = make_network(kStateWidth, cfg.hidden, cfg.activation,
                        {kActionCount, 1}, init);
    opt_.reset(net_, cfg.effective_learning_rate());
  }

  std::string kind() const override { return "a2c"; }

  ActChoice act(const StateVec& state, const MaskVector& mask,
                Rng& rng) override {
    const std::vector<double> logits = forward(net_, state)[0];
    const std::vector<double> p = masked_softmax(logits, mask);
    const int action = policy_pick(logits, p, mask, learning_, epsilon_,
                                   cfg_.eval_greedy, rng);
    last_mask_ = mask;
    return {action, p[action], mask_cardinality(mask)};
  }

  std::vector<double> action_outputs(const StateVec& state) const override {
    return forward(net_, state)[0];
  }

  void record(const Experience& e) override {
    if (!learning_) return;
    episode_.push_back({e.state, e.action, e.reward, last_mask_, {}});
  }

  void end_of_match(const std::vector<int>&) override {
    if (!learning_ || episode_.empty()) {
      episode_.clear();
      return;
    }
    const Gradients g =
        a2c_episode_gradients(net_, episode_, cfg_.gamma, cfg_.entropy_coef);
    adam_step(net_, opt_, g);
    epsilon_.step();
    episode_.clear();
  }

  std::unique_ptr<Agent> clone() const override {
    auto copy = std::make_unique<A2cAgent>(*this);
    copy->episode_.clear();
    return copy;
  }

  void save(const std::string& path) const override {
    nlohmann::json j{{"format_version", 1},
                     {"agent_kind", "a2c"},
                     {"config", agent_config_to_json(cfg_)},
                     {"networks", {{"net", network_to_json(net_, "a2c")}}},
                     {"state", {{"epsilon_value", epsilon_.value}}}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save: cannot write " + path);
    out << j.dump() << '\n';
  }

  void restore(const nlohmann::json& j) {
    net_ = network_from_json(j.at("networks").at("net"));
    opt_.reset(net_, cfg_.effective_learning_rate());
    epsilon_.value = j.at("state").value("epsilon_value", epsilon_.value);
  }

  uint64_t weights_hash() const override { return weights_digest(net_); }

  nlohmann::json debug_state() const override {
    return {{"epsilon", epsilon_.value}};
  }

 private:
  AgentConfig cfg_;
  EpsilonSchedule epsilon_;
  Network net_;
  AdamState opt_;
  std::vector<EpisodeStep> episode_;
  MaskVector last_mask_{};
};

class PpoAgent final : public Agent {
 public:
  explicit PpoAgent(const AgentConfig& cfg)
      : cfg_(cfg), epsilon_(cfg.epsilon), beta_(cfg.beta_init) {
    epsilon_.reset();
    Rng init_actor(split_seed(cfg.seed, 0x990));
    Rng init_critic(split_seed(cfg.seed, 0x991));
    actor_ = make_network(kStateWidth, cfg.hidden, cfg.activation,
                          {kActionCount}, init_actor);
    critic_ = make_network(kStateWidth, cfg.hidden, cfg.activation, {1},
                           init_critic);
    actor_opt_.reset(actor_, cfg.effective_learning_rate());
    critic_opt_.reset(critic_, cfg.effective_learning_rate());
  }

  std::string kind() const override { return "ppo"; }

  ActChoice act(const StateVec& state, const MaskVector& mask,
                Rng& rng) override {
    const std::vector<double> logits = forward(actor_, state)[0];
    const std::vector<double> p = masked_softmax(logits, mask);
    const int action = policy_pick(logits, p, mask, learning_, epsilon_,
                                   cfg_.eval_greedy, rng);
    last_mask_ = mask;
    last_dist_ = p;
    return {action, p[action], mask_cardinality(mask)};
  }

  std::vector<double> action_outputs(const StateVec& state) const override {
    return forward(actor_, state)[0];
  }

  void record(const Experience& e) override {
    if (!learning_) return;
    rollout_.push_back({e.state, e.action, e.reward, last_mask_, last_dist_});
  }

  void end_of_match(const std::vector<int>&) override {
    rollout_complete_ = true;
    train_step();
  }

  // No-op until end_of_match marks the rollout as one completed match.
  void train_step() override {
    if (!rollout_complete_) return;
    rollout_complete_ = false;
    if (!learning_ || rollout_.empty()) {
      rollout_.clear();
      return;
    }
    const std::vector<double> returns =
        discounted_returns(rewards_of(rollout_), cfg_.gamma);
    const Matrix X = stack_states(rollout_);
    const ForwardCache vc = forward_batch(critic_, X);
    std::vector<double> advantages(rollout_.size());
    for (size_t t = 0; t < rollout_.size(); ++t)
      advantages[t] = returns[t] - vc.head_out[0].at(static_cast<int>(t), 0);

    for (int epoch = 0; epoch < cfg_.ppo_epochs; ++epoch) {
      const Gradients ga = ppo_actor_gradients(actor_, rollout_, advantages,
                                               beta_, &excluded_samples_);
      adam_step(actor_, actor_opt_, ga);
      const Gradients gc = value_gradients(critic_, rollout_, returns);
      adam_step(critic_, critic_opt_, gc);
    }

    // post-update divergence drives the adaptive penalty
    const ForwardCache ac = forward_batch(actor_, X);
    double kl = 0.0;
    for (size_t t = 0; t < rollout_.size(); ++t) {
      std::span<const double> logits(ac.head_out[0].row(static_cast<int>(t)),
                                     kActionCount);
      kl += masked_kl(rollout_[t].old_dist,
                      masked_softmax(logits, rollout_[t].mask),
                      rollout_[t].mask);
    }
    kl /= static_cast<double>(rollout_.size());
    // clamp keeps beta inside (0, inf) against float under/overflow after
    // long runs of one-sided adjustments
    beta_ = std::clamp(adapt_kl_beta(beta_, kl, cfg_.kl_target), 1e-12, 1e12);
    epsilon_.step();
    rollout_.clear();
  }

  std::unique_ptr<Agent> clone() const override {
    auto copy = std::make_unique<PpoAgent>(*this);
    copy->rollout_.clear();
    return copy;
  }

  void save(const std::string& path) const override {
    nlohmann::json j{{"format_version", 1},
                     {"agent_kind", "ppo"},
                     {"config", agent_config_to_json(cfg_)},
                     {"networks",
                      {{"actor", network_to_json(actor_, "ppo")},
                       {"critic", network_to_json(critic_, "ppo")}}},
                     {"state",
                      {{"epsilon_value", epsilon_.value}, {"beta", beta_}}}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save: cannot write " + path);
    out << j.dump() << '\n';
  }

  void restore(const nlohmann::json& j) {
    actor_ = network_from_json(j.at("networks").at("actor"));
    critic_ = network_from_json(j.at("networks").at("critic"));
    actor_opt_.reset(actor_, cfg_.effective_learning_rate());
    critic_opt_.reset(critic_, cfg_.effective_learning_rate());
    epsilon_.value = j.at("state").value("epsilon_value", epsilon_.value);
    beta_ = j.at("state").value("beta", beta_);
  }

  uint64_t weights_hash() const override {
    return weights_digest(actor_) ^ (weights_digest(critic_) << 1);
  }

  nlohmann::json debug_state() const override {
    return {{"epsilon", epsilon_.value},
            {"beta", beta_},
            {"excluded_samples", excluded_samples_}};
  }

 private:
  AgentConfig cfg_;
  EpsilonSchedule epsilon_;
  double beta_;
  Network actor_;
  Network critic_;
  AdamState actor_opt_;
  AdamState critic_opt_;
  std::vector<EpisodeStep> rollout_;
  bool rollout_complete_ = false;
  MaskVector last_mask_{};
  std::vector<double> last_dist_;
  int excluded_samples_ = 0;
};

}  // namespace

std::unique_ptr<Agent> make_agent(const AgentConfig& cfg) {
  if (cfg.kind == "random") return std::make_unique<RandomAgent>(cfg);
  if (cfg.kind == "dql") return std::make_unique<DqlAgent>(cfg);
  if (cfg.kind == "a2c") return std::make_unique<A2cAgent>(cfg);
  if (cfg.kind == "ppo") return std::make_unique<PpoAgent>(cfg);
  throw std::invalid_argument("make_agent: unknown agent kind " + cfg.kind);
}

std::unique_ptr<Agent> load_agent(const std::string& path,
                                  std::optional<uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_agent: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("load_agent: corrupt file " + path + ": " +
                             e.what());
  }
  if (j.at("format_version").get<int>() != 1)
    throw std::runtime_error("load_agent: unsupported format version");
  AgentConfig cfg = agent_config_from_json(j.at("config"));
  cfg.kind = j.at("agent_kind").get<std::string>();
  if (seed_override) cfg.seed = *seed_override;
  std::unique_ptr<Agent> agent = make_agent(cfg);
  if (cfg.kind == "dql")
    static_cast<DqlAgent*>(agent.get())->restore(j);
  else if (cfg.kind == "a2c")
    static_cast<A2cAgent*>(agent.get())->restore(j);
  else if (cfg.kind == "ppo")
    static_cast<PpoAgent*>(agent.get())->restore(j);
  return agent;
}

}  // namespace chefshat
