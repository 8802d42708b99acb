#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chefshat/actions.hpp"
#include "chefshat/rng.hpp"

#include "json.hpp"

namespace chefshat {

enum class Activation : uint8_t { Relu, Tanh, Linear };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

// Row-major dense matrix of doubles. 64-bit arithmetic throughout: the
// gradient checks and transcript determinism outrank speed at desk scale.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c) {}

  double* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
  const double* row(int r) const {
    return data.data() + static_cast<size_t>(r) * cols;
  }
  double& at(int r, int c) { return row(r)[c]; }
  double at(int r, int c) const { return row(r)[c]; }
};

struct DenseLayer {
  Matrix w;  // out x in
  std::vector<double> b;
  Activation act = Activation::Linear;

  int in_width() const { return w.cols; }
  int out_width() const { return w.rows; }
};

// Dense network: a shared trunk followed by one or more output heads, each a
// single dense layer on the trunk output. One head models DQL's Q-values or
// PPO's separate actor/critic; two heads model the A2C double tail.
struct Network {
  int input_width = 0;
  std::vector<DenseLayer> trunk;
  std::vector<DenseLayer> heads;

  int trunk_out_width() const {
    return trunk.empty() ? input_width : trunk.back().out_width();
  }
  size_t param_count() const;
};

// He-style initialization for relu trunks, Xavier otherwise; biases zero.
Network make_network(int input_width, const std::vector<int>& hidden,
                     Activation hidden_act, const std::vector<int>& head_widths,
                     Rng& rng);

struct ForwardCache {
  std::vector<Matrix> trunk_pre;
  std::vector<Matrix> trunk_out;
  std::vector<Matrix> head_pre;
  std::vector<Matrix> head_out;
};

// Batched forward pass; X is batch x input_width.
ForwardCache forward_batch(const Network& net, const Matrix& X);

// Single-sample forward; returns one output vector per head.
std::vector<std::vector<double>> forward(const Network& net,
                                         std::span<const double> x);

// Reverse-mode gradients of a scalar loss given dLoss/d(head output) for
// every head (batch x head_width, zero rows for samples a head ignores).
struct Gradients {
  std::vector<Matrix> trunk_dw;
  std::vector<std::vector<double>> trunk_db;
  std::vector<Matrix> head_dw;
  std::vector<std::vector<double>> head_db;
  double loss = 0.0;
};

Gradients backward_batch(const Network& net, const Matrix& X,
                         const ForwardCache& cache,
                         const std::vector<Matrix>& head_out_grads);

// Adaptive-moment optimizer state; moment buffers mirror the parameters.
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t step = 0;
  std::vector<Matrix> m_w, v_w;
  std::vector<std::vector<double>> m_b, v_b;

  void reset(const Network& net, double learning_rate);
};

void adam_step(Network& net, AdamState& opt, const Gradients& g);

// Softmax restricted to allowed slots, max-subtraction stabilized. Masked
// slots are exactly zero; allowed probabilities sum to 1.
std::vector<double> masked_softmax(std::span<const double> logits,
                                   const MaskVector& mask);

// Flat parameter vector in serialization order (trunk then heads, each
// weights row-major then bias). Used by the weight files and the
// finite-difference tests.
std::vector<double> flatten_params(const Network& net);
void unflatten_params(Network& net, std::span<const double> flat);

// Versioned JSON weight schema tagged with the agent kind and the action
// catalog hash; loading rejects shape, version or catalog mismatches. The
// json forms are embedded in composite agent snapshot files.
nlohmann::json network_to_json(const Network& net,
                               const std::string& agent_kind);
Network network_from_json(const nlohmann::json& j,
                          std::string* agent_kind = nullptr);
void save_weights(const Network& net, const std::string& agent_kind,
                  const std::string& path);
Network load_weights(const std::string& path,
                     std::string* agent_kind = nullptr);

// Order-sensitive digest of all parameter bit patterns.
uint64_t weights_digest(const Network& net);

}  // namespace chefshat
