#include "chefshat/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace chefshat {

namespace {

double apply_act(Activation a, double x) {
  switch (a) {
    case Activation::Relu: return x > 0.0 ? x : 0.0;
    case Activation::Tanh: return std::tanh(x);
    case Activation::Linear: return x;
  }
  return x;
}

double act_grad(Activation a, double pre) {
  switch (a) {
    case Activation::Relu: return pre > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: {
      const double t = std::tanh(pre);
      return 1.0 - t * t;
    }
    case Activation::Linear: return 1.0;
  }
  return 1.0;
}

// Y = X * W^T + b, then activation. X: B x in, W: out x in, Y: B x out.
void dense_forward(const DenseLayer& layer, const Matrix& X, Matrix& pre,
                   Matrix& out) {
  const int B = X.rows;
  const int in = layer.in_width();
  const int n_out = layer.out_width();
  pre = Matrix(B, n_out);
  for (int b = 0; b < B; ++b) {
    const double* x = X.row(b);
    double* p = pre.row(b);
    for (int o = 0; o < n_out; ++o) {
      const double* w = layer.w.row(o);
      double acc = layer.b[o];
      for (int i = 0; i < in; ++i) acc += w[i] * x[i];
      p[o] = acc;
    }
  }
  out = pre;
  if (layer.act != Activation::Linear) {
    for (double& v : out.data) v = apply_act(layer.act, v);
  }
}

// Given dLoss/d(out), accumulates dW, db and returns dLoss/d(in).
Matrix dense_backward(const DenseLayer& layer, const Matrix& X,
                      const Matrix& pre, Matrix& d_out, Matrix& dw,
                      std::vector<double>& db) {
  const int B = X.rows;
  const int in = layer.in_width();
  const int n_out = layer.out_width();
  if (layer.act != Activation::Linear) {
    for (int b = 0; b < B; ++b) {
      double* g = d_out.row(b);
      const double* p = pre.row(b);
      for (int o = 0; o < n_out; ++o) g[o] *= act_grad(layer.act, p[o]);
    }
  }
  dw = Matrix(n_out, in);
  db.assign(n_out, 0.0);
  for (int b = 0; b < B; ++b) {
    const double* g = d_out.row(b);
    const double* x = X.row(b);
    for (int o = 0; o < n_out; ++o) {
      const double go = g[o];
      if (go == 0.0) continue;
      db[o] += go;
      double* w = dw.row(o);
      for (int i = 0; i < in; ++i) w[i] += go * x[i];
    }
  }
  Matrix dx(B, in);
  for (int b = 0; b < B; ++b) {
    const double* g = d_out.row(b);
    double* out = dx.row(b);
    for (int o = 0; o < n_out; ++o) {
      const double go = g[o];
      if (go == 0.0) continue;
      const double* w = layer.w.row(o);
      for (int i = 0; i < in; ++i) out[i] += go * w[i];
    }
  }
  return dx;
}

void adam_update(std::span<double> param, std::span<const double> grad,
                 std::span<double> m, std::span<double> v, double lr,
                 double b1, double b2, double eps, double bc1, double bc2) {
  for (size_t i = 0; i < param.size(); ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
    v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
    const double mh = m[i] / bc1;
    const double vh = v[i] / bc2;
    param[i] -= lr * mh / (std::sqrt(vh) + eps);
  }
}

nlohmann::json layer_meta(const DenseLayer& l) {
  return {{"in", l.in_width()},
          {"out", l.out_width()},
          {"activation", activation_name(l.act)}};
}

DenseLayer layer_from_meta(const nlohmann::json& j) {
  DenseLayer l;
  l.w = Matrix(j.at("out").get<int>(), j.at("in").get<int>());
  l.b.assign(j.at("out").get<int>(), 0.0);
  l.act = activation_from_name(j.at("activation").get<std::string>());
  return l;
}

}  // namespace

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Linear: return "linear";
  }
  return "linear";
}

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "linear") return Activation::Linear;
  throw std::invalid_argument("unknown activation: " + name);
}

size_t Network::param_count() const {
  size_t n = 0;
  for (const auto& l : trunk) n += l.w.data.size() + l.b.size();
  for (const auto& l : heads) n += l.w.data.size() + l.b.size();
  return n;
}

Network make_network(int input_width, const std::vector<int>& hidden,
                     Activation hidden_act,
                     const std::vector<int>& head_widths, Rng& rng) {
  if (head_widths.empty())
    throw std::invalid_argument("make_network: at least one head required");
  Network net;
  net.input_width = input_width;
  auto init_layer = [&](int in, int out, Activation act) {
    DenseLayer l;
    l.w = Matrix(out, in);
    l.b.assign(out, 0.0);
    l.act = act;
    const double scale = act == Activation::Relu ? std::sqrt(2.0 / in)
                                                 : std::sqrt(1.0 / in);
    for (double& w : l.w.data) w = rng.gaussian() * scale;
    return l;
  };
  int width = input_width;
  for (int h : hidden) {
    net.trunk.push_back(init_layer(width, h, hidden_act));
    width = h;
  }
  for (int hw : head_widths)
    net.heads.push_back(init_layer(width, hw, Activation::Linear));
  return net;
}

ForwardCache forward_batch(const Network& net, const Matrix& X) {
  if (X.cols != net.input_width)
    throw std::invalid_argument("forward: input width mismatch");
  ForwardCache cache;
  cache.trunk_pre.resize(net.trunk.size());
  cache.trunk_out.resize(net.trunk.size());
  const Matrix* cur = &X;
  for (size_t i = 0; i < net.trunk.size(); ++i) {
    dense_forward(net.trunk[i], *cur, cache.trunk_pre[i], cache.trunk_out[i]);
    cur = &cache.trunk_out[i];
  }
  cache.head_pre.resize(net.heads.size());
  cache.head_out.resize(net.heads.size());
  for (size_t h = 0; h < net.heads.size(); ++h) {
    dense_forward(net.heads[h], *cur, cache.head_pre[h], cache.head_out[h]);
  }
  return cache;
}

std::vector<std::vector<double>> forward(const Network& net,
                                         std::span<const double> x) {
  Matrix X(1, static_cast<int>(x.size()));
  std::copy(x.begin(), x.end(), X.data.begin());
  ForwardCache cache = forward_batch(net, X);
  std::vector<std::vector<double>> out;
  out.reserve(net.heads.size());
  for (const Matrix& h : cache.head_out) out.push_back(h.data);
  return out;
}

Gradients backward_batch(const Network& net, const Matrix& X,
                         const ForwardCache& cache,
                         const std::vector<Matrix>& head_out_grads) {
  if (head_out_grads.size() != net.heads.size())
    throw std::invalid_argument("backward: one gradient block per head");
  Gradients g;
  g.head_dw.resize(net.heads.size());
  g.head_db.resize(net.heads.size());
  const Matrix& trunk_out =
      net.trunk.empty() ? X : cache.trunk_out.back();
  Matrix d_trunk(trunk_out.rows, trunk_out.cols);
  for (size_t h = 0; h < net.heads.size(); ++h) {
    Matrix d_head = head_out_grads[h];
    Matrix dx = dense_backward(net.heads[h], trunk_out, cache.head_pre[h],
                               d_head, g.head_dw[h], g.head_db[h]);
    for (size_t i = 0; i < d_trunk.data.size(); ++i)
      d_trunk.data[i] += dx.data[i];
  }
  g.trunk_dw.resize(net.trunk.size());
  g.trunk_db.resize(net.trunk.size());
  for (int i = static_cast<int>(net.trunk.size()) - 1; i >= 0; --i) {
    const Matrix& in = i == 0 ? X : cache.trunk_out[i - 1];
    d_trunk = dense_backward(net.trunk[i], in, cache.trunk_pre[i], d_trunk,
                             g.trunk_dw[i], g.trunk_db[i]);
  }
  return g;
}

void AdamState::reset(const Network& net, double learning_rate) {
  lr = learning_rate;
  step = 0;
  m_w.clear();
  v_w.clear();
  m_b.clear();
  v_b.clear();
  auto add = [&](const DenseLayer& l) {
    m_w.emplace_back(l.out_width(), l.in_width());
    v_w.emplace_back(l.out_width(), l.in_width());
    m_b.emplace_back(l.b.size(), 0.0);
    v_b.emplace_back(l.b.size(), 0.0);
  };
  for (const auto& l : net.trunk) add(l);
  for (const auto& l : net.heads) add(l);
}

void adam_step(Network& net, AdamState& opt, const Gradients& g) {
  ++opt.step;
  const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
  const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
  size_t slot = 0;
  auto update = [&](DenseLayer& l, const Matrix& dw,
                    const std::vector<double>& db) {
    adam_update(l.w.data, dw.data, opt.m_w[slot].data, opt.v_w[slot].data,
                opt.lr, opt.beta1, opt.beta2, opt.eps, bc1, bc2);
    adam_update(l.b, db, opt.m_b[slot], opt.v_b[slot], opt.lr, opt.beta1,
                opt.beta2, opt.eps, bc1, bc2);
    ++slot;
  };
  for (size_t i = 0; i < net.trunk.size(); ++i)
    update(net.trunk[i], g.trunk_dw[i], g.trunk_db[i]);
  for (size_t i = 0; i < net.heads.size(); ++i)
    update(net.heads[i], g.head_dw[i], g.head_db[i]);
}

std::vector<double> masked_softmax(std::span<const double> logits,
                                   const MaskVector& mask) {
  if (logits.size() != kActionCount)
    throw std::invalid_argument("masked_softmax: expected 200 logits");
  double max_logit = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kActionCount; ++i)
    if (mask[i] && logits[i] > max_logit) max_logit = logits[i];
  if (max_logit == -std::numeric_limits<double>::infinity())
    throw std::invalid_argument("masked_softmax: all-zero mask");
  std::vector<double> p(kActionCount, 0.0);
  double sum = 0.0;
  for (int i = 0; i < kActionCount; ++i) {
    if (!mask[i]) continue;
    p[i] = std::exp(logits[i] - max_logit);
    sum += p[i];
  }
  for (int i = 0; i < kActionCount; ++i) p[i] /= sum;
  return p;
}

std::vector<double> flatten_params(const Network& net) {
  std::vector<double> flat;
  flat.reserve(net.param_count());
  auto add = [&](const DenseLayer& l) {
    flat.insert(flat.end(), l.w.data.begin(), l.w.data.end());
    flat.insert(flat.end(), l.b.begin(), l.b.end());
  };
  for (const auto& l : net.trunk) add(l);
  for (const auto& l : net.heads) add(l);
  return flat;
}

void unflatten_params(Network& net, std::span<const double> flat) {
  if (flat.size() != net.param_count())
    throw std::invalid_argument("unflatten_params: size mismatch");
  size_t pos = 0;
  auto fill = [&](DenseLayer& l) {
    std::copy(flat.begin() + pos, flat.begin() + pos + l.w.data.size(),
              l.w.data.begin());
    pos += l.w.data.size();
    std::copy(flat.begin() + pos, flat.begin() + pos + l.b.size(),
              l.b.begin());
    pos += l.b.size();
  };
  for (auto& l : net.trunk) fill(l);
  for (auto& l : net.heads) fill(l);
}

nlohmann::json network_to_json(const Network& net,
                               const std::string& agent_kind) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["agent_kind"] = agent_kind;
  j["input_width"] = net.input_width;
  j["trunk"] = nlohmann::json::array();
  for (const auto& l : net.trunk) j["trunk"].push_back(layer_meta(l));
  j["heads"] = nlohmann::json::array();
  for (const auto& l : net.heads) j["heads"].push_back(layer_meta(l));
  j["params"] = flatten_params(net);
  j["action_catalog_hash"] = catalog_hash();
  return j;
}

Network network_from_json(const nlohmann::json& j, std::string* agent_kind) {
  if (j.at("format_version").get<int>() != 1)
    throw std::runtime_error("network_from_json: unsupported format version");
  if (j.at("action_catalog_hash").get<std::string>() != catalog_hash())
    throw std::runtime_error("network_from_json: action catalog hash mismatch");
  Network net;
  net.input_width = j.at("input_width").get<int>();
  for (const auto& meta : j.at("trunk")) {
    net.trunk.push_back(layer_from_meta(meta));
    const int expect = net.trunk.size() == 1
                           ? net.input_width
                           : net.trunk[net.trunk.size() - 2].out_width();
    if (net.trunk.back().in_width() != expect)
      throw std::runtime_error(
          "network_from_json: trunk dimensions do not chain");
  }
  for (const auto& meta : j.at("heads")) {
    net.heads.push_back(layer_from_meta(meta));
    if (net.heads.back().in_width() != net.trunk_out_width())
      throw std::runtime_error("network_from_json: head width mismatch");
  }
  const auto& params = j.at("params");
  std::vector<double> flat;
  flat.reserve(params.size());
  for (const auto& v : params) flat.push_back(v.get<double>());
  unflatten_params(net, flat);
  for (double v : flat)
    if (!std::isfinite(v))
      throw std::runtime_error("network_from_json: non-finite parameter");
  if (agent_kind) *agent_kind = j.at("agent_kind").get<std::string>();
  return net;
}

void save_weights(const Network& net, const std::string& agent_kind,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_weights: cannot write " + path);
  out << network_to_json(net, agent_kind).dump() << '\n';
  if (!out) throw std::runtime_error("save_weights: write failed for " + path);
}

Network load_weights(const std::string& path, std::string* agent_kind) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_weights: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("load_weights: corrupt weight file " + path +
                             ": " + e.what());
  }
  try {
    return network_from_json(j, agent_kind);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("load_weights: malformed weight file " + path +
                             ": " + e.what());
  }
}

uint64_t weights_digest(const Network& net) {
  uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](double d) {
    uint64_t bits;
    std::memcpy(&bits, &d, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (i * 8)) & 0xFF;
      h *= 0x100000001B3ull;
    }
  };
  for (double v : flatten_params(net)) mix(v);
  return h;
}

}  // namespace chefshat
