#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "chefshat/net.hpp"

using namespace chefshat;

namespace {

// Independent forward oracle: per-neuron triple loop, no Matrix machinery.
std::vector<std::vector<double>> naive_forward(const Network& net,
                                               const std::vector<double>& x) {
  std::vector<double> cur = x;
  for (const DenseLayer& l : net.trunk) {
    std::vector<double> next(l.out_width());
    for (int o = 0; o < l.out_width(); ++o) {
      double z = l.b[o];
      for (int i = 0; i < l.in_width(); ++i) z += l.w.at(o, i) * cur[i];
      if (l.act == Activation::Relu) z = z > 0 ? z : 0;
      if (l.act == Activation::Tanh) z = std::tanh(z);
      next[o] = z;
    }
    cur = next;
  }
  std::vector<std::vector<double>> heads;
  for (const DenseLayer& l : net.heads) {
    std::vector<double> out(l.out_width());
    for (int o = 0; o < l.out_width(); ++o) {
      double z = l.b[o];
      for (int i = 0; i < l.in_width(); ++i) z += l.w.at(o, i) * cur[i];
      out[o] = z;
    }
    heads.push_back(out);
  }
  return heads;
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1e-6, std::abs(a), std::abs(b)});
}

// Squared-error toy loss against fixed targets, mean over the batch.
struct ToyLoss {
  std::vector<Matrix> targets;  // per head, batch x width

  double value(const Network& net, const Matrix& X) const {
    const ForwardCache c = forward_batch(net, X);
    double loss = 0.0;
    for (size_t h = 0; h < c.head_out.size(); ++h)
      for (size_t i = 0; i < c.head_out[h].data.size(); ++i) {
        const double d = c.head_out[h].data[i] - targets[h].data[i];
        loss += d * d;
      }
    return loss / X.rows;
  }

  Gradients grads(const Network& net, const Matrix& X) const {
    const ForwardCache c = forward_batch(net, X);
    std::vector<Matrix> gout;
    for (size_t h = 0; h < c.head_out.size(); ++h) {
      Matrix g(c.head_out[h].rows, c.head_out[h].cols);
      for (size_t i = 0; i < g.data.size(); ++i)
        g.data[i] =
            2.0 * (c.head_out[h].data[i] - targets[h].data[i]) / X.rows;
      gout.push_back(std::move(g));
    }
    return backward_batch(net, X, c, gout);
  }
};

std::vector<double> flatten_grads(const Network& net, const Gradients& g) {
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

}  // namespace

TEST_CASE("forward: degenerate cases") {
  Rng rng(1);
  SUBCASE("zero weights and biases give zero output") {
    Network net = make_network(4, {3}, Activation::Relu, {2}, rng);
    for (auto& l : net.trunk) std::fill(l.w.data.begin(), l.w.data.end(), 0.0);
    for (auto& l : net.heads) std::fill(l.w.data.begin(), l.w.data.end(), 0.0);
    const auto out = forward(net, std::vector<double>{1, 2, 3, 4});
    for (double v : out[0]) CHECK(v == 0.0);
  }
  SUBCASE("identity single layer passes the input through") {
    Network net = make_network(3, {}, Activation::Linear, {3}, rng);
    std::fill(net.heads[0].w.data.begin(), net.heads[0].w.data.end(), 0.0);
    for (int i = 0; i < 3; ++i) net.heads[0].w.at(i, i) = 1.0;
    const auto out = forward(net, std::vector<double>{0.5, -1.25, 3.0});
    CHECK(out[0] == std::vector<double>{0.5, -1.25, 3.0});
  }
  SUBCASE("dimension mismatch is rejected") {
    Network net = make_network(4, {3}, Activation::Relu, {2}, rng);
    CHECK_THROWS(forward(net, std::vector<double>{1, 2, 3}));
  }
}

TEST_CASE("forward matches an independently coded per-neuron oracle") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const int in = 2 + static_cast<int>(rng.uniform_int(6));
    const auto act = trial % 2 ? Activation::Relu : Activation::Tanh;
    Network net = make_network(
        in, {3 + static_cast<int>(rng.uniform_int(5)), 4}, act, {5, 1}, rng);
    std::vector<double> x(in);
    for (double& v : x) v = rng.uniform_double() * 2 - 1;
    const auto got = forward(net, x);
    const auto want = naive_forward(net, x);
    REQUIRE(got.size() == want.size());
    for (size_t h = 0; h < got.size(); ++h)
      for (size_t i = 0; i < got[h].size(); ++i)
        CHECK(rel_err(got[h][i], want[h][i]) < 1e-12);
  }
}

TEST_CASE("forward is pure: identical inputs, bit-identical outputs") {
  Rng rng(7);
  Network net = make_network(28, {16, 16}, Activation::Tanh, {200}, rng);
  std::vector<double> x(28);
  for (double& v : x) v = rng.uniform_double();
  const auto a = forward(net, x);
  const auto b = forward(net, x);
  CHECK(a == b);
}

TEST_CASE("backward: exact reverse-mode gradients") {
  Rng rng(1234);

  SUBCASE("constant loss has zero gradients") {
    Network net = make_network(5, {4}, Activation::Tanh, {3}, rng);
    Matrix X(2, 5);
    for (double& v : X.data) v = rng.uniform_double();
    const ForwardCache c = forward_batch(net, X);
    std::vector<Matrix> gout;
    gout.emplace_back(2, 3);  // dL/dout identically 0
    const Gradients g = backward_batch(net, X, c, gout);
    for (double v : flatten_grads(net, g)) CHECK(v == 0.0);
  }

  SUBCASE("central finite differences agree to 1e-4 relative") {
    for (int trial = 0; trial < 4; ++trial) {
      Network net = make_network(6, {8, 5}, Activation::Tanh, {4, 1}, rng);
      Matrix X(3, 6);
      for (double& v : X.data) v = rng.uniform_double() * 2 - 1;
      ToyLoss loss;
      loss.targets.emplace_back(3, 4);
      loss.targets.emplace_back(3, 1);
      for (auto& t : loss.targets)
        for (double& v : t.data) v = rng.uniform_double();

      const std::vector<double> analytic =
          flatten_grads(net, loss.grads(net, X));
      std::vector<double> params = flatten_params(net);
      REQUIRE(analytic.size() == params.size());
      const double h = 1e-5;
      for (size_t probe = 0; probe < params.size();
           probe += 1 + params.size() / 120) {
        const double orig = params[probe];
        params[probe] = orig + h;
        unflatten_params(net, params);
        const double up = loss.value(net, X);
        params[probe] = orig - h;
        unflatten_params(net, params);
        const double down = loss.value(net, X);
        params[probe] = orig;
        unflatten_params(net, params);
        const double fd = (up - down) / (2 * h);
        CHECK(rel_err(fd, analytic[probe]) < 1e-4);
      }
    }
  }

  SUBCASE("duplicating the batch leaves mean-reduced gradients unchanged") {
    Network net = make_network(4, {6}, Activation::Tanh, {2}, rng);
    Matrix X(2, 4), X2(4, 4);
    for (double& v : X.data) v = rng.uniform_double();
    std::copy(X.data.begin(), X.data.end(), X2.data.begin());
    std::copy(X.data.begin(), X.data.end(), X2.data.begin() + X.data.size());
    ToyLoss l1, l2;
    l1.targets.emplace_back(2, 2);
    l2.targets.emplace_back(4, 2);
    for (size_t i = 0; i < l1.targets[0].data.size(); ++i) {
      const double t = 0.25 * static_cast<double>(i);
      l1.targets[0].data[i] = t;
      l2.targets[0].data[i + l1.targets[0].data.size()] = t;
      l2.targets[0].data[i] = t;
    }
    const auto g1 = flatten_grads(net, l1.grads(net, X));
    const auto g2 = flatten_grads(net, l2.grads(net, X2));
    for (size_t i = 0; i < g1.size(); ++i)
      CHECK(rel_err(g1[i], g2[i]) < 1e-12);
  }
}

TEST_CASE("adaptive-moment updates") {
  Rng rng(5);
  SUBCASE("zero gradient leaves parameters unchanged") {
    Network net = make_network(3, {4}, Activation::Relu, {2}, rng);
    const auto before = flatten_params(net);
    AdamState opt;
    opt.reset(net, 1e-3);
    Gradients g;
    g.trunk_dw.emplace_back(4, 3);
    g.trunk_db.emplace_back(4, 0.0);
    g.head_dw.emplace_back(2, 4);
    g.head_db.emplace_back(2, 0.0);
    adam_step(net, opt, g);
    CHECK(flatten_params(net) == before);
    CHECK(opt.step == 1);
  }

  SUBCASE("first step moves every coordinate by about the learning rate") {
    Network net = make_network(3, {4}, Activation::Relu, {2}, rng);
    const auto before = flatten_params(net);
    AdamState opt;
    opt.reset(net, 1e-3);
    Gradients g;
    g.trunk_dw.emplace_back(4, 3);
    g.trunk_db.emplace_back(4, 0.7);
    g.head_dw.emplace_back(2, 4);
    g.head_db.emplace_back(2, -0.2);
    for (double& v : g.trunk_dw[0].data) v = 0.3;
    for (double& v : g.head_dw[0].data) v = -1.4;
    adam_step(net, opt, g);
    const auto after = flatten_params(net);
    // first-step closed form: lr * g / (|g| + eps), i.e. +-lr up to eps
    for (size_t i = 0; i < after.size(); ++i)
      CHECK(std::abs(std::abs(after[i] - before[i]) - 1e-3) < 1e-6);
  }

  SUBCASE("repeated steps descend a convex quadratic") {
    // minimize (w x + b - 10)^2 at fixed input x = 1; the optimum sits many
    // step lengths away, so the first 100 updates descend strictly
    Network net = make_network(1, {}, Activation::Linear, {1}, rng);
    AdamState opt;
    opt.reset(net, 0.05);
    Matrix X(1, 1);
    X.data[0] = 1.0;
    ToyLoss loss;
    loss.targets.emplace_back(1, 1);
    loss.targets[0].data[0] = 10.0;
    double prev = loss.value(net, X);
    const double first = prev;
    for (int step = 0; step < 100; ++step) {
      adam_step(net, opt, loss.grads(net, X));
      const double cur = loss.value(net, X);
      CHECK(cur < prev);
      prev = cur;
    }
    CHECK(prev < first * 0.5);
  }
}

TEST_CASE("masked_softmax") {
  MaskVector mask{};
  mask[10] = mask[20] = 1;
  std::vector<double> logits(kActionCount, 0.0);

  SUBCASE("equal logits over two allowed slots give 0.5 each") {
    const auto p = masked_softmax(logits, mask);
    CHECK(p[10] == doctest::Approx(0.5));
    CHECK(p[20] == doctest::Approx(0.5));
    double sum = 0.0;
    for (int i = 0; i < kActionCount; ++i) {
      if (i != 10 && i != 20) CHECK(p[i] == 0.0);
      sum += p[i];
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }

  SUBCASE("shifting all logits by a constant changes nothing") {
    Rng rng(2);
    MaskVector m{};
    for (int k = 0; k < 12; ++k) m[rng.uniform_int(kActionCount)] = 1;
    for (double& v : logits) v = rng.uniform_double() * 6 - 3;
    const auto p1 = masked_softmax(logits, m);
    for (double& v : logits) v += 123.456;
    const auto p2 = masked_softmax(logits, m);
    for (int i = 0; i < kActionCount; ++i)
      CHECK(std::abs(p1[i] - p2[i]) < 1e-12);
  }

  SUBCASE("matches the naive exponentiation oracle") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      MaskVector m{};
      const int n = 1 + static_cast<int>(rng.uniform_int(30));
      for (int k = 0; k < n; ++k) m[rng.uniform_int(kActionCount)] = 1;
      for (double& v : logits) v = rng.uniform_double() * 10 - 5;
      const auto p = masked_softmax(logits, m);
      double denom = 0.0;
      for (int i = 0; i < kActionCount; ++i)
        if (m[i]) denom += std::exp(logits[i]);
      double sum = 0.0;
      for (int i = 0; i < kActionCount; ++i) {
        if (m[i]) {
          CHECK(rel_err(p[i], std::exp(logits[i]) / denom) < 1e-12);
        } else {
          CHECK(p[i] == 0.0);
        }
        sum += p[i];
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
  }

  SUBCASE("all-zero mask is a contract violation") {
    MaskVector none{};
    CHECK_THROWS_AS(masked_softmax(logits, none), std::invalid_argument);
  }
}

TEST_CASE("weight files round-trip bit-exactly") {
  Rng rng(99);
  Network net = make_network(28, {32, 16}, Activation::Relu, {200}, rng);
  const std::string path = "test_weights.json";
  save_weights(net, "dql", path);

  std::string kind;
  const Network loaded = load_weights(path, &kind);
  CHECK(kind == "dql");
  std::vector<double> x(28);
  for (double& v : x) v = rng.uniform_double();
  CHECK(forward(net, x) == forward(loaded, x));

  SUBCASE("truncated files are rejected outright") {
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    in.close();
    std::ofstream out(path);
    out << text.substr(0, text.size() / 2);
    out.close();
    CHECK_THROWS_AS(load_weights(path), std::runtime_error);
  }

  SUBCASE("catalog hash mismatches are rejected") {
    nlohmann::json j = network_to_json(net, "dql");
    j["action_catalog_hash"] = "0000000000000000";
    CHECK_THROWS_AS(network_from_json(j), std::runtime_error);
  }

  SUBCASE("missing files give a clear error") {
    CHECK_THROWS_AS(load_weights("no_such_file.json"), std::runtime_error);
  }
  std::remove(path.c_str());
}
