#pragma once

// Layer stacking, softmax cross-entropy head, momentum SGD and training.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ncn/dataset.hpp"
#include "ncn/error.hpp"
#include "ncn/kernel.hpp"
#include "ncn/layer.hpp"

namespace ncn {

using Topology = std::vector<std::size_t>;

inline void validate_topology(const Topology& topology) {
  if (topology.size() < 2) throw ConfigError("topology needs at least an input and an output size");
  for (std::size_t d : topology)
    if (d == 0) throw ConfigError("topology dimensions must be positive");
}

inline std::string topology_to_string(const Topology& t) {
  std::string s;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k) s += ',';
    s += std::to_string(t[k]);
  }
  return s;
}

/// Parses "2,4,2". Throws ConfigError on anything else.
inline Topology parse_topology(std::string_view text) {
  Topology t;
  for (auto cell : detail::split_commas(text)) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size())
      throw ConfigError("bad topology '" + std::string(text) + "'");
    t.push_back(v);
  }
  validate_topology(t);
  return t;
}

struct Network {
  std::vector<LayerParams> layers;
  ChannelSemantics semantics = ChannelSemantics::algorithm1;

  [[nodiscard]] Topology topology() const {
    Topology t;
    if (layers.empty()) return t;
    t.push_back(layers.front().in_dim());
    for (const auto& l : layers) t.push_back(l.out_dim());
    return t;
  }

  [[nodiscard]] std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
  [[nodiscard]] std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }

  void validate() const {
    if (layers.empty()) throw ShapeError("network has no layers");
    for (std::size_t k = 0; k < layers.size(); ++k) {
      layers[k].validate();
      if (k + 1 < layers.size() && layers[k].out_dim() != layers[k + 1].in_dim())
        throw ShapeError("layer " + std::to_string(k) + " output does not chain into layer " +
                         std::to_string(k + 1));
    }
  }

  friend bool operator==(const Network& a, const Network& b) {
    return a.semantics == b.semantics && a.layers == b.layers;
  }
};

/// Zero-parameter network with the given shape.
inline Network make_network(const Topology& topology,
                            ChannelSemantics semantics = ChannelSemantics::algorithm1) {
  validate_topology(topology);
  Network net;
  net.semantics = semantics;
  for (std::size_t k = 0; k + 1 < topology.size(); ++k)
    net.layers.emplace_back(topology[k], topology[k + 1]);
  return net;
}

/// Widths ~ N(0, 1), neurotransmitter levels ~ N(0, 0.5) (standard
/// deviations), biases zero. Layers are filled in order, W before N.
inline Network init_network(const Topology& topology, std::uint64_t seed,
                            ChannelSemantics semantics = ChannelSemantics::algorithm1) {
  Network net = make_network(topology, semantics);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> width_dist(0.0, 1.0);
  std::normal_distribution<double> neuro_dist(0.0, 0.5);
  for (auto& layer : net.layers) {
    for (double& w : layer.widths.flat()) w = width_dist(rng);
    for (double& n : layer.neuro.flat()) n = neuro_dist(rng);
  }
  return net;
}

struct ForwardResult {
  std::vector<double> logits;
  std::vector<ForwardTrace> traces;
};

/// Chains layer_forward over every layer. Returns raw logits.
inline ForwardResult forward_full(const Network& net, std::span<const double> x, OpTally& tally) {
  if (x.size() != net.input_dim())
    throw ShapeError("network expects input of length " + std::to_string(net.input_dim()) +
                     ", got " + std::to_string(x.size()));
  ForwardResult r;
  r.traces.reserve(net.layers.size());
  std::vector<double> h(x.begin(), x.end());
  for (const auto& layer : net.layers) {
    auto [y, trace] = layer_forward(layer, h, tally, net.semantics);
    r.traces.push_back(std::move(trace));
    h = std::move(y);
  }
  r.logits = std::move(h);
  return r;
}

inline std::vector<double> forward_logits(const Network& net, std::span<const double> x) {
  OpTally scratch;
  return forward_full(net, x, scratch).logits;
}

/// Index of the largest value; ties go to the lowest index.
inline std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

/// Max-shifted softmax.
inline std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw ShapeError("softmax of empty logits");
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) total += p[k] = std::exp(logits[k] - peak);
  for (double& e : p) e /= total;
  return p;
}

struct LossResult {
  double loss = 0.0;
  std::vector<double> dlogits;
};

/// -log softmax(logits)[target] and its gradient p - onehot(target).
inline LossResult softmax_cross_entropy(std::span<const double> logits, std::size_t target) {
  if (logits.empty()) throw ShapeError("cross-entropy of empty logits");
  if (target >= logits.size())
    throw ShapeError("target class " + std::to_string(target) + " out of range");
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double z : logits) total += std::exp(z - peak);
  LossResult r;
  r.loss = std::log(total) - (logits[target] - peak);
  r.dlogits = softmax(logits);
  r.dlogits[target] -= 1.0;
  return r;
}

using NetworkGrads = std::vector<LayerGrads>;

inline NetworkGrads zero_grads(const Network& net) {
  NetworkGrads g;
  g.reserve(net.layers.size());
  for (const auto& l : net.layers) g.emplace_back(l);
  return g;
}

/// Backpropagates dlogits through the recorded traces.
inline NetworkGrads backward_full(const Network& net, const std::vector<ForwardTrace>& traces,
                                  std::span<const double> dlogits) {
  if (traces.size() != net.layers.size()) throw ShapeError("one trace per layer required");
  NetworkGrads grads(net.layers.size());
  std::vector<double> upstream(dlogits.begin(), dlogits.end());
  for (std::size_t k = net.layers.size(); k-- > 0;) {
    grads[k] = layer_backward(net.layers[k], traces[k], upstream);
    upstream = grads[k].d_input;
  }
  return grads;
}

struct BatchResult {
  double total_loss = 0.0;
  std::size_t correct = 0;
  NetworkGrads grads;
};

/// Full-batch pass: summed loss and summed gradients over every row.
inline BatchResult batch_loss_and_grads(const Network& net, const Dataset& ds) {
  if (ds.input_dim != net.input_dim())
    throw ShapeError("dataset has " + std::to_string(ds.input_dim) + " inputs, network expects " +
                     std::to_string(net.input_dim()));
  if (ds.num_classes > net.output_dim())
    throw ShapeError("dataset has more classes than the network has outputs");
  BatchResult r;
  r.grads = zero_grads(net);
  OpTally tally;
  for (std::size_t row = 0; row < ds.size(); ++row) {
    const ForwardResult fwd = forward_full(net, ds.inputs[row], tally);
    const LossResult loss = softmax_cross_entropy(fwd.logits, ds.targets[row]);
    r.total_loss += loss.loss;
    if (argmax(fwd.logits) == ds.targets[row]) ++r.correct;
    const NetworkGrads g = backward_full(net, fwd.traces, loss.dlogits);
    for (std::size_t k = 0; k < g.size(); ++k) r.grads[k] += g[k];
  }
  return r;
}

/// Velocity buffers mirroring W, N and b of one layer.
struct LayerVelocity {
  Matrix widths;
  Matrix neuro;
  std::vector<double> bias;
};

struct OptimizerState {
  std::vector<LayerVelocity> velocity;

  OptimizerState() = default;
  explicit OptimizerState(const Network& net) {
    for (const auto& l : net.layers)
      velocity.push_back({Matrix(l.out_dim(), l.in_dim()), Matrix(l.out_dim(), l.in_dim()),
                          std::vector<double>(l.out_dim(), 0.0)});
  }
};

/// Classical momentum: v <- mu v - lr g, theta <- theta + v.
inline void sgd_momentum_step(Network& net, const NetworkGrads& grads, OptimizerState& state,
                              double lr, double mu) {
  if (grads.size() != net.layers.size() || state.velocity.size() != net.layers.size())
    throw ShapeError("gradient/optimizer state does not match the network");
  auto update = [&](std::span<double> theta, std::span<double> v, std::span<const double> g) {
    if (theta.size() != v.size() || theta.size() != g.size())
      throw ShapeError("gradient/optimizer tensor shape mismatch");
    for (std::size_t k = 0; k < theta.size(); ++k) {
      v[k] = mu * v[k] - lr * g[k];
      theta[k] += v[k];
    }
  };
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    auto& layer = net.layers[k];
    auto& vel = state.velocity[k];
    update(layer.widths.flat(), vel.widths.flat(), grads[k].d_widths.flat());
    update(layer.neuro.flat(), vel.neuro.flat(), grads[k].d_neuro.flat());
    update(layer.bias, vel.bias, grads[k].d_bias);
  }
}

struct TrainConfig {
  Topology topology{2, 4, 2};
  double learning_rate = 0.001;
  double momentum = 0.9;
  std::size_t epochs = 1000;
  std::uint64_t seed = 0;
  std::string dataset = "xor";
  ChannelSemantics channel_semantics = ChannelSemantics::algorithm1;

  void validate() const {
    validate_topology(topology);
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
      throw ConfigError("learning_rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
  }
};

struct EpochRecord {
  std::size_t epoch = 0;
  /// Mean per-row cross-entropy before this epoch's update.
  double loss = 0.0;
  /// Training accuracy before this epoch's update.
  double accuracy = 0.0;
};

struct TrainResult {
  Network net;
  std::vector<EpochRecord> history;
  /// Accuracy of the returned network on the training set.
  double final_accuracy = 0.0;
};

/// Fraction of rows whose argmax logit equals the target.
inline double accuracy(const Network& net, const Dataset& ds) {
  if (ds.size() == 0) throw ShapeError("accuracy of empty dataset");
  if (ds.input_dim != net.input_dim()) throw ShapeError("dataset/network input dimension mismatch");
  std::size_t correct = 0;
  for (std::size_t r = 0; r < ds.size(); ++r)
    if (argmax(forward_logits(net, ds.inputs[r])) == ds.targets[r]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

inline TrainResult train(const TrainConfig& config, const Dataset& ds) {
  config.validate();
  ds.validate();
  if (config.topology.front() != ds.input_dim)
    throw ShapeError("topology input size " + std::to_string(config.topology.front()) +
                     " does not match dataset input dimension " + std::to_string(ds.input_dim));
  if (config.topology.back() < ds.num_classes)
    throw ShapeError("topology output size is smaller than the number of classes");

  TrainResult result;
  result.net = init_network(config.topology, config.seed, config.channel_semantics);
  OptimizerState state(result.net);
  result.history.reserve(config.epochs);
  const double rows = static_cast<double>(ds.size());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const BatchResult batch = batch_loss_and_grads(result.net, ds);
    if (!std::isfinite(batch.total_loss))
      throw DivergenceError(epoch, "loss became non-finite at epoch " + std::to_string(epoch));
    result.history.push_back({epoch, batch.total_loss / rows, static_cast<double>(batch.correct) / rows});
    sgd_momentum_step(result.net, batch.grads, state, config.learning_rate, config.momentum);
    for (const auto& layer : result.net.layers)
      for (auto values : {layer.widths.flat(), layer.neuro.flat(), std::span<const double>(layer.bias)})
        for (double v : values)
          if (!std::isfinite(v))
            throw DivergenceError(epoch, "parameters became non-finite at epoch " +
                                             std::to_string(epoch));
  }
  result.final_accuracy = accuracy(result.net, ds);
  return result;
}

inline TrainResult train(const TrainConfig& config) {
  return train(config, resolve_dataset(config.dataset));
}

}  // namespace ncn
