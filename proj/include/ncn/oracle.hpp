#pragma once

// Verification machinery that stays independent of the training path:
// a closed-form operation budget, a dense multiply-accumulate reference,
// central finite differences over the forward pass, and an exhaustive
// truth-table evaluator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ncn/dataset.hpp"
#include "ncn/error.hpp"
#include "ncn/kernel.hpp"
#include "ncn/layer.hpp"
#include "ncn/network.hpp"

namespace ncn::oracle {

enum class Arch { ncn, ffnn };

/// Predicted forward-pass operation counts for a whole network.
struct OpBudget {
  std::uint64_t synaptic_fmul = 0;
  std::uint64_t synaptic_fadd = 0;
  std::uint64_t synaptic_compare = 0;
  std::uint64_t synaptic_mux = 0;
  std::uint64_t somatic_bias = 0;
  std::uint64_t somatic_scaling = 0;

  [[nodiscard]] Table1Counts as_table1() const noexcept {
    return {synaptic_fmul, synaptic_fadd, synaptic_compare, synaptic_mux, somatic_bias,
            somatic_scaling};
  }
  friend bool operator==(const OpBudget&, const OpBudget&) = default;
};

/// Per-perceptron costs scaled by fan-out m and summed over layers.
/// NCN layer d->m: 0 fmul, 2dm fadd/compare/mux, m bias adds, m scalings.
/// Dense layer d->m: dm fmul, dm fadd, m bias adds.
inline OpBudget predict_op_budget(const Topology& topology, Arch arch) {
  validate_topology(topology);
  OpBudget b;
  for (std::size_t k = 0; k + 1 < topology.size(); ++k) {
    const std::uint64_t d = topology[k];
    const std::uint64_t m = topology[k + 1];
    if (arch == Arch::ncn) {
      b.synaptic_fadd += 2 * d * m;
      b.synaptic_compare += 2 * d * m;
      b.synaptic_mux += 2 * d * m;
      b.somatic_scaling += m;
    } else {
      b.synaptic_fmul += d * m;
      b.synaptic_fadd += d * m;
    }
    b.somatic_bias += m;
  }
  return b;
}

/// Dense multiply-accumulate layer, used only as the comparison column.
struct DenseLayer {
  Matrix weights;
  std::vector<double> bias;
};

inline std::vector<DenseLayer> make_dense_reference(const Topology& topology, std::uint64_t seed) {
  validate_topology(topology);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<DenseLayer> layers;
  for (std::size_t k = 0; k + 1 < topology.size(); ++k) {
    DenseLayer l{Matrix(topology[k + 1], topology[k]), std::vector<double>(topology[k + 1], 0.0)};
    for (double& w : l.weights.flat()) w = dist(rng);
    layers.push_back(std::move(l));
  }
  return layers;
}

inline std::vector<double> dense_forward(const std::vector<DenseLayer>& layers,
                                         std::span<const double> x, OpTally& tally) {
  std::vector<double> h(x.begin(), x.end());
  for (const auto& l : layers) {
    if (h.size() != l.weights.cols()) throw ShapeError("dense reference input size mismatch");
    std::vector<double> y(l.weights.rows());
    for (std::size_t j = 0; j < y.size(); ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < h.size(); ++i) {
        acc += l.weights(j, i) * h[i];
        ++tally.fmul;
        ++tally.fadd;
      }
      y[j] = acc + l.bias[j];
      ++tally.bias_add;
    }
    h = std::move(y);
  }
  return h;
}

/// Tallies one forward pass of `net` on a deterministic input.
inline OpTally measure_forward(const Network& net, std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> x(net.input_dim());
  for (double& v : x) v = dist(rng);
  OpTally tally;
  (void)forward_full(net, x, tally);
  return tally;
}

/// Address of one scalar parameter.
struct ParamCoord {
  enum class Tensor { widths, neuro, bias };
  std::size_t layer = 0;
  Tensor tensor = Tensor::widths;
  std::size_t row = 0;
  std::size_t col = 0;

  [[nodiscard]] std::string to_string() const {
    const char* name = tensor == Tensor::widths ? "W" : (tensor == Tensor::neuro ? "N" : "b");
    std::string s = "layer " + std::to_string(layer) + " " + name + "[" + std::to_string(row);
    if (tensor != Tensor::bias) s += "," + std::to_string(col);
    return s + "]";
  }
};

inline double& param_at(Network& net, const ParamCoord& c) {
  if (c.layer >= net.layers.size()) throw ConfigError("coordinate layer out of range: " + c.to_string());
  auto& l = net.layers[c.layer];
  const bool matrix = c.tensor != ParamCoord::Tensor::bias;
  if (c.row >= l.out_dim() || (matrix && c.col >= l.in_dim()) || (!matrix && c.col != 0))
    throw ConfigError("coordinate out of range: " + c.to_string());
  switch (c.tensor) {
    case ParamCoord::Tensor::widths: return l.widths(c.row, c.col);
    case ParamCoord::Tensor::neuro: return l.neuro(c.row, c.col);
    case ParamCoord::Tensor::bias: break;
  }
  return l.bias[c.row];
}

inline double grad_at(const NetworkGrads& g, const ParamCoord& c) {
  const auto& l = g.at(c.layer);
  switch (c.tensor) {
    case ParamCoord::Tensor::widths: return l.d_widths(c.row, c.col);
    case ParamCoord::Tensor::neuro: return l.d_neuro(c.row, c.col);
    case ParamCoord::Tensor::bias: break;
  }
  return l.d_bias.at(c.row);
}

inline std::vector<ParamCoord> all_coords(const Network& net) {
  std::vector<ParamCoord> out;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const auto& l = net.layers[k];
    for (auto t : {ParamCoord::Tensor::widths, ParamCoord::Tensor::neuro})
      for (std::size_t j = 0; j < l.out_dim(); ++j)
        for (std::size_t i = 0; i < l.in_dim(); ++i) out.push_back({k, t, j, i});
    for (std::size_t j = 0; j < l.out_dim(); ++j) out.push_back({k, ParamCoord::Tensor::bias, j, 0});
  }
  return out;
}

inline constexpr double kExclusionRadius = 1e-3;
inline constexpr double kFiniteDiffStep = 1e-5;

/// Summed cross-entropy over the dataset, from the forward pass only.
inline double dataset_loss(const Network& net, const Dataset& ds) {
  double total = 0.0;
  for (std::size_t r = 0; r < ds.size(); ++r)
    total += softmax_cross_entropy(forward_logits(net, ds.inputs[r]), ds.targets[r]).loss;
  return total;
}

/// Distance of every synapse, over every row, from the loci where min or
/// sgn switch branches. First-layer inputs are fixed data, so their own
/// magnitude is not a kink for parameter perturbations.
inline double kink_margin(const Network& net, const Dataset& ds) {
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < ds.size(); ++r) {
    std::vector<double> h = ds.inputs[r];
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
      const auto& l = net.layers[k];
      for (std::size_t j = 0; j < l.out_dim(); ++j)
        for (std::size_t i = 0; i < l.in_dim(); ++i) {
          const double ax = std::fabs(h[i]);
          const double aw = std::fabs(l.widths(j, i));
          const double an = std::fabs(l.neuro(j, i));
          margin = std::min({margin, std::fabs(ax - aw), std::fabs(ax - an), aw, an});
          if (k > 0) margin = std::min(margin, ax);
        }
      OpTally scratch;
      h = layer_forward(l, h, scratch, net.semantics).first;
    }
  }
  return margin;
}

struct FiniteDiff {
  double value = 0.0;
  /// False when the point lies inside the exclusion zone around a kink.
  bool reliable = true;
};

/// Central difference (L(theta + h) - L(theta - h)) / 2h of the summed
/// dataset loss with respect to one parameter.
inline FiniteDiff finite_diff_grad(const Network& net, const Dataset& ds, const ParamCoord& coord,
                                   double h = kFiniteDiffStep,
                                   double radius = kExclusionRadius) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("finite-difference step must be positive");
  Network probe = net;
  double& theta = param_at(probe, coord);
  const double original = theta;
  theta = original + h;
  const double up = dataset_loss(probe, ds);
  theta = original - h;
  const double down = dataset_loss(probe, ds);
  return {(up - down) / (2.0 * h), kink_margin(net, ds) > radius};
}

/// Fraction of rows whose argmax logit (lowest index on ties) equals the target.
inline double exhaustive_eval(const Network& net, const Dataset& ds) {
  if (ds.size() == 0) throw ShapeError("cannot evaluate an empty dataset");
  if (ds.input_dim != net.input_dim())
    throw ShapeError("dataset has " + std::to_string(ds.input_dim) + " inputs, network expects " +
                     std::to_string(net.input_dim()));
  std::size_t hits = 0;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    const auto logits = forward_logits(net, ds.inputs[r]);
    std::size_t best = 0;
    for (std::size_t c = 1; c < logits.size(); ++c)
      if (logits[c] > logits[best]) best = c;
    hits += best == ds.targets[r];
  }
  return static_cast<double>(hits) / static_cast<double>(ds.size());
}

/// |a - b| / max(|a|, |b|, floor). The floor keeps vanishing gradients
/// from turning roundoff into a huge ratio.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::fabs(analytic - numeric) / std::max({std::fabs(analytic), std::fabs(numeric), floor});
}

using BackwardFn = std::function<NetworkGrads(const Network&, const std::vector<ForwardTrace>&,
                                              std::span<const double>)>;

/// Summed analytic gradient of the dataset loss using the supplied backward.
inline NetworkGrads analytic_grads(const Network& net, const Dataset& ds,
                                   const BackwardFn& backward = backward_full) {
  NetworkGrads total = zero_grads(net);
  OpTally tally;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    const auto fwd = forward_full(net, ds.inputs[r], tally);
    const auto loss = softmax_cross_entropy(fwd.logits, ds.targets[r]);
    const auto g = backward(net, fwd.traces, loss.dlogits);
    for (std::size_t k = 0; k < g.size(); ++k) total[k] += g[k];
  }
  return total;
}

struct GradcheckReport {
  std::size_t networks = 0;
  std::size_t rejected = 0;
  std::size_t compared = 0;
  double max_rel_error = 0.0;
  ParamCoord worst;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

struct GradcheckOptions {
  Topology topology{2, 4, 2};
  std::uint64_t seed = 0;
  std::size_t networks = 10;
  ChannelSemantics semantics = ChannelSemantics::algorithm1;
  double h = kFiniteDiffStep;
  double radius = kExclusionRadius;
};

/// Samples random networks and single-row datasets outside the exclusion
/// zone and compares every parameter's analytic gradient against finite
/// differences.
inline GradcheckReport gradcheck(const GradcheckOptions& opt,
                                 const BackwardFn& backward = backward_full) {
  validate_topology(opt.topology);
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> cls(0, opt.topology.back() - 1);
  GradcheckReport rep;
  constexpr std::size_t kMaxAttempts = 10000;
  std::size_t attempts = 0;
  while (rep.networks < opt.networks) {
    if (++attempts > kMaxAttempts)
      throw AuditError("could not sample networks outside the exclusion zone");
    Network net = init_network(opt.topology, rng(), opt.semantics);
    for (auto& l : net.layers)
      for (double& b : l.bias) b = 0.5 * unit(rng);
    Dataset ds;
    ds.input_dim = opt.topology.front();
    ds.num_classes = opt.topology.back();
    std::vector<double> x(ds.input_dim);
    for (double& v : x) v = unit(rng);
    ds.inputs.push_back(std::move(x));
    ds.targets.push_back(cls(rng));

    if (kink_margin(net, ds) <= opt.radius) {
      ++rep.rejected;
      continue;
    }
    ++rep.networks;
    const NetworkGrads g = analytic_grads(net, ds, backward);
    for (const auto& c : all_coords(net)) {
      const FiniteDiff fd = finite_diff_grad(net, ds, c, opt.h, opt.radius);
      const double a = grad_at(g, c);
      const double err = relative_error(a, fd.value);
      ++rep.compared;
      if (err > rep.max_rel_error || rep.compared == 1) {
        rep.max_rel_error = err;
        rep.worst = c;
        rep.worst_analytic = a;
        rep.worst_numeric = fd.value;
      }
    }
  }
  return rep;
}

}  // namespace ncn::oracle
