#pragma once

// One fully connected Neuro-Channel layer: forward pass through the kernel
// gates with sqrt(d) somatic scaling, and the matching subgradient pass.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ncn/error.hpp"
#include "ncn/kernel.hpp"
#include "ncn/matrix.hpp"

namespace ncn {

/// Channel widths W, neurotransmitter levels N (both out_dim x in_dim) and
/// biases b for one layer.
class LayerParams {
 public:
  LayerParams() = default;
  LayerParams(std::size_t in_dim, std::size_t out_dim)
      : widths(out_dim, in_dim), neuro(out_dim, in_dim), bias(out_dim, 0.0),
        sqrt_d_(std::sqrt(static_cast<double>(in_dim))) {
    if (in_dim == 0 || out_dim == 0) throw ConfigError("layer dimensions must be positive");
  }

  Matrix widths;
  Matrix neuro;
  std::vector<double> bias;

  [[nodiscard]] std::size_t in_dim() const noexcept { return widths.cols(); }
  [[nodiscard]] std::size_t out_dim() const noexcept { return widths.rows(); }
  /// sqrt(in_dim), fixed at construction.
  [[nodiscard]] double sqrt_d() const noexcept { return sqrt_d_; }

  /// Throws ShapeError if W, N and b disagree, ConfigError on non-finite entries.
  void validate() const {
    if (!widths.same_shape(neuro) || bias.size() != widths.rows() || widths.size() == 0)
      throw ShapeError("layer parameter shapes are inconsistent");
    if (sqrt_d_ * sqrt_d_ == 0.0) throw ShapeError("layer has zero input dimension");
    auto finite = [](std::span<const double> v) {
      for (double e : v)
        if (!std::isfinite(e)) return false;
      return true;
    };
    if (!finite(widths.flat()) || !finite(neuro.flat()) || !finite(bias))
      throw ConfigError("layer parameters contain non-finite values");
  }

  friend bool operator==(const LayerParams& a, const LayerParams& b) {
    return a.widths == b.widths && a.neuro == b.neuro && a.bias == b.bias;
  }

 private:
  double sqrt_d_ = 0.0;
};

/// Which argument won a min(|x|, |param|) clamp.
enum class Limit : std::uint8_t { input, param, tie };

/// Branch outcomes of one synapse.
struct SynapseRecord {
  std::int8_t channel_factor = 0;
  bool sign_match = false;
  Limit channel = Limit::tie;
  Limit bypass = Limit::tie;

  friend bool operator==(const SynapseRecord&, const SynapseRecord&) = default;
};

/// Everything layer_backward needs from a forward pass.
struct ForwardTrace {
  std::vector<double> input;
  std::vector<std::int8_t> input_sign;
  /// Row-major [out_dim x in_dim].
  std::vector<SynapseRecord> synapses;
  /// Synaptic sums before sqrt(d) scaling and bias.
  std::vector<double> sums;

  [[nodiscard]] std::size_t in_dim() const noexcept { return input.size(); }
  [[nodiscard]] std::size_t out_dim() const noexcept { return sums.size(); }
  [[nodiscard]] const SynapseRecord& at(std::size_t j, std::size_t i) const noexcept {
    return synapses[j * input.size() + i];
  }

  friend bool operator==(const ForwardTrace&, const ForwardTrace&) = default;
};

struct LayerGrads {
  Matrix d_widths;
  Matrix d_neuro;
  std::vector<double> d_bias;
  std::vector<double> d_input;

  LayerGrads() = default;
  explicit LayerGrads(const LayerParams& p)
      : d_widths(p.out_dim(), p.in_dim()), d_neuro(p.out_dim(), p.in_dim()),
        d_bias(p.out_dim(), 0.0), d_input(p.in_dim(), 0.0) {}

  /// Parameter gradients accumulate; d_input is overwritten by the last pass.
  LayerGrads& operator+=(const LayerGrads& o) {
    if (!d_widths.same_shape(o.d_widths) || d_bias.size() != o.d_bias.size())
      throw ShapeError("cannot accumulate gradients of different shapes");
    for (std::size_t k = 0; k < d_widths.size(); ++k) {
      d_widths.flat()[k] += o.d_widths.flat()[k];
      d_neuro.flat()[k] += o.d_neuro.flat()[k];
    }
    for (std::size_t j = 0; j < d_bias.size(); ++j) d_bias[j] += o.d_bias[j];
    d_input = o.d_input;
    return *this;
  }
};

namespace detail {

inline Limit classify(double input_mag, double param_mag) noexcept {
  if (input_mag < param_mag) return Limit::input;
  if (param_mag < input_mag) return Limit::param;
  return Limit::tie;
}

inline bool param_limited(Limit l) noexcept { return l != Limit::input; }

inline void check_input(const LayerParams& params, std::span<const double> x) {
  if (x.size() != params.in_dim())
    throw ShapeError("layer expects input of length " + std::to_string(params.in_dim()) +
                     ", got " + std::to_string(x.size()));
  for (double v : x)
    if (!std::isfinite(v)) throw ConfigError("non-finite layer input");
}

}  // namespace detail

/// y_j = (sum_i C(x_i, W_ji) + B(x_i, N_ji)) / sqrt(d) + b_j.
///
/// Per synapse: two clamps, two sign selections and two accumulating adds.
/// |x_i| is taken once per input and shared across neurons. Per neuron: one
/// scaling and one bias add.
inline std::pair<std::vector<double>, ForwardTrace> layer_forward(
    const LayerParams& params, std::span<const double> x, OpTally& tally,
    ChannelSemantics semantics = ChannelSemantics::algorithm1) {
  detail::check_input(params, x);
  const std::size_t d = params.in_dim();
  const std::size_t m = params.out_dim();

  ForwardTrace trace;
  trace.input.assign(x.begin(), x.end());
  trace.input_sign.resize(d);
  trace.synapses.resize(d * m);
  trace.sums.resize(m);

  std::vector<SignMagnitude> split(d);
  for (std::size_t i = 0; i < d; ++i) {
    split[i] = detail::split(x[i], tally);
    trace.input_sign[i] = static_cast<std::int8_t>(split[i].sign);
  }

  std::vector<double> y(m);
  for (std::size_t j = 0; j < m; ++j) {
    double sum = 0.0;
    const auto w_row = params.widths.row(j);
    const auto n_row = params.neuro.row(j);
    for (std::size_t i = 0; i < d; ++i) {
      const ChannelResult c = channel_gate(split[i], w_row[i], tally, semantics);
      const BypassResult b = bypass_gate(split[i], n_row[i], tally);
      sum = sum + (c.out + b.out);
      tally.fadd += 2;

      SynapseRecord& rec = trace.synapses[j * d + i];
      rec.channel_factor = static_cast<std::int8_t>(c.factor);
      rec.sign_match = split[i].sign == detail::sign_of(w_row[i]);
      rec.channel = detail::classify(split[i].magnitude, std::fabs(w_row[i]));
      rec.bypass = detail::classify(split[i].magnitude, std::fabs(n_row[i]));
    }
    trace.sums[j] = sum;
    y[j] = sum / params.sqrt_d();
    ++tally.scaling;
    y[j] = y[j] + params.bias[j];
    ++tally.bias_add;
  }
  return {std::move(y), std::move(trace)};
}

/// Recomputes the layer output from recorded branch outcomes alone.
inline std::vector<double> layer_replay(const LayerParams& params, const ForwardTrace& trace) {
  if (trace.in_dim() != params.in_dim() || trace.out_dim() != params.out_dim())
    throw ShapeError("trace does not match layer dimensions");
  const std::size_t d = params.in_dim();
  std::vector<double> y(params.out_dim());
  auto select = [](int sign, double v) { return sign > 0 ? v : (sign < 0 ? -v : 0.0); };
  for (std::size_t j = 0; j < y.size(); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const SynapseRecord& rec = trace.at(j, i);
      const double ax = std::fabs(trace.input[i]);
      const double cmag = rec.channel == Limit::input ? ax : std::fabs(params.widths(j, i));
      const double nmag = rec.bypass == Limit::input ? ax : std::fabs(params.neuro(j, i));
      sum = sum + (select(rec.channel_factor, cmag) + select(trace.input_sign[i], nmag));
    }
    y[j] = sum / params.sqrt_d() + params.bias[j];
  }
  return y;
}

/// Subgradients of the layer given upstream dy. Signs are held constant
/// (straight-through); a tied clamp sends its gradient to the parameter.
inline LayerGrads layer_backward(const LayerParams& params, const ForwardTrace& trace,
                                 std::span<const double> dy) {
  if (trace.in_dim() != params.in_dim() || trace.out_dim() != params.out_dim() ||
      dy.size() != params.out_dim())
    throw ShapeError("trace, params and dy dimensions disagree");
  const std::size_t d = params.in_dim();
  const double scale = params.sqrt_d();
  LayerGrads g(params);
  for (std::size_t j = 0; j < params.out_dim(); ++j) {
    const double upstream = dy[j] / scale;
    g.d_bias[j] = dy[j];
    for (std::size_t i = 0; i < d; ++i) {
      const SynapseRecord& rec = trace.at(j, i);
      const double sx = trace.input_sign[i];
      const double factor = rec.channel_factor;
      const double sw = detail::sign_of(params.widths(j, i));
      const double sn = detail::sign_of(params.neuro(j, i));
      const bool ch_param = detail::param_limited(rec.channel);
      const bool by_param = detail::param_limited(rec.bypass);

      if (ch_param) g.d_widths(j, i) = upstream * factor * sw;
      if (by_param) g.d_neuro(j, i) = upstream * sx * sn;
      double dx = 0.0;
      if (!ch_param) dx += factor * sx;
      if (!by_param) dx += 1.0;
      g.d_input[i] += upstream * dx;
    }
  }
  return g;
}

}  // namespace ncn
