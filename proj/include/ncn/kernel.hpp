#pragma once

// Scalar multiplication-free primitives. Every synaptic computation in the
// library goes through these functions so the forward pass can be audited
// against its operation budget.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

#include "ncn/error.hpp"

namespace ncn {

/// How a channel treats a width whose sign disagrees with the input.
///
/// `algorithm1` makes a mismatched sign inhibitory (the output is the negated
/// clamp). `equation1` ignores the width's sign and always follows the input.
enum class ChannelSemantics { algorithm1, equation1 };

inline std::string_view to_string(ChannelSemantics s) {
  return s == ChannelSemantics::algorithm1 ? "algorithm1" : "equation1";
}

inline ChannelSemantics parse_channel_semantics(std::string_view text) {
  if (text == "algorithm1") return ChannelSemantics::algorithm1;
  if (text == "equation1") return ChannelSemantics::equation1;
  throw ConfigError("unknown channel_semantics '" + std::string(text) +
                    "' (expected algorithm1 or equation1)");
}

/// Operation counts reported in the layout of the per-perceptron cost table:
/// only magnitude comparisons count as comparisons, sign checks are folded
/// into mux selection.
struct Table1Counts {
  std::uint64_t fmul = 0;
  std::uint64_t fadd = 0;
  std::uint64_t compare = 0;
  std::uint64_t mux = 0;
  std::uint64_t bias_add = 0;
  std::uint64_t scaling = 0;

  friend bool operator==(const Table1Counts&, const Table1Counts&) = default;
};

/// Exact operation counters.
///
/// `compare` counts every comparison the kernel performs, including the
/// sign-match test; `sign_match` is the subset of `compare` spent on that
/// test. All counters only ever grow until `reset()`.
struct OpTally {
  std::uint64_t fmul = 0;
  std::uint64_t fadd = 0;
  std::uint64_t compare = 0;
  std::uint64_t sign_match = 0;
  std::uint64_t mux = 0;
  std::uint64_t sign_abs = 0;
  std::uint64_t scaling = 0;
  std::uint64_t bias_add = 0;

  void reset() noexcept { *this = OpTally{}; }

  OpTally& operator+=(const OpTally& o) noexcept {
    fmul += o.fmul;
    fadd += o.fadd;
    compare += o.compare;
    sign_match += o.sign_match;
    mux += o.mux;
    sign_abs += o.sign_abs;
    scaling += o.scaling;
    bias_add += o.bias_add;
    return *this;
  }

  friend OpTally operator+(OpTally a, const OpTally& b) noexcept { return a += b; }
  friend bool operator==(const OpTally&, const OpTally&) = default;

  /// Every primitive as counted.
  [[nodiscard]] const OpTally& raw_view() const noexcept { return *this; }

  [[nodiscard]] Table1Counts table1_view() const noexcept {
    return {fmul, fadd, compare - sign_match, mux, bias_add, scaling};
  }
};

inline std::ostream& operator<<(std::ostream& os, const Table1Counts& t) {
  return os << "{fmul=" << t.fmul << " fadd=" << t.fadd << " compare=" << t.compare
            << " mux=" << t.mux << " bias_add=" << t.bias_add << " scaling=" << t.scaling
            << "}";
}

inline std::ostream& operator<<(std::ostream& os, const OpTally& t) {
  return os << "{fmul=" << t.fmul << " fadd=" << t.fadd << " compare=" << t.compare
            << " sign_match=" << t.sign_match << " mux=" << t.mux
            << " sign_abs=" << t.sign_abs << " scaling=" << t.scaling
            << " bias_add=" << t.bias_add << "}";
}

/// Returns the tally with every counter zeroed.
[[nodiscard]] inline OpTally tally_reset(OpTally& tally) noexcept {
  tally.reset();
  return tally;
}

/// Sign and magnitude of a value, read together as one sign/abs operation.
struct SignMagnitude {
  int sign = 0;
  double magnitude = 0.0;
};

namespace detail {

constexpr int sign_of(double x) noexcept { return (x > 0.0) - (x < 0.0); }

inline SignMagnitude split(double x, OpTally& tally) noexcept {
  ++tally.sign_abs;
  return {sign_of(x), std::fabs(x)};
}

inline double clamp_min(double a, double b, OpTally& tally) noexcept {
  ++tally.compare;
  return std::min(a, b);
}

/// Conditional negation: select +v, -v or 0 by sign. This is how a sign
/// "product" is realised without a floating multiply.
inline double signed_select(int sign, double v, OpTally& tally) noexcept {
  ++tally.mux;
  if (sign > 0) return v;
  if (sign < 0) return -v;
  return 0.0;
}

}  // namespace detail

/// -1, 0 or +1.
[[nodiscard]] inline int sgn(double x, OpTally& tally) noexcept {
  ++tally.sign_abs;
  return detail::sign_of(x);
}

/// Outcome of one channel transmission, with the branch facts the backward
/// pass needs.
struct ChannelResult {
  double out = 0.0;
  /// Sign factor applied to the clamp: sgn(x) when signs agree, -1 otherwise.
  int factor = 0;
  /// |w| <= |x|. A tie is attributed to the parameter.
  bool param_limited = false;
};

struct BypassResult {
  double out = 0.0;
  bool param_limited = false;
};

/// Channel gate with |x| already split off. Costs one sign/abs for w.
inline ChannelResult channel_gate(SignMagnitude x, double w, OpTally& tally,
                                  ChannelSemantics semantics = ChannelSemantics::algorithm1) noexcept {
  const SignMagnitude sw = detail::split(w, tally);
  const double limit = detail::clamp_min(x.magnitude, sw.magnitude, tally);
  ChannelResult r;
  r.param_limited = sw.magnitude <= x.magnitude;
  if (semantics == ChannelSemantics::algorithm1) {
    ++tally.compare;
    ++tally.sign_match;
    r.factor = (x.sign == sw.sign) ? x.sign : -1;
    // A zero input transmits nothing on either branch.
    if (x.sign == 0) r.factor = 0;
  } else {
    r.factor = x.sign;
  }
  r.out = detail::signed_select(r.factor, limit, tally);
  return r;
}

/// Bypass gate with |x| already split off. Costs one sign/abs for n.
inline BypassResult bypass_gate(SignMagnitude x, double n, OpTally& tally) noexcept {
  const SignMagnitude sn = detail::split(n, tally);
  const double limit = detail::clamp_min(x.magnitude, sn.magnitude, tally);
  return {detail::signed_select(x.sign, limit, tally), sn.magnitude <= x.magnitude};
}

/// Clamp x to the channel width |w|. Mismatched signs are inhibitory under
/// `algorithm1`.
[[nodiscard]] inline double channel_transmit(
    double x, double w, OpTally& tally,
    ChannelSemantics semantics = ChannelSemantics::algorithm1) noexcept {
  return channel_gate(detail::split(x, tally), w, tally, semantics).out;
}

/// sgn(x) * min(|x|, |n|). The sign of n never matters.
[[nodiscard]] inline double bypass_transmit(double x, double n, OpTally& tally) noexcept {
  return bypass_gate(detail::split(x, tally), n, tally).out;
}

}  // namespace ncn
