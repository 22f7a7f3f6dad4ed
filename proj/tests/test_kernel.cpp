#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ncn/kernel.hpp"

namespace ncn {
namespace {

TEST(Kernel, SgnCases) {
  OpTally t;
  EXPECT_EQ(sgn(3.2, t), 1);
  EXPECT_EQ(sgn(0.0, t), 0);
  EXPECT_EQ(sgn(-0.5, t), -1);
  EXPECT_EQ(sgn(-0.0, t), 0);
  EXPECT_EQ(t.sign_abs, 4u);
  EXPECT_EQ(t.fmul, 0u);
}

TEST(Kernel, ChannelTransmitExamples) {
  OpTally t;
  EXPECT_DOUBLE_EQ(channel_transmit(0.5, 1.0, t), 0.5);
  EXPECT_DOUBLE_EQ(channel_transmit(2.0, 0.5, t), 0.5);
  // Mismatched signs are inhibitory.
  EXPECT_DOUBLE_EQ(channel_transmit(1.0, -0.5, t), -0.5);
  // Matched negative signs: sgn(x) * min = -0.5.
  EXPECT_DOUBLE_EQ(channel_transmit(-1.0, -0.5, t), -0.5);
  EXPECT_DOUBLE_EQ(channel_transmit(0.0, 0.7, t), 0.0);
  EXPECT_EQ(t.fmul, 0u);
}

TEST(Kernel, ChannelEquationOneIgnoresWidthSign) {
  OpTally t;
  constexpr auto eq1 = ChannelSemantics::equation1;
  EXPECT_DOUBLE_EQ(channel_transmit(1.0, -0.5, t, eq1), 0.5);
  EXPECT_DOUBLE_EQ(channel_transmit(-1.0, 0.5, t, eq1), -0.5);
  EXPECT_DOUBLE_EQ(channel_transmit(-0.2, -0.5, t, eq1), -0.2);
  EXPECT_EQ(t.sign_match, 0u);
}

TEST(Kernel, NegativeInputPositiveWidthIsInhibitoryClamp) {
  OpTally t;
  EXPECT_DOUBLE_EQ(channel_transmit(-2.0, 0.5, t), -0.5);
  EXPECT_DOUBLE_EQ(channel_transmit(-0.25, 0.5, t), -0.25);
}

TEST(Kernel, BypassTransmitExamples) {
  OpTally t;
  EXPECT_DOUBLE_EQ(bypass_transmit(-2.0, 0.7, t), -0.7);
  EXPECT_DOUBLE_EQ(bypass_transmit(0.3, -5.0, t), 0.3);
  EXPECT_DOUBLE_EQ(bypass_transmit(0.0, 1.0, t), 0.0);
  EXPECT_EQ(t.fmul, 0u);
}

TEST(Kernel, TallyResetAndChannelCounts) {
  OpTally t;
  t.fadd = 9;
  t.mux = 3;
  const OpTally zero = tally_reset(t);
  EXPECT_EQ(zero, OpTally{});
  EXPECT_EQ(t, OpTally{});

  (void)channel_transmit(0.5, -1.0, t);
  EXPECT_EQ(t.fmul, 0u);
  EXPECT_EQ(t.compare, 2u);
  EXPECT_EQ(t.mux, 1u);
  EXPECT_EQ(t.sign_abs, 2u);
  // The sign-match test is folded into mux selection in the table view.
  EXPECT_EQ(t.table1_view().compare, 1u);

  t.reset();
  t.reset();
  EXPECT_EQ(t, OpTally{});
}

TEST(Kernel, TalliesMergeComponentwise) {
  OpTally a, b;
  (void)channel_transmit(1.0, 2.0, a);
  (void)bypass_transmit(1.0, 2.0, b);
  const OpTally sum = a + b;
  EXPECT_EQ(sum.compare, a.compare + b.compare);
  EXPECT_EQ(sum.mux, 2u);
  EXPECT_EQ(sum.sign_abs, a.sign_abs + b.sign_abs);
}

TEST(Kernel, ParseSemantics) {
  EXPECT_EQ(parse_channel_semantics("algorithm1"), ChannelSemantics::algorithm1);
  EXPECT_EQ(parse_channel_semantics("equation1"), ChannelSemantics::equation1);
  EXPECT_THROW(parse_channel_semantics("eq1"), ConfigError);
}

// Randomised property sweep; the acceptance binary runs the 1e5-pair version.
class KernelProperties : public ::testing::Test {
 protected:
  std::mt19937_64 rng{1234};
  double draw() {
    // Mix of scales plus exact zeros and ties.
    switch (std::uniform_int_distribution<int>(0, 9)(rng)) {
      case 0: return 0.0;
      case 1: return std::ldexp(std::normal_distribution<double>()(rng), -30);
      default: return std::normal_distribution<double>(0.0, 2.0)(rng);
    }
  }
};

TEST_F(KernelProperties, ClampSignAndMonotonicity) {
  OpTally t;
  for (int k = 0; k < 20000; ++k) {
    const double x = draw();
    const double p = (k % 17 == 0) ? -x : draw();
    const double lim = std::min(std::fabs(x), std::fabs(p));
    const double c = channel_transmit(x, p, t);
    const double b = bypass_transmit(x, p, t);
    ASSERT_EQ(std::fabs(c), lim);
    ASSERT_EQ(std::fabs(b), lim);
    if (lim > 0) {
      ASSERT_EQ(std::signbit(b), std::signbit(x));
    }
    ASSERT_EQ(bypass_transmit(x, -p, t), b);
    ASSERT_EQ(c > 0, x > 0 && p > 0) << x << " " << p;
    if (x > 0 && p > 0) {
      const double wider = p + std::fabs(draw());
      ASSERT_LE(c, channel_transmit(x, wider, t));
    }
  }
  EXPECT_EQ(t.fmul, 0u);
}

TEST_F(KernelProperties, CountersNeverDecrease) {
  OpTally t;
  OpTally prev;
  for (int k = 0; k < 1000; ++k) {
    (void)channel_transmit(draw(), draw(), t);
    (void)bypass_transmit(draw(), draw(), t);
    ASSERT_GE(t.compare, prev.compare);
    ASSERT_GT(t.mux, prev.mux);
    ASSERT_GT(t.sign_abs, prev.sign_abs);
    prev = t;
  }
}

}  // namespace
}  // namespace ncn
