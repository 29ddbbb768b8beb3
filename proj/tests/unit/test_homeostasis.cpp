#include <gtest/gtest.h>

#include <array>
#include <set>

#include "babble/homeostasis.hpp"
#include "babble/random.hpp"

using namespace babble;

namespace {

HomeostaticState with_level(NeedKind need, double level) {
  HomeostaticState s;
  s.level[index_of(need)] = level;
  return s;
}

std::array<Motivation, 3> motivations(double h, double t, double c) {
  return {Motivation{NeedKind::Hunger, h}, Motivation{NeedKind::Thirst, t}, Motivation{NeedKind::Curiosity, c}};
}

}  // namespace

TEST(DecayStep, SubtractsRate) {
  const auto s = decay_step(with_level(NeedKind::Hunger, 0.5));
  EXPECT_DOUBLE_EQ(s.level_of(NeedKind::Hunger), 0.4);
}

TEST(DecayStep, ClampsAtFloor) {
  const auto s = decay_step(with_level(NeedKind::Thirst, 0.05));
  EXPECT_EQ(s.level_of(NeedKind::Thirst), 0.0);
}

TEST(DecayStep, ZeroRateIsIdentity) {
  HomeostaticState s = with_level(NeedKind::Curiosity, 0.37);
  s.decay_rate = {0.0, 0.0, 0.0};
  EXPECT_EQ(decay_step(s).level, s.level);
}

TEST(Satisfy, AddsGain) {
  HomeostaticState s = with_level(NeedKind::Hunger, 0.3);
  s.satiation_gain[0] = 0.5;
  EXPECT_DOUBLE_EQ(satisfy(s, NeedKind::Hunger).level_of(NeedKind::Hunger), 0.8);
}

TEST(Satisfy, ClampsAtCeiling) {
  HomeostaticState s = with_level(NeedKind::Hunger, 0.9);
  s.satiation_gain[0] = 0.5;
  EXPECT_EQ(satisfy(s, NeedKind::Hunger).level_of(NeedKind::Hunger), 1.0);
}

TEST(Satisfy, ZeroGainIsIdentity) {
  HomeostaticState s = with_level(NeedKind::Thirst, 0.2);
  s.satiation_gain[1] = 0.0;
  EXPECT_EQ(satisfy(s, NeedKind::Thirst).level, s.level);
}

TEST(Satisfy, OnlyTouchesTargetNeed) {
  HomeostaticState s;
  s.level = {0.1, 0.2, 0.3};
  const auto out = satisfy(s, NeedKind::Thirst);
  EXPECT_EQ(out.level[0], 0.1);
  EXPECT_EQ(out.level[2], 0.3);
}

TEST(ComputeDrive, Examples) {
  EXPECT_EQ(compute_drive(HomeostaticState{}, NeedKind::Hunger).value, 0.0);
  EXPECT_DOUBLE_EQ(compute_drive(with_level(NeedKind::Hunger, 0.3), NeedKind::Hunger).value, 0.7);
  HomeostaticState s = with_level(NeedKind::Thirst, 0.9);
  s.optimal[1] = 0.8;
  EXPECT_EQ(compute_drive(s, NeedKind::Thirst).value, 0.0);
  EXPECT_EQ(compute_drive(s, NeedKind::Thirst).need, NeedKind::Thirst);
}

TEST(ComputeMotivation, Examples) {
  EXPECT_DOUBLE_EQ(compute_motivation({NeedKind::Hunger, 0.7}, {NeedKind::Hunger, 0.0}).value, 0.7);
  EXPECT_EQ(compute_motivation({NeedKind::Hunger, 0.0}, {NeedKind::Hunger, 1.0}).value, 0.0);
  EXPECT_DOUBLE_EQ(compute_motivation({NeedKind::Hunger, 0.5}, {NeedKind::Hunger, 1.0}).value, 1.0);
}

TEST(ComputeMotivation, MatchesIndependentExpression) {
  Rng rng(11);
  for (int k = 0; k < 1000; ++k) {
    const double d = uniform01(rng);
    const double s = uniform01(rng);
    EXPECT_NEAR(compute_motivation({NeedKind::Curiosity, d}, {NeedKind::Curiosity, s}).value, d * (1.0 + s), 1e-12);
  }
}

TEST(ExpressionThreshold, Bounds) {
  EXPECT_THROW(ExpressionThreshold(0.0), std::invalid_argument);
  EXPECT_THROW(ExpressionThreshold(2.0), std::invalid_argument);
  EXPECT_THROW(ExpressionThreshold(-1.0), std::invalid_argument);
  EXPECT_EQ(ExpressionThreshold(0.6).value(), 0.6);
}

TEST(SelectExpressedNeed, SingleCrosser) {
  Rng rng(1);
  const auto m = motivations(0.2, 0.3, 0.95);
  EXPECT_EQ(select_expressed_need(m, ExpressionThreshold(0.9), rng), NeedKind::Curiosity);
}

TEST(SelectExpressedNeed, NoCrosser) {
  Rng rng(1);
  const auto m = motivations(0.1, 0.1, 0.1);
  EXPECT_EQ(select_expressed_need(m, ExpressionThreshold(0.9), rng), std::nullopt);
}

TEST(SelectExpressedNeed, StrongestWins) {
  Rng rng(1);
  const auto m = motivations(0.92, 1.4, 0.95);
  EXPECT_EQ(select_expressed_need(m, ExpressionThreshold(0.9), rng), NeedKind::Thirst);
}

TEST(SelectExpressedNeed, TieIsSeededAndFair) {
  const auto m = motivations(0.95, 0.95, 0.1);
  std::set<NeedKind> seen;
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    Rng a = make_stream(seed, Stream::Ties);
    Rng b = make_stream(seed, Stream::Ties);
    const auto first = select_expressed_need(m, ExpressionThreshold(0.9), a);
    ASSERT_TRUE(first.has_value());
    EXPECT_NE(*first, NeedKind::Curiosity);
    EXPECT_EQ(first, select_expressed_need(m, ExpressionThreshold(0.9), b));
    seen.insert(*first);
  }
  EXPECT_EQ(seen.size(), 2u);
}

TEST(SelectExpressedNeed, NeedsThreeEntries) {
  Rng rng(1);
  std::array<Motivation, 2> two{Motivation{NeedKind::Hunger, 1.0}, Motivation{NeedKind::Thirst, 1.0}};
  EXPECT_THROW(select_expressed_need(two, ExpressionThreshold(0.5), rng), std::invalid_argument);
}

TEST(Validate, RejectsBadState) {
  HomeostaticState s;
  s.decay_rate[0] = -0.1;
  EXPECT_THROW(validate(s), std::invalid_argument);
  s = HomeostaticState{};
  s.level[2] = 1.5;
  EXPECT_THROW(validate(s), std::invalid_argument);
  EXPECT_NO_THROW(validate(HomeostaticState{}));
}

// Random operation sequences keep levels in [0, 1]; decay never raises a
// level and satisfy never lowers the target.
TEST(HomeostasisProperty, ClampAndMonotonicity) {
  Rng rng(2024);
  for (int run = 0; run < 200; ++run) {
    HomeostaticState s;
    for (std::size_t i = 0; i < 3; ++i) {
      s.level[i] = uniform01(rng);
      s.decay_rate[i] = 0.5 * uniform01(rng);
      s.satiation_gain[i] = 1.5 * uniform01(rng);
    }
    for (int step = 0; step < 50; ++step) {
      const auto before = s.level;
      if (uniform_index(rng, 2) == 0) {
        s = decay_step(s);
        for (std::size_t i = 0; i < 3; ++i) EXPECT_LE(s.level[i], before[i]);
      } else {
        const NeedKind need = kAllNeeds[uniform_index(rng, 3)];
        s = satisfy(s, need);
        EXPECT_GE(s.level_of(need), before[index_of(need)]);
      }
      for (double v : s.level) {
        ASSERT_GE(v, 0.0);
        ASSERT_LE(v, 1.0);
      }
    }
  }
}
