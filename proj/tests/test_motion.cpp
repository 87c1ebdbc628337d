#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "isobath/errors.hpp"
#include "isobath/motion.hpp"

using namespace isobath;
using namespace isobath::motion;

TEST(Actions, CanonicalSet) {
  const auto& a = action_set();
  ASSERT_EQ(a.size(), 11u);
  EXPECT_EQ(a[kStraight], 0.0);
  EXPECT_NEAR(a[0], -std::numbers::pi / 2, 1e-15);
  EXPECT_NEAR(a[10], std::numbers::pi / 2, 1e-15);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], -a[10 - i], 1e-15);
}

TEST(Step, StraightFromZeroHeading) {
  const MotionParams mp;
  const auto s = step({0.0, 0.0, 0.0}, 0.0, mp);
  EXPECT_NEAR(s.north, 0.0, 1e-12);
  EXPECT_NEAR(s.east, 15.0 * std::numbers::pi / 2, 1e-9);
  EXPECT_EQ(s.heading, 0.0);
}

TEST(Step, HeadingAndDisplacementGrowWithTurn) {
  const MotionParams mp;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> h(-3.1, 3.1);
  for (int i = 0; i < 200; ++i) {
    const AgentState s{h(rng), 10.0, 20.0};
    for (std::uint8_t a = 0; a < kActionCount; ++a) {
      const auto n = step_index(s, a, mp);
      EXPECT_GE(distance(s.position(), n.position()), 15.0 * std::numbers::pi / 2 - 1e-9);
      EXPECT_NEAR(std::remainder(n.heading - s.heading - action_angle(a), 2 * std::numbers::pi), 0.0, 1e-9);
      EXPECT_GT(n.heading, -std::numbers::pi);
      EXPECT_LE(n.heading, std::numbers::pi);
    }
  }
}

TEST(Step, LeftTurnIsMirrorOfRightTurn) {
  const MotionParams mp;
  const auto l = step({0.0, 0.0, 0.0}, deg_to_rad(30), mp);
  const auto r = step({0.0, 0.0, 0.0}, deg_to_rad(-30), mp);
  EXPECT_GT(l.north, 0.0);
  EXPECT_NEAR(l.north, -r.north, 1e-12);
  EXPECT_NEAR(l.east, r.east, 1e-12);
}

TEST(Params, Validation) {
  EXPECT_THROW((MotionParams{0.0}.validate()), ConfigError);
  EXPECT_THROW((MotionParams{15.0, 0.0}.validate()), ConfigError);
}

TEST(Chord, SampleCounts) {
  std::vector<Vec2> out;
  chord_samples({0, 0}, {0, 23.0}, 5.0, out);
  ASSERT_EQ(out.size(), 5u);
  EXPECT_EQ(out.back(), (Vec2{0, 23.0}));
  out.clear();
  chord_samples({0, 0}, {0, 20.0}, 5.0, out);
  EXPECT_EQ(out.size(), 4u);
  EXPECT_EQ(out.back(), (Vec2{0, 20.0}));
}

TEST(Path, StatesChain) {
  const MotionParams mp;
  const std::vector<std::uint8_t> acts{5, 0, 10, 3};
  const auto p = Path::build({0.3, 1.0, 2.0}, acts, mp);
  ASSERT_EQ(p.states.size(), 5u);
  for (std::size_t i = 0; i < acts.size(); ++i) EXPECT_EQ(p.states[i + 1], step_index(p.states[i], acts[i], mp));
  const auto locs = sample_locations(p, 5.0);
  EXPECT_EQ(locs.front(), p.start.position());
  EXPECT_EQ(locs.back(), p.final_state().position());
}

TEST(Lawnmower, StaysInsideInflatedStrip) {
  const MotionParams mp;
  const OperationalArea area{{0, 0}, {600, 1000}};
  for (std::size_t k = 0; k < 3; ++k) {
    const auto spec = LawnmowerSpec::for_agent(area, k, 3, default_swath(mp));
    EXPECT_TRUE(spec.along_east);
    const AgentState start{0.0, spec.strip_lo + 0.5 * spec.swath * 0.0 + 15.0, 15.0};
    const auto path = lawnmower_path(start, 300, spec, mp);
    for (const auto& s : path.states) EXPECT_TRUE(area.contains(s.position(), 2 * mp.turn_radius + 1e-6));
  }
}

TEST(Lawnmower, PureFunctionOfState) {
  const MotionParams mp;
  const OperationalArea area{{0, 0}, {600, 1000}};
  const auto spec = LawnmowerSpec::for_agent(area, 1, 3, default_swath(mp));
  const auto path = lawnmower_path({0.0, 215.0, 15.0}, 60, spec, mp);
  for (std::size_t i = 0; i < path.actions.size(); ++i)
    EXPECT_EQ(lawnmower_action(path.states[i], spec, mp), path.actions[i]);
}

TEST(Lawnmower, SwathOfUTurn) {
  const MotionParams mp;
  EXPECT_NEAR(default_swath(mp), 30.0 + 15.0 * std::numbers::pi, 1e-9);
  auto s = step({0.0, 0.0, 0.0}, std::numbers::pi / 2, mp);
  s = step(s, std::numbers::pi / 2, mp);
  EXPECT_NEAR(s.north, default_swath(mp), 1e-9);
  EXPECT_NEAR(std::abs(s.heading), std::numbers::pi, 1e-9);
}

TEST(Steer, TowardTarget) {
  EXPECT_EQ(steer_toward(0.0, 0.01), kStraight);
  EXPECT_EQ(steer_toward(0.0, deg_to_rad(45)), 9);
  EXPECT_EQ(steer_toward(0.0, deg_to_rad(-100)), 0);
}
