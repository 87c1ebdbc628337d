#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "isobath/comms.hpp"
#include "isobath/errors.hpp"
#include "isobath/mission.hpp"

using namespace isobath;
using namespace isobath::sim;

namespace {

MissionConfig small() {
  MissionConfig c;
  c.total_length = 12;
  c.mid_step = 6;
  c.plain_horizon = 4;
  c.planner.mcts_iterations = 20;
  return c;
}

std::string ndjson(const MissionLog& log) {
  std::ostringstream os;
  log.write_ndjson(os);
  return os.str();
}

}  // namespace

TEST(Variant, Names) {
  for (auto v : {Variant::TerminalReward, Variant::Plain, Variant::Lawnmower})
    EXPECT_EQ(parse_variant(variant_name(v)), v);
  EXPECT_THROW(parse_variant("greedy"), ConfigError);
}

TEST(MissionConfigTest, Validation) {
  auto c = small();
  c.ordering = {0, 0, 1};
  EXPECT_THROW(c.validate(), ConfigError);
  c = small();
  c.speeds = {1.0, -1.0};
  EXPECT_THROW(c.validate(), ConfigError);
  c = small();
  c.channel.drop_probability = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small();
  c.starts = {{0.0, -500.0, 0.0}, {0, 100, 100}, {0, 200, 200}};
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NO_THROW(small().validate());
}

TEST(Mission, ByteIdenticalReruns) {
  for (auto v : {Variant::TerminalReward, Variant::Plain, Variant::Lawnmower}) {
    const auto a = run_mission(small(), v, 7);
    const auto b = run_mission(small(), v, 7);
    EXPECT_EQ(ndjson(a), ndjson(b));
  }
}

TEST(Mission, EveryAgentExecutesAllSteps) {
  const auto log = run_mission(small(), Variant::TerminalReward, 3);
  std::vector<std::size_t> plans(3, 0);
  for (const auto& s : log.steps) ++plans[s.agent];
  for (auto n : plans) EXPECT_EQ(n, 12u);
  for (std::size_t a = 0; a < 3; ++a) {
    EXPECT_GT(log.completion_times[a], 0.0);
    for (const auto& seg : log.samples[a]) EXPECT_FALSE(seg.empty());
  }
  ASSERT_EQ(log.reward_trace.size(), 13u);
  EXPECT_EQ(log.reward_trace[0], 0.0);
}

TEST(Mission, TdmaExclusiveAndPeriodic) {
  const auto cfg = small();
  const auto log = run_mission(cfg, Variant::Lawnmower, 2);
  const comms::TdmaSchedule sched{cfg.tdma_slot, cfg.team_size, 0.0};
  std::set<long long> slots;
  for (const auto& b : log.broadcasts) {
    EXPECT_EQ(tdma_active_agent(sched, b.time), static_cast<int>(b.agent));
    EXPECT_TRUE(slots.insert(std::llround(b.time / cfg.tdma_slot)).second) << "two broadcasts in one slot";
    EXPECT_LE(b.bytes.size(), comms::kPacketBytes);
  }
}

TEST(Mission, DeliveriesFollowBroadcasts) {
  const auto cfg = small();
  const auto log = run_mission(cfg, Variant::Plain, 4);
  std::size_t expected = 0;
  for (const auto& b : log.broadcasts)
    for (std::size_t r = 0; r < b.delivered.size(); ++r) {
      if (r == b.agent) {
        EXPECT_EQ(b.delivered[r], -1);
      }
      if (b.delivered[r] == 1) ++expected;
    }
  EXPECT_EQ(log.deliveries.size(), expected);
  for (const auto& d : log.deliveries) {
    EXPECT_NE(d.from, d.to);
    EXPECT_LE(d.accepted, d.measurements);
    bool found = false;
    for (const auto& b : log.broadcasts)
      if (b.agent == d.from && std::abs(b.time + cfg.channel.latency - d.time) < 1e-9 && b.delivered[d.to] == 1)
        found = true;
    EXPECT_TRUE(found);
  }
}

TEST(Mission, SoloIgnoresChannel) {
  auto a = small();
  a.team_size = 1;
  a.speeds = {1.5};
  auto b = a;
  a.channel.drop_probability = 1.0;
  b.channel.drop_probability = 0.0;
  const auto la = run_mission(a, Variant::TerminalReward, 5);
  const auto lb = run_mission(b, Variant::TerminalReward, 5);
  EXPECT_EQ(la.reward_trace, lb.reward_trace);
  ASSERT_EQ(la.steps.size(), lb.steps.size());
  for (std::size_t i = 0; i < la.steps.size(); ++i) EXPECT_EQ(la.steps[i].actions, lb.steps[i].actions);
  EXPECT_TRUE(la.deliveries.empty());
}

TEST(Mission, LosslessChannelDeliversEverything) {
  auto c = small();
  c.channel.drop_probability = 0.0;
  const auto log = run_mission(c, Variant::Lawnmower, 6);
  EXPECT_EQ(log.deliveries.size(), log.broadcasts.size() * 2);
}

TEST(Mission, LawnmowerTraceIsItsOwnNaiveLine) {
  const auto log = run_mission(small(), Variant::Lawnmower, 8);
  EXPECT_EQ(log.bound_rate(), 1.0);
}

TEST(Mission, SnapshotsAndErrorBound) {
  const auto log = run_mission(small(), Variant::TerminalReward, 9);
  const auto& prior = risk_snapshot(log, 0, Scope::Global);
  for (double v : prior.values) EXPECT_DOUBLE_EQ(v, prior.values[0]);
  for (std::size_t step : {6u, 12u}) {
    const auto& g = risk_snapshot(log, step, Scope::Global);
    for (std::size_t a = 0; a < 3; ++a) {
      const auto& f = risk_snapshot(log, step, Scope::Agent, a);
      for (std::size_t i = 0; i < g.values.size(); ++i)
        EXPECT_LE(std::abs(f.values[i] - g.values[i]), prior.values[i] + 1e-12);
    }
  }
  EXPECT_THROW(risk_snapshot(log, 3, Scope::Global), ConfigError);
}

TEST(Mission, TraceBoundedByPriorRisk) {
  const auto log = run_mission(small(), Variant::Plain, 10);
  double total = 0.0;
  for (double v : log.prior.values) total += v;
  for (double r : log.reward_trace) EXPECT_LE(r, total + 1e-9);
}

TEST(Compare, NeedsTwoSeedsAndIsDeterministic) {
  auto c = small();
  c.total_length = 4;
  c.mid_step = 2;
  EXPECT_THROW(compare_methods(c, {1}), ConfigError);
  const auto a = compare_methods(c, {1, 2}, {Variant::Plain, Variant::Lawnmower}, 2);
  const auto b = compare_methods(c, {1, 2}, {Variant::Plain, Variant::Lawnmower}, 1);
  std::ostringstream sa, sb;
  a.write_csv(sa);
  b.write_csv(sb);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_GE(a.win_fraction(0, 1), 0.0);
  EXPECT_LE(a.win_fraction(0, 1), 1.0);
}
