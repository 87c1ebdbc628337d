#include "isobath/coordination.hpp"

#include <algorithm>

#include "isobath/errors.hpp"

namespace isobath::coord {

void JointPlanSnapshot::update(std::size_t agent, PlanEntry entry) {
  if (agent >= entries.size()) throw ConfigError("snapshot agent id out of range");
  entries[agent] = std::move(entry);
}

motion::Path expand_packet_path(const comms::Packet& p, std::size_t total_length, const motion::LawnmowerSpec& sender_strip,
                                const motion::MotionParams& params) {
  const motion::AgentState start{wrap_angle(p.heading), p.north, p.east};
  motion::Path path = motion::Path::build(start, p.actions, params);
  if (!p.lawnmower_tail) return path;
  const std::size_t used = static_cast<std::size_t>(p.plan_epoch) + p.actions.size();
  if (used >= total_length) return path;
  const motion::Path tail = motion::lawnmower_path(path.final_state(), total_length - used, sender_strip, params);
  path.actions.insert(path.actions.end(), tail.actions.begin(), tail.actions.end());
  path.states.insert(path.states.end(), tail.states.begin() + 1, tail.states.end());
  return path;
}

plan::PlanResult plan_with_predecessors(std::size_t agent, const motion::AgentState& start,
                                        std::span<const std::size_t> ordering,
                                        const JointPlanSnapshot& snapshot, plan::PlanContext ctx,
                                        const plan::PlanConfig& cfg, std::uint64_t seed) {
  const auto me = std::find(ordering.begin(), ordering.end(), agent);
  if (me == ordering.end()) throw ConfigError("agent is not in the team ordering");
  ctx.predecessors.clear();
  for (auto it = ordering.begin(); it != me; ++it) {
    if (*it >= snapshot.entries.size() || !snapshot.entries[*it]) continue;
    const PlanEntry& e = *snapshot.entries[*it];
    if (e.path.actions.empty()) continue;
    ctx.predecessors.push_back(motion::sample_locations(e.path, ctx.sample_spacing));
  }
  return plan::mcts_plan(start, ctx, cfg, seed);
}

double joint_reward(std::span<const motion::Path> paths, plan::PlanContext& ctx) {
  std::vector<Vec2> all;
  for (const auto& p : paths) {
    const auto locs = motion::sample_locations(p, ctx.sample_spacing);
    all.insert(all.end(), locs.begin(), locs.end());
  }
  if (all.empty()) return 0.0;
  return plan::path_reward(ctx, all);
}

}  // namespace isobath::coord
