#pragma once

// Sequential greedy coordination: each agent plans against the latest known
// paths of the agents ahead of it in a fixed ordering.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "isobath/comms.hpp"
#include "isobath/motion.hpp"
#include "isobath/planner.hpp"

namespace isobath::coord {

struct PlanEntry {
  motion::Path path;  // short path followed by any virtual tail, as the sender intends to fly it
  double received_at = 0.0;
  std::size_t plan_epoch = 0;
};

/// Latest known path per agent id.
struct JointPlanSnapshot {
  std::vector<std::optional<PlanEntry>> entries;

  explicit JointPlanSnapshot(std::size_t team_size = 0) : entries(team_size) {}
  void update(std::size_t agent, PlanEntry entry);
};

/// Rebuilds the sender's intended path from a packet. A lawnmower terminal
/// byte extends the actions over the sender's strip up to total_length steps.
motion::Path expand_packet_path(const comms::Packet& p, std::size_t total_length, const motion::LawnmowerSpec& sender_strip,
                                const motion::MotionParams& params);

/// Fills ctx.predecessors from snapshot entries of agents strictly ahead of
/// `agent` in `ordering`, then runs the planner. Later agents are ignored.
plan::PlanResult plan_with_predecessors(std::size_t agent, const motion::AgentState& start,
                                        std::span<const std::size_t> ordering,
                                        const JointPlanSnapshot& snapshot, plan::PlanContext ctx,
                                        const plan::PlanConfig& cfg, std::uint64_t seed);

/// Expected benefit of the union of every agent's path locations.
double joint_reward(std::span<const motion::Path> paths, plan::PlanContext& ctx);

}  // namespace isobath::coord
