#pragma once

// Per-agent receding-horizon planning: expected benefit of candidate paths,
// lawnmower-augmented rewards, and UCT search over the action set.

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "isobath/gp.hpp"
#include "isobath/motion.hpp"
#include "isobath/risk.hpp"

namespace isobath::plan {

enum class RolloutPolicy { RandomAction, StraightBias };

struct PlanConfig {
  std::size_t short_horizon = 3;
  std::size_t total_length = 100;
  bool use_terminal_reward = true;
  std::size_t mcts_iterations = 60;
  double mcts_exploration = 0.7071067811865476;
  RolloutPolicy rollout_policy = RolloutPolicy::RandomAction;
  /// Evaluate the lawnmower's own first steps before searching.
  bool seed_naive = true;
  /// Nearest belief points kept per local solve inside the planner (0 = all
  /// within the local radius).
  std::size_t max_local_points = 0;
  /// Radius for reward evaluation (grid points scored and conditioning sets);
  /// 0 = the belief's local radius.
  double eval_radius = 0.0;

  void validate() const;
};

/// Everything an agent plans against. `belief` carries S and its cached
/// posterior on the evaluation grid; the planner only reads it (the cache
/// fills lazily).
struct PlanContext {
  gp::Belief* belief = nullptr;
  risk::LossParams loss;
  motion::MotionParams motion;
  motion::LawnmowerSpec lawnmower;
  double sample_spacing = 5.0;
  /// Steps already executed; the tail covers total_length - steps_done - short.
  std::size_t steps_done = 0;
  /// When set, search only expands actions whose next state lies within the
  /// area inflated by one turn diameter.
  std::optional<OperationalArea> bounds;
  /// Planned measurement locations of the agents that precede this one.
  std::vector<std::vector<Vec2>> predecessors;
};

/// Reward bookkeeping for one planning episode. Expected risks are evaluated
/// at grid points within the belief's local radius of the scored locations,
/// with local conditioning sets, so the result matches a full evaluation on
/// those points under local prediction.
class RewardEvaluator {
 public:
  RewardEvaluator(PlanContext& ctx, const PlanConfig& cfg);

  /// E r(S u P) - E r(S u P u V) summed over the grid, with V = `locations`
  /// thinned by the sparse rule.
  double path_reward(std::span<const Vec2> locations);

  struct Tail {
    double reward = 0.0;
    gp::PointSet points;  // thinned tail locations
  };
  /// Reward of the lawnmower path of `steps` actions from `from`, memoized by
  /// the state quantized to 1 m / 5 degrees.
  const Tail& tail(const motion::AgentState& from, std::size_t steps);

  /// J(short u lawnmower tail); the tail fills the remaining mission length.
  double augmented_reward(const motion::Path& short_path);

  /// Reward the search maximizes for this short path.
  double objective(const motion::Path& short_path);


  std::size_t remaining() const;
  std::size_t local_solves() const { return local_solves_; }

 private:
  // Factor of the S and predecessor points local to one grid point. It does
  // not change within an episode, so candidates only add a Schur block.
  struct BaseBlock {
    std::size_t n = 0;
    std::size_t n_s = 0;
    std::vector<double> north, east;
    std::vector<double> l;  // row-major n x n lower factor
    std::vector<double> y;  // L^-1 k(base, q)
    double head_s = 0.0;
    double head = 0.0;
    double diag_lo = 0.0, diag_hi = 0.0;
  };
  const BaseBlock& base_block(std::uint32_t g);
  double marginal(const gp::PointSet& cond, const gp::PointSet& added);
  void thin(std::span<const Vec2> locations, const gp::PointSet& cond, gp::PointSet& out) const;
  bool admissible(const Vec2& p, const gp::PointSet& cond, const gp::PointSet& out) const;

  PlanContext& ctx_;
  PlanConfig cfg_;
  gp::PointSet pred_;
  double radius_;
  double min_spacing_sq_;
  std::unordered_map<std::uint64_t, Tail> tails_;
  std::size_t local_solves_ = 0;

  std::vector<std::uint32_t> grid_idx_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t stamp_id_ = 0;
  std::vector<std::uint32_t> sel_;
  std::vector<double> north_, east_, gram_, kstar_;
  std::vector<double> w_, schur_, l22_;
  std::vector<std::pair<double, std::uint32_t>> nearest_;
  std::vector<std::int32_t> base_slot_;
  std::vector<BaseBlock> blocks_;
};

struct PlanResult {
  motion::Path path;
  double value = 0.0;        // objective of the returned path
  double naive_value = 0.0;  // augmented reward of the pure lawnmower from the start
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
};

/// UCT search over action sequences of length min(short_horizon, remaining).
/// Returns the best complete sequence seen; deterministic per seed.
PlanResult mcts_plan(const motion::AgentState& start, PlanContext& ctx, const PlanConfig& cfg, std::uint64_t seed);

/// Free-function forms used by tests and tools.
double path_reward(PlanContext& ctx, std::span<const Vec2> locations);
double augmented_reward(const motion::Path& short_path, PlanContext& ctx, const PlanConfig& cfg);

/// Jbar_n >= Jbar_naive - 1e-9.
bool bound_condition_check(double jbar_n, double jbar_naive);

}  // namespace isobath::plan
