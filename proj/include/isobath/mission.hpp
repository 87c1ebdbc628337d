#pragma once

// Discrete-event mission runner: asynchronous traversal, TDMA broadcasts over
// a lossy channel, per-agent beliefs, and the records behind reward traces and
// risk-field comparisons.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "isobath/environment.hpp"
#include "isobath/gp.hpp"
#include "isobath/motion.hpp"
#include "isobath/planner.hpp"
#include "isobath/risk.hpp"

namespace isobath::sim {

enum class Variant { TerminalReward, Plain, Lawnmower };

Variant parse_variant(std::string_view name);
std::string_view variant_name(Variant v);

struct ChannelModel {
  double drop_probability = 0.3;  // independent per recipient
  double latency = 1.0;           // seconds from slot start to delivery

  void validate() const;
};

struct MissionConfig {
  OperationalArea area{{0.0, 0.0}, {600.0, 1000.0}};
  env::AnalyticSurface surface;
  /// Uniform +-jitter (m) applied to the basin centers per seed.
  double center_jitter = 50.0;
  /// Gridded truth instead of the analytic family when non-empty.
  std::string bathymetry_csv;

  gp::GpModel model{{50.0, 25.0, 0.5}, 15.0};
  double min_spacing = 25.0;
  double local_radius = 150.0;
  double grid_resolution = 25.0;
  risk::LossParams loss;

  std::size_t team_size = 3;
  std::vector<std::size_t> ordering;  // empty = id order
  std::vector<double> speeds{1.5, 1.4, 1.6};
  std::vector<motion::AgentState> starts;  // empty = start of each agent's first track
  motion::MotionParams motion;
  env::SensorModel sensor;
  ChannelModel channel;
  double tdma_slot = 10.0;

  std::size_t total_length = 100;
  std::size_t terminal_horizon = 3;
  std::size_t plain_horizon = 10;
  plan::PlanConfig planner;  // horizon, length and terminal flag are set per variant
  double swath = 0.0;        // 0 = U-turn spacing

  std::size_t mid_step = 50;

  /// Throws ConfigError.
  void validate() const;
  std::vector<std::size_t> team_ordering() const;
  double agent_speed(std::size_t agent) const;
  double lawnmower_swath() const;
  motion::LawnmowerSpec strip(std::size_t agent) const;
  motion::AgentState start_state(std::size_t agent) const;
  plan::PlanConfig plan_config(Variant v) const;
};

/// Parses a JSON document; unknown keys are errors. Throws ConfigError.
MissionConfig load_config(std::istream& is);
MissionConfig load_config_file(const std::string& path);

/// Applies ISOBATH_<SECTION>__<KEY>=<value> environment overrides. Keys are
/// matched case-insensitively against the JSON paths; values are parsed as
/// JSON, falling back to a plain string.
void apply_env_overrides(MissionConfig& cfg, char** envp);

/// The same document that load_config accepts.
std::string config_to_json(const MissionConfig& cfg);

struct StepRecord {
  double time = 0.0;
  std::size_t agent = 0;
  std::size_t step = 0;  // actions executed before this plan
  motion::AgentState state;
  std::vector<std::uint8_t> actions;
  double value = 0.0;
  double naive_value = 0.0;
  bool bound_ok = true;
  std::size_t evaluations = 0;
  std::size_t belief_size = 0;
};

struct BroadcastRecord {
  double time = 0.0;
  std::size_t agent = 0;
  std::vector<std::uint8_t> bytes;
  std::vector<std::int8_t> delivered;  // per recipient: 1 delivered, 0 dropped, -1 sender
};

struct DeliveryRecord {
  double time = 0.0;
  std::size_t from = 0;
  std::size_t to = 0;
  std::size_t measurements = 0;
  std::size_t accepted = 0;
};

struct Snapshot {
  std::size_t step = 0;
  double time = 0.0;
  risk::RiskField global;
  std::vector<risk::RiskField> agents;
};

struct MissionLog {
  Variant variant = Variant::TerminalReward;
  std::uint64_t seed = 0;
  std::size_t team_size = 0;
  std::vector<StepRecord> steps;
  std::vector<BroadcastRecord> broadcasts;
  std::vector<DeliveryRecord> deliveries;
  /// samples[agent][k]: noisy samples gathered on segment k (k = 0 also
  /// holds the sample at the start position).
  std::vector<std::vector<std::vector<gp::Sample>>> samples;
  std::vector<double> completion_times;  // per agent
  risk::RiskField prior;
  std::vector<Snapshot> snapshots;       // mid-mission then end
  std::vector<double> reward_trace;      // index = joint step
  double end_time = 0.0;

  /// One JSON object per line: steps, broadcasts, deliveries, trace, summary.
  void write_ndjson(std::ostream& os) const;
  double final_reward() const { return reward_trace.empty() ? 0.0 : reward_trace.back(); }
  double bound_rate() const;
};

/// Truth surface for this seed (center jitter applied).
env::Bathymetry mission_bathymetry(const MissionConfig& cfg, std::uint64_t seed);

MissionLog run_mission(const MissionConfig& cfg, Variant variant, std::uint64_t seed);

/// Realized sum over the eval grid of r(prior) - r(D_s), where D_s holds every
/// agent's samples from its first s segments, inserted agent by agent per step.
std::vector<double> accumulated_reward_trace(const MissionLog& log, const MissionConfig& cfg);

enum class Scope { Global, Agent };

/// Bayes' risk field at step 0 (prior) or at a captured snapshot step.
/// Throws ConfigError for steps that were not captured.
const risk::RiskField& risk_snapshot(const MissionLog& log, std::size_t step, Scope scope, std::size_t agent = 0);

struct SeedRow {
  std::uint64_t seed = 0;
  std::vector<double> final_reward;  // per variant, in `variants` order
  std::vector<double> bound_rate;
};

struct Summary {
  std::vector<Variant> variants;
  std::vector<SeedRow> rows;

  /// Fraction of seeds where variant a's final reward >= variant b's.
  double win_fraction(std::size_t a, std::size_t b) const;
  double mean_final(std::size_t v) const;
  void write_csv(std::ostream& os) const;
};

/// Runs every variant on every seed; `on_log` sees each finished log.
Summary compare_methods(const MissionConfig& cfg, const std::vector<std::uint64_t>& seeds,
                        const std::vector<Variant>& variants = {Variant::TerminalReward, Variant::Plain,
                                                                Variant::Lawnmower},
                        unsigned threads = 1,
                        const std::function<void(const MissionLog&)>& on_log = {});

/// compare_methods without the two-seed minimum.
Summary run_experiment(const MissionConfig& cfg, const std::vector<std::uint64_t>& seeds,
                       const std::vector<Variant>& variants, unsigned threads,
                       const std::function<void(const MissionLog&)>& on_log = {});

}  // namespace isobath::sim
