#include "isobath/mission.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <queue>
#include <random>
#include <thread>

#include "json.hpp"

#include "isobath/comms.hpp"
#include "isobath/coordination.hpp"
#include "isobath/errors.hpp"

namespace isobath::sim {

namespace {

// Independent generator streams split off the master seed.
enum Stream : std::uint64_t { kSensor = 1, kChannel = 2, kPlanner = 3, kEnvironment = 4 };

std::uint64_t substream(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

risk::RiskField field_from(gp::Belief& b, const risk::LossParams& loss) {
  risk::RiskField f;
  f.grid = b.grid().points();
  f.values.resize(f.grid.size());
  for (std::size_t i = 0; i < f.grid.size(); ++i) {
    const auto& p = b.grid_prediction(i);
    f.values[i] = risk::bayes_risk(p.mean, p.variance, loss);
  }
  return f;
}

std::string hex(const std::vector<std::uint8_t>& bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 15]);
  }
  return s;
}

nlohmann::json state_json(const motion::AgentState& s) { return {s.heading, s.north, s.east}; }

enum class EventKind : int { Delivery = 0, Completion = 1, Broadcast = 2 };

struct Event {
  double time;
  EventKind kind;
  std::size_t rank;  // ordering rank of the agent involved
  std::uint64_t seq;
  std::size_t agent;
  std::size_t payload;  // broadcast index for deliveries

  bool operator>(const Event& o) const {
    if (time != o.time) return time > o.time;
    if (kind != o.kind) return kind > o.kind;
    if (rank != o.rank) return rank > o.rank;
    return seq > o.seq;
  }
};

struct AgentRuntime {
  motion::AgentState state;
  motion::AgentState next;
  std::vector<Vec2> segment;
  gp::DataSet own;
  std::unique_ptr<gp::Belief> belief;
  comms::CommLog comm;
  coord::JointPlanSnapshot known;
  motion::Path plan;
  std::size_t plan_epoch = 0;
  std::size_t executed = 0;
  bool done = false;
  std::mt19937_64 sensor_rng;
  double speed = 1.0;
  motion::LawnmowerSpec strip;
  std::size_t rank = 0;
};

class Mission {
 public:
  Mission(const MissionConfig& cfg, Variant variant, std::uint64_t seed)
      : cfg_(cfg),
        variant_(variant),
        seed_(seed),
        truth_(mission_bathymetry(cfg, seed)),
        grid_(std::make_shared<RegularGrid>(cfg.area, cfg.grid_resolution)),
        ordering_(cfg.team_ordering()),
        channel_rng_(substream(seed, kChannel)),
        global_(cfg.model, cfg.min_spacing, cfg.local_radius, grid_),
        tdma_{cfg.tdma_slot, cfg.team_size, 0.0} {
    log_.variant = variant;
    log_.seed = seed;
    log_.team_size = cfg.team_size;
    log_.samples.assign(cfg.team_size, std::vector<std::vector<gp::Sample>>(cfg.total_length));
    log_.completion_times.assign(cfg.team_size, 0.0);
    agents_.resize(cfg.team_size);
    for (std::size_t a = 0; a < cfg.team_size; ++a) {
      AgentRuntime& ag = agents_[a];
      ag.state = cfg.start_state(a);
      ag.own = gp::DataSet(cfg.min_spacing);
      ag.belief = std::make_unique<gp::Belief>(cfg.model, cfg.min_spacing, cfg.local_radius, grid_);
      ag.known = coord::JointPlanSnapshot(cfg.team_size);
      ag.sensor_rng.seed(substream(seed, kSensor, a));
      ag.speed = cfg.agent_speed(a);
      ag.strip = cfg.strip(a);
      ag.rank = static_cast<std::size_t>(std::find(ordering_.begin(), ordering_.end(), a) - ordering_.begin());
    }
  }

  MissionLog run() {
    log_.prior = field_from(global_, cfg_.loss);
    for (std::size_t a : ordering_) {
      AgentRuntime& ag = agents_[a];
      collect(a, 0, {ag.state.position()});
      plan_and_go(a, 0.0);
    }
    push(0.0, EventKind::Broadcast, 0, 0);

    double now = 0.0;
    while (!queue_.empty()) {
      const Event e = queue_.top();
      queue_.pop();
      now = e.time;
      switch (e.kind) {
        case EventKind::Delivery: deliver(e.agent, e.payload, now); break;
        case EventKind::Completion: complete(e.agent, now); break;
        case EventKind::Broadcast: broadcast(now); break;
      }
    }
    log_.end_time = now;
    if (!mid_captured_ && cfg_.mid_step < cfg_.total_length) capture(cfg_.mid_step, now);
    capture(cfg_.total_length, now);
    log_.reward_trace = accumulated_reward_trace(log_, cfg_);
    return std::move(log_);
  }

 private:
  void push(double t, EventKind kind, std::size_t agent, std::size_t payload) {
    const std::size_t rank = kind == EventKind::Broadcast ? 0 : agents_[agent].rank;
    queue_.push(Event{t, kind, rank, seq_++, agent, payload});
  }

  void collect(std::size_t a, std::size_t segment, const std::vector<Vec2>& points) {
    AgentRuntime& ag = agents_[a];
    auto& out = log_.samples[a][segment];
    for (const auto& p : points) {
      const gp::Sample s = env::sample_depth(truth_, cfg_.sensor, p, ag.sensor_rng);
      out.push_back(s);
      global_.insert(s);
      if (ag.own.insert(s) == gp::InsertDecision::Accepted) ag.comm.record(s);
      ag.belief->insert(s);
    }
  }

  void plan_and_go(std::size_t a, double t) {
    AgentRuntime& ag = agents_[a];
    if (ag.executed >= cfg_.total_length) {
      ag.done = true;
      log_.completion_times[a] = t;
      return;
    }
    const std::size_t remaining = cfg_.total_length - ag.executed;
    motion::MotionParams mp = cfg_.motion;
    mp.speed = ag.speed;

    StepRecord rec;
    rec.time = t;
    rec.agent = a;
    rec.step = ag.executed;
    rec.state = ag.state;
    if (variant_ == Variant::Lawnmower) {
      ag.plan = motion::lawnmower_path(ag.state, remaining, ag.strip, mp);
      rec.actions.assign(ag.plan.actions.begin(), ag.plan.actions.begin() + 1);
    } else {
      plan::PlanContext ctx;
      ctx.belief = ag.belief.get();
      ctx.loss = cfg_.loss;
      ctx.motion = mp;
      ctx.lawnmower = ag.strip;
      ctx.sample_spacing = cfg_.sensor.sample_spacing;
      ctx.steps_done = ag.executed;
      ctx.bounds = cfg_.area;
      const plan::PlanConfig pc = cfg_.plan_config(variant_);
      const auto res = coord::plan_with_predecessors(a, ag.state, ordering_, ag.known, ctx, pc,
                                                     substream(seed_, kPlanner, a * 100003 + ag.executed));
      ag.plan = res.path;
      rec.actions = res.path.actions;
      rec.value = res.value;
      rec.naive_value = res.naive_value;
      rec.bound_ok = plan::bound_condition_check(res.value, res.naive_value);
      rec.evaluations = res.evaluations;
    }
    rec.belief_size = ag.belief->data().size();
    ag.plan_epoch = ag.executed;
    log_.steps.push_back(std::move(rec));

    ag.next = motion::step_index(ag.state, ag.plan.actions.front(), mp);
    ag.segment.clear();
    motion::chord_samples(ag.state.position(), ag.next.position(), cfg_.sensor.sample_spacing, ag.segment);
    const double len = distance(ag.state.position(), ag.next.position());
    push(t + len / ag.speed, EventKind::Completion, a, 0);
  }

  void complete(std::size_t a, double t) {
    AgentRuntime& ag = agents_[a];
    collect(a, ag.executed, ag.segment);
    ag.state = ag.next;
    ++ag.executed;
    if (!mid_captured_ && cfg_.mid_step < cfg_.total_length) {
      const bool all = std::all_of(agents_.begin(), agents_.end(),
                                   [&](const AgentRuntime& x) { return x.executed >= cfg_.mid_step; });
      if (all) capture(cfg_.mid_step, t);
    }
    plan_and_go(a, t);
  }

  void broadcast(double t) {
    if (std::all_of(agents_.begin(), agents_.end(), [](const AgentRuntime& x) { return x.done; })) return;
    const int owner = comms::tdma_active_agent(tdma_, t);
    const auto a = static_cast<std::size_t>(owner);
    AgentRuntime& ag = agents_[a];

    comms::Packet p;
    p.agent_id = static_cast<std::uint8_t>(a);
    p.plan_epoch = static_cast<std::uint8_t>(ag.plan_epoch);
    p.heading = static_cast<float>(ag.plan.start.heading);
    p.north = static_cast<float>(ag.plan.start.north);
    p.east = static_cast<float>(ag.plan.start.east);
    if (variant_ != Variant::Lawnmower) p.actions = ag.plan.actions;
    p.lawnmower_tail = variant_ != Variant::Plain;
    for (const auto& s : comms::select_measurements(ag.comm, comms::measurement_capacity(p.actions.size())))
      p.measurements.push_back({static_cast<float>(s.location.north), static_cast<float>(s.location.east),
                                static_cast<float>(s.value)});

    BroadcastRecord rec;
    rec.time = t;
    rec.agent = a;
    rec.bytes = comms::encode_packet(p);
    rec.delivered.assign(cfg_.team_size, -1);
    std::bernoulli_distribution drop(cfg_.channel.drop_probability);
    const std::size_t index = log_.broadcasts.size();
    for (std::size_t r = 0; r < cfg_.team_size; ++r) {
      if (r == a) continue;
      const bool lost = drop(channel_rng_);
      rec.delivered[r] = lost ? 0 : 1;
      if (!lost) push(t + cfg_.channel.latency, EventKind::Delivery, r, index);
    }
    log_.broadcasts.push_back(std::move(rec));
    push(t + cfg_.tdma_slot, EventKind::Broadcast, 0, 0);
  }

  void deliver(std::size_t to, std::size_t index, double t) {
    const BroadcastRecord& b = log_.broadcasts[index];
    const comms::Packet p = comms::decode_packet(b.bytes);
    AgentRuntime& ag = agents_[to];
    motion::MotionParams mp = cfg_.motion;
    mp.speed = cfg_.agent_speed(b.agent);
    coord::PlanEntry entry;
    entry.path = coord::expand_packet_path(p, cfg_.total_length, cfg_.strip(b.agent), mp);
    entry.received_at = t;
    entry.plan_epoch = p.plan_epoch;
    ag.known.update(b.agent, std::move(entry));

    DeliveryRecord rec{t, b.agent, to, p.measurements.size(), 0};
    for (const auto& m : p.measurements)
      if (ag.belief->insert({{m.north, m.east}, m.depth}) == gp::InsertDecision::Accepted) ++rec.accepted;
    log_.deliveries.push_back(rec);
  }

  void capture(std::size_t step, double t) {
    if (step == cfg_.mid_step) mid_captured_ = true;
    Snapshot s;
    s.step = step;
    s.time = t;
    s.global = field_from(global_, cfg_.loss);
    for (auto& ag : agents_) s.agents.push_back(field_from(*ag.belief, cfg_.loss));
    log_.snapshots.push_back(std::move(s));
  }

  const MissionConfig& cfg_;
  Variant variant_;
  std::uint64_t seed_;
  env::Bathymetry truth_;
  std::shared_ptr<const RegularGrid> grid_;
  std::vector<std::size_t> ordering_;
  std::mt19937_64 channel_rng_;
  gp::Belief global_;  // every collected sample, in collection order
  comms::TdmaSchedule tdma_;
  std::vector<AgentRuntime> agents_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  bool mid_captured_ = false;
  MissionLog log_;
};

}  // namespace

Variant parse_variant(std::string_view name) {
  if (name == "terminal") return Variant::TerminalReward;
  if (name == "plain") return Variant::Plain;
  if (name == "lawnmower") return Variant::Lawnmower;
  throw ConfigError("unknown variant '" + std::string(name) + "' (terminal, plain, lawnmower)");
}

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::TerminalReward: return "terminal";
    case Variant::Plain: return "plain";
    case Variant::Lawnmower: return "lawnmower";
  }
  return "?";
}

void ChannelModel::validate() const {
  if (!(drop_probability >= 0.0 && drop_probability <= 1.0))
    throw ConfigError("channel drop_probability must be in [0, 1]");
  if (!(latency >= 0.0) || !std::isfinite(latency)) throw ConfigError("channel latency must be >= 0");
}

void MissionConfig::validate() const {
  area.validate();
  model.validate();
  loss.validate();
  motion.validate();
  sensor.validate();
  channel.validate();
  if (team_size < 1) throw ConfigError("team size must be >= 1");
  if (team_size > 255) throw ConfigError("team size must fit the packet's agent id byte");
  if (total_length < 1) throw ConfigError("total_length must be >= 1");
  if (total_length > 255) throw ConfigError("total_length must fit the packet's plan epoch byte");
  if (terminal_horizon < 1 || terminal_horizon > total_length)
    throw ConfigError("terminal_horizon must be in [1, total_length]");
  if (plain_horizon < 1 || plain_horizon > total_length)
    throw ConfigError("plain_horizon must be in [1, total_length]");
  if (comms::measurement_capacity(std::max(terminal_horizon, plain_horizon)) == 0)
    throw ConfigError("planning horizon leaves no room for measurements in a packet");
  if (!(min_spacing >= 0.0) || !std::isfinite(min_spacing)) throw ConfigError("min_spacing must be >= 0");
  if (!(local_radius > 0.0) || !std::isfinite(local_radius)) throw ConfigError("local_radius must be > 0");
  if (!(grid_resolution > 0.0) || !std::isfinite(grid_resolution))
    throw ConfigError("grid_resolution must be > 0");
  if (!(tdma_slot > 0.0) || !std::isfinite(tdma_slot)) throw ConfigError("tdma slot must be > 0");
  if (!(center_jitter >= 0.0) || !std::isfinite(center_jitter)) throw ConfigError("center_jitter must be >= 0");
  if (!(swath >= 0.0) || !std::isfinite(swath)) throw ConfigError("swath must be >= 0");
  if (speeds.empty()) throw ConfigError("at least one speed is required");
  for (double v : speeds)
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("speeds must be > 0");
  if (!ordering.empty()) {
    std::vector<std::size_t> sorted = ordering;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
      if (sorted[i] != i || sorted.size() != team_size)
        throw ConfigError("ordering must be a permutation of 0..team_size-1");
  }
  if (!starts.empty() && starts.size() != team_size) throw ConfigError("starts must list one state per agent");
  for (const auto& s : starts)
    if (!area.contains(s.position()) || !std::isfinite(s.heading))
      throw ConfigError("start states must lie inside the area");
  plan_config(Variant::TerminalReward).validate();
  plan_config(Variant::Plain).validate();
}

std::vector<std::size_t> MissionConfig::team_ordering() const {
  if (!ordering.empty()) return ordering;
  std::vector<std::size_t> ids(team_size);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  return ids;
}

double MissionConfig::agent_speed(std::size_t agent) const { return speeds[agent % speeds.size()]; }

double MissionConfig::lawnmower_swath() const { return swath > 0.0 ? swath : motion::default_swath(motion); }

motion::LawnmowerSpec MissionConfig::strip(std::size_t agent) const {
  return motion::LawnmowerSpec::for_agent(area, agent, team_size, lawnmower_swath());
}

motion::AgentState MissionConfig::start_state(std::size_t agent) const {
  if (!starts.empty()) return starts[agent];
  const motion::LawnmowerSpec s = strip(agent);
  const double width = s.strip_hi - s.strip_lo;
  const double inset = std::clamp(std::min(s.swath / 2.0, (width - s.swath) / 2.0), 0.0, width / 2.0);
  const double across = s.strip_lo + inset;
  if (s.along_east) return {0.0, across, area.min_corner.east + motion.turn_radius};
  return {deg_to_rad(90.0), area.min_corner.north + motion.turn_radius, across};
}

plan::PlanConfig MissionConfig::plan_config(Variant v) const {
  plan::PlanConfig pc = planner;
  pc.total_length = total_length;
  pc.use_terminal_reward = v == Variant::TerminalReward;
  pc.short_horizon = v == Variant::Plain ? plain_horizon : terminal_horizon;
  return pc;
}

env::Bathymetry mission_bathymetry(const MissionConfig& cfg, std::uint64_t seed) {
  if (!cfg.bathymetry_csv.empty()) {
    std::ifstream in(cfg.bathymetry_csv);
    if (!in) throw ConfigError("cannot open bathymetry file '" + cfg.bathymetry_csv + "'");
    return env::Bathymetry(env::GriddedSurface::load_csv(in));
  }
  env::AnalyticSurface s = cfg.surface;
  if (cfg.center_jitter > 0.0) {
    std::mt19937_64 rng(substream(seed, kEnvironment));
    std::uniform_real_distribution<double> u(-cfg.center_jitter, cfg.center_jitter);
    s.center.north += u(rng);
    s.center.east += u(rng);
    s.center2.north += u(rng);
    s.center2.east += u(rng);
  }
  return env::synthetic_lake(s, cfg.area, cfg.loss.level);
}

MissionLog run_mission(const MissionConfig& cfg, Variant variant, std::uint64_t seed) {
  cfg.validate();
  return Mission(cfg, variant, seed).run();
}

std::vector<double> accumulated_reward_trace(const MissionLog& log, const MissionConfig& cfg) {
  auto grid = std::make_shared<RegularGrid>(cfg.area, cfg.grid_resolution);
  gp::Belief belief(cfg.model, cfg.min_spacing, cfg.local_radius, grid);
  const double prior = risk::bayes_risk(cfg.model.prior_mean, cfg.model.kernel.signal_variance, cfg.loss);
  std::size_t steps = 0;
  for (const auto& per_agent : log.samples) steps = std::max(steps, per_agent.size());
  std::vector<double> trace{0.0};
  for (std::size_t s = 0; s < steps; ++s) {
    for (const auto& per_agent : log.samples)
      if (s < per_agent.size())
        for (const auto& x : per_agent[s]) belief.insert(x);
    double total = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i) {
      const auto& p = belief.grid_prediction(i);
      total += prior - risk::bayes_risk(p.mean, p.variance, cfg.loss);
    }
    trace.push_back(total);
  }
  return trace;
}

const risk::RiskField& risk_snapshot(const MissionLog& log, std::size_t step, Scope scope, std::size_t agent) {
  if (step == 0) return log.prior;
  for (const auto& s : log.snapshots) {
    if (s.step != step) continue;
    if (scope == Scope::Global) return s.global;
    if (agent >= s.agents.size()) throw ConfigError("snapshot agent out of range");
    return s.agents[agent];
  }
  throw ConfigError("no risk snapshot captured at step " + std::to_string(step));
}

double MissionLog::bound_rate() const {
  if (steps.empty()) return 1.0;
  std::size_t ok = 0;
  for (const auto& s : steps) ok += s.bound_ok ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(steps.size());
}

void MissionLog::write_ndjson(std::ostream& os) const {
  using nlohmann::json;
  os << json{{"type", "mission"}, {"variant", variant_name(variant)}, {"seed", seed}, {"team_size", team_size}}.dump()
     << '\n';
  for (const auto& s : steps)
    os << json{{"type", "plan"},
               {"time", s.time},
               {"agent", s.agent},
               {"step", s.step},
               {"state", state_json(s.state)},
               {"actions", s.actions},
               {"value", s.value},
               {"naive_value", s.naive_value},
               {"bound_ok", s.bound_ok},
               {"evaluations", s.evaluations},
               {"belief_size", s.belief_size}}
              .dump()
       << '\n';
  for (const auto& b : broadcasts)
    os << json{{"type", "broadcast"},
               {"time", b.time},
               {"agent", b.agent},
               {"size", b.bytes.size()},
               {"bytes", hex(b.bytes)},
               {"delivered", b.delivered}}
              .dump()
       << '\n';
  for (const auto& d : deliveries)
    os << json{{"type", "delivery"},  {"time", d.time},         {"from", d.from},
               {"to", d.to},          {"measurements", d.measurements}, {"accepted", d.accepted}}
              .dump()
       << '\n';
  for (std::size_t s = 0; s < reward_trace.size(); ++s)
    os << json{{"type", "trace"}, {"step", s}, {"reward", reward_trace[s]}}.dump() << '\n';
  std::size_t samples_total = 0;
  for (const auto& a : samples)
    for (const auto& seg : a) samples_total += seg.size();
  os << json{{"type", "summary"},
             {"end_time", end_time},
             {"completion_times", completion_times},
             {"samples", samples_total},
             {"final_reward", final_reward()},
             {"bound_rate", bound_rate()}}
            .dump()
     << '\n';
}

double Summary::win_fraction(std::size_t a, std::size_t b) const {
  if (rows.empty()) return 0.0;
  std::size_t wins = 0;
  for (const auto& r : rows) wins += r.final_reward[a] >= r.final_reward[b] ? 1 : 0;
  return static_cast<double>(wins) / static_cast<double>(rows.size());
}

double Summary::mean_final(std::size_t v) const {
  if (rows.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : rows) sum += r.final_reward[v];
  return sum / static_cast<double>(rows.size());
}

void Summary::write_csv(std::ostream& os) const {
  os << "seed";
  for (auto v : variants) os << ',' << variant_name(v) << "_final";
  for (auto v : variants) os << ',' << variant_name(v) << "_bound_rate";
  os << '\n';
  char buf[64];
  for (const auto& r : rows) {
    os << r.seed;
    for (double x : r.final_reward) {
      std::snprintf(buf, sizeof buf, ",%.9g", x);
      os << buf;
    }
    for (double x : r.bound_rate) {
      std::snprintf(buf, sizeof buf, ",%.6f", x);
      os << buf;
    }
    os << '\n';
  }
}

Summary compare_methods(const MissionConfig& cfg, const std::vector<std::uint64_t>& seeds,
                        const std::vector<Variant>& variants, unsigned threads,
                        const std::function<void(const MissionLog&)>& on_log) {
  if (seeds.size() < 2) throw ConfigError("compare_methods needs at least two seeds");
  return run_experiment(cfg, seeds, variants, threads, on_log);
}

Summary run_experiment(const MissionConfig& cfg, const std::vector<std::uint64_t>& seeds,
                       const std::vector<Variant>& variants, unsigned threads,
                       const std::function<void(const MissionLog&)>& on_log) {
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (variants.empty()) throw ConfigError("compare_methods needs at least one variant");
  cfg.validate();

  Summary out;
  out.variants = variants;
  out.rows.resize(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    out.rows[i].seed = seeds[i];
    out.rows[i].final_reward.assign(variants.size(), 0.0);
    out.rows[i].bound_rate.assign(variants.size(), 0.0);
  }

  const std::size_t jobs = seeds.size() * variants.size();
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      const std::size_t si = j / variants.size();
      const std::size_t vi = j % variants.size();
      try {
        MissionLog log = run_mission(cfg, variants[vi], seeds[si]);
        std::lock_guard lock(mu);
        out.rows[si].final_reward[vi] = log.final_reward();
        out.rows[si].bound_rate[vi] = log.bound_rate();
        if (on_log) on_log(log);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = jobs;
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace isobath::sim
