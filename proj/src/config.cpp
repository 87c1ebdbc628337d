// JSON mission configuration and ISOBATH_* environment overrides.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "isobath/errors.hpp"
#include "isobath/mission.hpp"

namespace isobath::sim {

using nlohmann::json;

namespace {

json vec2(const Vec2& p) { return {p.north, p.east}; }

Vec2 to_vec2(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(std::string(what) + " must be [north, east]");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::string rollout_name(plan::RolloutPolicy p) {
  return p == plan::RolloutPolicy::StraightBias ? "straight" : "random";
}

plan::RolloutPolicy parse_rollout(const std::string& s) {
  if (s == "random") return plan::RolloutPolicy::RandomAction;
  if (s == "straight") return plan::RolloutPolicy::StraightBias;
  throw ConfigError("unknown rollout policy '" + s + "' (random, straight)");
}

json to_json(const MissionConfig& c) {
  json starts = json::array();
  for (const auto& s : c.starts) starts.push_back({rad_to_deg(s.heading), s.north, s.east});
  return {
      {"area",
       {{"north_min", c.area.min_corner.north},
        {"north_max", c.area.max_corner.north},
        {"east_min", c.area.min_corner.east},
        {"east_max", c.area.max_corner.east}}},
      {"bathymetry",
       {{"family", env::family_name(c.surface.family)},
        {"offset", c.surface.offset},
        {"slope_north", c.surface.slope_north},
        {"slope_east", c.surface.slope_east},
        {"background", c.surface.background},
        {"center", vec2(c.surface.center)},
        {"peak_depth", c.surface.peak_depth},
        {"width", c.surface.width},
        {"center2", vec2(c.surface.center2)},
        {"peak_depth2", c.surface.peak_depth2},
        {"width2", c.surface.width2},
        {"ridge_heading_deg", rad_to_deg(c.surface.ridge_heading)},
        {"center_jitter", c.center_jitter},
        {"csv", c.bathymetry_csv}}},
      {"gp",
       {{"length_scale", c.model.kernel.length_scale},
        {"signal_variance", c.model.kernel.signal_variance},
        {"noise_std", c.model.kernel.noise_std},
        {"prior_mean", c.model.prior_mean},
        {"condition_cap", c.model.condition_cap},
        {"min_spacing", c.min_spacing},
        {"local_radius", c.local_radius},
        {"grid_resolution", c.grid_resolution}}},
      {"loss", {{"level", c.loss.level}, {"c1", c.loss.cost_deep_wrong}, {"c2", c.loss.cost_shallow_wrong}}},
      {"team", {{"size", c.team_size}, {"ordering", c.ordering}, {"speeds", c.speeds}, {"starts", starts}}},
      {"motion", {{"turn_radius", c.motion.turn_radius}, {"theta_max_deg", rad_to_deg(c.motion.theta_max)}}},
      {"sensor", {{"noise_std", c.sensor.noise_std}, {"sample_spacing", c.sensor.sample_spacing}}},
      {"channel",
       {{"drop_probability", c.channel.drop_probability},
        {"latency", c.channel.latency},
        {"tdma_slot", c.tdma_slot}}},
      {"planner",
       {{"total_length", c.total_length},
        {"terminal_horizon", c.terminal_horizon},
        {"plain_horizon", c.plain_horizon},
        {"mcts_iterations", c.planner.mcts_iterations},
        {"exploration", c.planner.mcts_exploration},
        {"rollout", rollout_name(c.planner.rollout_policy)},
        {"seed_naive", c.planner.seed_naive},
        {"max_local_points", c.planner.max_local_points},
        {"eval_radius", c.planner.eval_radius},
        {"swath", c.swath}}},
      {"mission", {{"mid_step", c.mid_step}}},
  };
}

MissionConfig from_json(const json& j) {
  MissionConfig c;
  const auto& a = j.at("area");
  c.area = {{a.at("north_min").get<double>(), a.at("east_min").get<double>()},
            {a.at("north_max").get<double>(), a.at("east_max").get<double>()}};

  const auto& b = j.at("bathymetry");
  c.surface.family = env::parse_family(b.at("family").get<std::string>());
  c.surface.offset = b.at("offset").get<double>();
  c.surface.slope_north = b.at("slope_north").get<double>();
  c.surface.slope_east = b.at("slope_east").get<double>();
  c.surface.background = b.at("background").get<double>();
  c.surface.center = to_vec2(b.at("center"), "bathymetry.center");
  c.surface.peak_depth = b.at("peak_depth").get<double>();
  c.surface.width = b.at("width").get<double>();
  c.surface.center2 = to_vec2(b.at("center2"), "bathymetry.center2");
  c.surface.peak_depth2 = b.at("peak_depth2").get<double>();
  c.surface.width2 = b.at("width2").get<double>();
  c.surface.ridge_heading = deg_to_rad(b.at("ridge_heading_deg").get<double>());
  c.center_jitter = b.at("center_jitter").get<double>();
  c.bathymetry_csv = b.at("csv").get<std::string>();

  const auto& g = j.at("gp");
  c.model.kernel.length_scale = g.at("length_scale").get<double>();
  c.model.kernel.signal_variance = g.at("signal_variance").get<double>();
  c.model.kernel.noise_std = g.at("noise_std").get<double>();
  c.model.prior_mean = g.at("prior_mean").get<double>();
  c.model.condition_cap = g.at("condition_cap").get<double>();
  c.min_spacing = g.at("min_spacing").get<double>();
  c.local_radius = g.at("local_radius").get<double>();
  c.grid_resolution = g.at("grid_resolution").get<double>();

  const auto& l = j.at("loss");
  c.loss.level = l.at("level").get<double>();
  c.loss.cost_deep_wrong = l.at("c1").get<double>();
  c.loss.cost_shallow_wrong = l.at("c2").get<double>();

  const auto& t = j.at("team");
  c.team_size = t.at("size").get<std::size_t>();
  c.ordering = t.at("ordering").get<std::vector<std::size_t>>();
  c.speeds = t.at("speeds").get<std::vector<double>>();
  for (const auto& s : t.at("starts")) {
    if (!s.is_array() || s.size() != 3) throw ConfigError("team.starts entries must be [heading_deg, north, east]");
    c.starts.push_back({wrap_angle(deg_to_rad(s[0].get<double>())), s[1].get<double>(), s[2].get<double>()});
  }

  const auto& m = j.at("motion");
  c.motion.turn_radius = m.at("turn_radius").get<double>();
  c.motion.theta_max = deg_to_rad(m.at("theta_max_deg").get<double>());

  const auto& s = j.at("sensor");
  c.sensor.noise_std = s.at("noise_std").get<double>();
  c.sensor.sample_spacing = s.at("sample_spacing").get<double>();

  const auto& ch = j.at("channel");
  c.channel.drop_probability = ch.at("drop_probability").get<double>();
  c.channel.latency = ch.at("latency").get<double>();
  c.tdma_slot = ch.at("tdma_slot").get<double>();

  const auto& p = j.at("planner");
  c.total_length = p.at("total_length").get<std::size_t>();
  c.terminal_horizon = p.at("terminal_horizon").get<std::size_t>();
  c.plain_horizon = p.at("plain_horizon").get<std::size_t>();
  c.planner.mcts_iterations = p.at("mcts_iterations").get<std::size_t>();
  c.planner.mcts_exploration = p.at("exploration").get<double>();
  c.planner.rollout_policy = parse_rollout(p.at("rollout").get<std::string>());
  c.planner.seed_naive = p.at("seed_naive").get<bool>();
  c.planner.max_local_points = p.at("max_local_points").get<std::size_t>();
  c.planner.eval_radius = p.at("eval_radius").get<double>();
  c.swath = p.at("swath").get<double>();

  c.mid_step = j.at("mission").at("mid_step").get<std::size_t>();
  return c;
}

// Overlays `patch` onto `base`; every key in the patch must already exist.
void merge_strict(json& base, const json& patch, const std::string& path) {
  if (!patch.is_object()) throw ConfigError("'" + path + "' must be an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown configuration key '" + key + "'");
    json& slot = base[it.key()];
    if (slot.is_object())
      merge_strict(slot, it.value(), key);
    else
      slot = it.value();
  }
}

MissionConfig finish(const json& doc) {
  MissionConfig c;
  try {
    c = from_json(doc);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("configuration has the wrong type: ") + e.what());
  }
  c.validate();
  return c;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return s;
}

}  // namespace

MissionConfig load_config(std::istream& is) {
  json user;
  try {
    user = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  json doc = to_json(MissionConfig{});
  merge_strict(doc, user, "");
  return finish(doc);
}

MissionConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  return load_config(in);
}

void apply_env_overrides(MissionConfig& cfg, char** envp) {
  if (envp == nullptr) return;
  static constexpr std::string_view prefix = "ISOBATH_";
  json doc = to_json(cfg);
  bool changed = false;
  for (char** e = envp; *e != nullptr; ++e) {
    const std::string_view entry(*e);
    if (entry.substr(0, prefix.size()) != prefix) continue;
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    const std::string name = lower(std::string(entry.substr(prefix.size(), eq - prefix.size())));
    const std::string raw(entry.substr(eq + 1));

    json* slot = &doc;
    std::string path;
    std::size_t start = 0;
    while (true) {
      const auto sep = name.find("__", start);
      const std::string key = name.substr(start, sep == std::string::npos ? std::string::npos : sep - start);
      path += path.empty() ? key : "." + key;
      if (!slot->is_object() || !slot->contains(key))
        throw ConfigError("environment override names unknown key '" + path + "'");
      slot = &(*slot)[key];
      if (sep == std::string::npos) break;
      start = sep + 2;
    }
    if (slot->is_object()) throw ConfigError("environment override '" + path + "' must name a value, not a section");
    json value = json::parse(raw, nullptr, false);
    *slot = value.is_discarded() ? json(raw) : value;
    changed = true;
  }
  if (changed) cfg = finish(doc);
}

std::string config_to_json(const MissionConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

}  // namespace isobath::sim
