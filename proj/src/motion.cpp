#include "isobath/motion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "isobath/errors.hpp"

namespace isobath::motion {

void MotionParams::validate() const {
  if (!(turn_radius > 0.0) || !std::isfinite(turn_radius)) throw ConfigError("turn_radius must be > 0");
  if (!(theta_max > 0.0) || !std::isfinite(theta_max)) throw ConfigError("theta_max must be > 0");
  if (!(speed > 0.0) || !std::isfinite(speed)) throw ConfigError("speed must be > 0");
}

const std::array<double, kActionCount>& action_set() {
  static const std::array<double, kActionCount> set = [] {
    constexpr std::array<double, kActionCount> deg = {-90, -30, -20, -10, -5, 0, 5, 10, 20, 30, 90};
    std::array<double, kActionCount> rad{};
    for (std::size_t i = 0; i < deg.size(); ++i) rad[i] = deg_to_rad(deg[i]);
    return rad;
  }();
  return set;
}

AgentState step(const AgentState& s, double a, const MotionParams& params) {
  const double r = params.turn_radius;
  const double abs_a = std::abs(a);
  const double d = r * (params.theta_max + abs_a);
  const double sign = a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
  // Lateral (left-positive) and forward displacement in the body frame.
  const double dx = sign * (r - r * std::cos(abs_a) + d * std::sin(abs_a));
  const double dy = r * std::sin(abs_a) + d * std::cos(abs_a);
  const double c = std::cos(s.heading);
  const double sn = std::sin(s.heading);
  return {wrap_angle(s.heading + a), s.north + c * dx + sn * dy, s.east - sn * dx + c * dy};
}

Path Path::build(const AgentState& start, std::span<const std::uint8_t> actions, const MotionParams& params) {
  Path p;
  p.start = start;
  p.actions.assign(actions.begin(), actions.end());
  p.states.reserve(actions.size() + 1);
  p.states.push_back(start);
  for (auto a : actions) {
    if (a >= kActionCount) throw ConfigError("action index out of range");
    p.states.push_back(step_index(p.states.back(), a, params));
  }
  return p;
}

void chord_samples(const Vec2& a, const Vec2& b, double spacing, std::vector<Vec2>& out) {
  const double len = distance(a, b);
  const double dn = (b.north - a.north) / len;
  const double de = (b.east - a.east) / len;
  // Interior points strictly before b, then b itself.
  for (int k = 1; static_cast<double>(k) * spacing < len; ++k)
    out.push_back({a.north + dn * spacing * k, a.east + de * spacing * k});
  out.push_back(b);
}

std::vector<Vec2> sample_locations(const Path& path, double spacing) {
  if (!(spacing > 0.0)) throw ConfigError("sample spacing must be > 0");
  std::vector<Vec2> out;
  out.push_back(path.states.front().position());
  for (std::size_t i = 1; i < path.states.size(); ++i)
    chord_samples(path.states[i - 1].position(), path.states[i].position(), spacing, out);
  return out;
}

// ---------------------------------------------------------------------------

double default_swath(const MotionParams& params) {
  return 2.0 * params.turn_radius + params.turn_radius * (params.theta_max + std::numbers::pi / 2.0);
}

LawnmowerSpec LawnmowerSpec::for_agent(const OperationalArea& area, std::size_t strip, std::size_t strips,
                                       double swath) {
  if (strips == 0 || strip >= strips) throw ConfigError("lawnmower strip index out of range");
  if (!(swath > 0.0)) throw ConfigError("lawnmower swath must be > 0");
  LawnmowerSpec spec;
  spec.area = area;
  spec.swath = swath;
  spec.along_east = area.east_extent() >= area.north_extent();
  const double lo = spec.along_east ? area.min_corner.north : area.min_corner.east;
  const double width = spec.along_east ? area.north_extent() : area.east_extent();
  const double w = width / static_cast<double>(strips);
  spec.strip_lo = lo + w * static_cast<double>(strip);
  spec.strip_hi = spec.strip_lo + w;
  return spec;
}

std::uint8_t steer_toward(double heading, double target) {
  const double err = wrap_angle(target - heading);
  if (std::abs(err) < deg_to_rad(2.5)) return kStraight;
  const auto& set = action_set();
  if (err > 0.0) {
    for (std::size_t i = kActionCount - 1; i > kStraight; --i)
      if (set[i] <= err + 1e-9) return static_cast<std::uint8_t>(i);
    return kStraight + 1;
  }
  for (std::size_t i = 0; i < kStraight; ++i)
    if (set[i] >= err - 1e-9) return static_cast<std::uint8_t>(i);
  return kStraight - 1;
}

std::uint8_t lawnmower_action(const AgentState& s, const LawnmowerSpec& spec, const MotionParams& params) {
  constexpr double pi = std::numbers::pi;
  // Along-track coordinate x, across-track y, and the four reference headings.
  const double x = spec.along_east ? s.east : s.north;
  const double y = spec.along_east ? s.north : s.east;
  const double along_pos = spec.along_east ? 0.0 : pi / 2.0;
  const double along_neg = spec.along_east ? pi : -pi / 2.0;
  const double across_pos = spec.along_east ? pi / 2.0 : 0.0;
  const double across_neg = spec.along_east ? -pi / 2.0 : pi;
  const double x_min = spec.along_east ? spec.area.min_corner.east : spec.area.min_corner.north;
  const double x_max = spec.along_east ? spec.area.max_corner.east : spec.area.max_corner.north;

  // Tracks stay inside [y_lo, y_hi]; runs turn one turn radius short of the edge.
  const double strip = spec.strip_hi - spec.strip_lo;
  const double inset = std::clamp(std::min(spec.swath / 2.0, (strip - spec.swath) / 2.0), 0.0, strip / 2.0);
  const double y_lo = spec.strip_lo + inset;
  const double y_hi = spec.strip_hi - inset;
  const double x_lo = x_min + params.turn_radius;
  const double x_hi = x_max - params.turn_radius;
  const double run = params.turn_radius * params.theta_max;

  const double along = std::cos(s.heading - along_pos);
  const double across = std::cos(s.heading - across_pos);
  const double farther = (x - x_lo > x_hi - x) ? along_neg : along_pos;

  if (std::abs(across) > std::abs(along)) {
    if (y < y_lo && across > 0.0) return steer_toward(s.heading, across_pos);
    if (y > y_hi && across < 0.0) return steer_toward(s.heading, across_neg);
    return steer_toward(s.heading, farther);
  }
  if (y < y_lo) return steer_toward(s.heading, across_pos);
  if (y > y_hi) return steer_toward(s.heading, across_neg);
  const bool forward = along > 0.0;
  const bool at_end = forward ? x + run > x_hi : x - run < x_lo;
  if (at_end) return steer_toward(s.heading, y + spec.swath <= y_hi ? across_pos : across_neg);
  return steer_toward(s.heading, forward ? along_pos : along_neg);
}

Path lawnmower_path(const AgentState& start, std::size_t n_steps, const LawnmowerSpec& spec,
                    const MotionParams& params) {
  Path p;
  p.start = start;
  p.states.reserve(n_steps + 1);
  p.actions.reserve(n_steps);
  p.states.push_back(start);
  for (std::size_t i = 0; i < n_steps; ++i) {
    const std::uint8_t a = lawnmower_action(p.states.back(), spec, params);
    p.actions.push_back(a);
    p.states.push_back(step_index(p.states.back(), a, params));
  }
  return p;
}

}  // namespace isobath::motion
