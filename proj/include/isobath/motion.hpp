#pragma once

// Discrete Dubins-type kinematics, the canonical action set, and the
// lawnmower sweep used as the naive completion of planned paths.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "isobath/geometry.hpp"
#include "isobath/grid.hpp"

namespace isobath::motion {

/// Heading in radians, wrapped to (-pi, pi]. The direction of travel is
/// (north, east) = (sin h, cos h): heading 0 is east, pi/2 is north, and a
/// positive action turns left.
struct AgentState {
  double heading = 0.0;
  double north = 0.0;
  double east = 0.0;

  Vec2 position() const { return {north, east}; }
  friend bool operator==(const AgentState&, const AgentState&) = default;
};

struct MotionParams {
  double turn_radius = 15.0;
  double theta_max = deg_to_rad(90.0);
  double speed = 1.5;  // m/s, only used to pace the simulation

  void validate() const;
};

inline constexpr std::size_t kActionCount = 11;
inline constexpr std::uint8_t kStraight = 5;

/// {-90, -30, -20, -10, -5, 0, 5, 10, 20, 30, 90} degrees, as radians.
const std::array<double, kActionCount>& action_set();
inline double action_angle(std::uint8_t index) { return action_set()[index]; }

AgentState step(const AgentState& s, double action, const MotionParams& params);
inline AgentState step_index(const AgentState& s, std::uint8_t index, const MotionParams& params) {
  return step(s, action_angle(index), params);
}

struct Path {
  AgentState start;
  std::vector<std::uint8_t> actions;
  std::vector<AgentState> states;  // states[0] = start, states.size() = actions.size() + 1

  static Path build(const AgentState& start, std::span<const std::uint8_t> actions, const MotionParams& params);
  const AgentState& final_state() const { return states.back(); }
  std::size_t length() const { return actions.size(); }
};

/// Points along the chord from a to b at `spacing`, excluding a and ending
/// exactly at b: floor(len / spacing) + 1 points unless len is a multiple of
/// spacing.
void chord_samples(const Vec2& a, const Vec2& b, double spacing, std::vector<Vec2>& out);

/// Start position followed by every chord's samples.
std::vector<Vec2> sample_locations(const Path& path, double spacing);

/// Boustrophedon over one strip of the area. The area is cut into team_size
/// strips across its short axis; runs go along the long axis and the sweep
/// moves across by `swath` at each end.
struct LawnmowerSpec {
  OperationalArea area;
  bool along_east = true;  // runs parallel to east when the area is wider than tall
  double strip_lo = 0.0;   // across-coordinate range of the strip
  double strip_hi = 0.0;
  double swath = 0.0;

  static LawnmowerSpec for_agent(const OperationalArea& area, std::size_t strip, std::size_t strips,
                                 double swath);
};

/// Across-track spacing of a +90,+90 U-turn: 2r + r * (theta_max + pi/2).
double default_swath(const MotionParams& params);

/// The lawnmower's next action from `s`; a pure function of the state.
std::uint8_t lawnmower_action(const AgentState& s, const LawnmowerSpec& spec, const MotionParams& params);

Path lawnmower_path(const AgentState& start, std::size_t n_steps, const LawnmowerSpec& spec,
                    const MotionParams& params);

/// Action that moves heading h toward `target` by the largest available
/// amount not exceeding the error; straight once within 2.5 degrees.
std::uint8_t steer_toward(double heading, double target);

}  // namespace isobath::motion
