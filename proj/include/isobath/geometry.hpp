#pragma once

#include <cmath>
#include <numbers>

namespace isobath {

/// Position in the local tangent frame, meters.
struct Vec2 {
  double north = 0.0;
  double east = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double squared_distance(const Vec2& a, const Vec2& b) {
  const double dn = a.north - b.north;
  const double de = a.east - b.east;
  return dn * dn + de * de;
}

inline double distance(const Vec2& a, const Vec2& b) { return std::sqrt(squared_distance(a, b)); }

inline bool is_finite(const Vec2& p) { return std::isfinite(p.north) && std::isfinite(p.east); }

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace isobath
