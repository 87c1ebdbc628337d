#include "isobath/grid.hpp"

#include <algorithm>
#include <cmath>

#include "isobath/errors.hpp"

namespace isobath {

void OperationalArea::validate() const {
  if (!is_finite(min_corner) || !is_finite(max_corner) || !(max_corner.north > min_corner.north) ||
      !(max_corner.east > min_corner.east))
    throw ConfigError("operational area: max corner must exceed min corner componentwise");
}

RegularGrid::RegularGrid(const OperationalArea& area, double resolution)
    : origin_(area.min_corner), resolution_(resolution) {
  if (!(resolution > 0.0) || !std::isfinite(resolution))
    throw ConfigError("grid resolution must be positive");
  // A tiny slack keeps lattice points that land on the max corner up to rounding.
  const double slack = 1e-9 * resolution;
  rows_ = static_cast<std::size_t>(std::floor((area.max_corner.north - area.min_corner.north + slack) / resolution)) + 1;
  cols_ = static_cast<std::size_t>(std::floor((area.max_corner.east - area.min_corner.east + slack) / resolution)) + 1;
  points_.reserve(rows_ * cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c)
      points_.push_back({origin_.north + static_cast<double>(r) * resolution,
                         origin_.east + static_cast<double>(c) * resolution});
}

void RegularGrid::within(const Vec2& center, double radius, std::vector<std::uint32_t>& out) const {
  if (radius < 0.0) return;
  const auto clamp_index = [](double v, std::size_t hi) -> std::ptrdiff_t {
    return static_cast<std::ptrdiff_t>(std::clamp(v, -1.0, static_cast<double>(hi)));
  };
  // One extra index on each side; the exact distance test below decides.
  const std::ptrdiff_t r0 = clamp_index(std::ceil((center.north - radius - origin_.north) / resolution_) - 1.0, rows_);
  const std::ptrdiff_t r1 = clamp_index(std::floor((center.north + radius - origin_.north) / resolution_) + 1.0, rows_ - 1);
  const std::ptrdiff_t c0 = clamp_index(std::ceil((center.east - radius - origin_.east) / resolution_) - 1.0, cols_);
  const std::ptrdiff_t c1 = clamp_index(std::floor((center.east + radius - origin_.east) / resolution_) + 1.0, cols_ - 1);
  const double r2 = radius * radius;
  for (std::ptrdiff_t r = std::max<std::ptrdiff_t>(r0, 0); r <= r1; ++r) {
    for (std::ptrdiff_t c = std::max<std::ptrdiff_t>(c0, 0); c <= c1; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * cols_ + static_cast<std::size_t>(c);
      if (squared_distance(points_[i], center) <= r2) out.push_back(static_cast<std::uint32_t>(i));
    }
  }
}

}  // namespace isobath
