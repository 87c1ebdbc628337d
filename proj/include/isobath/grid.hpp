#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "isobath/geometry.hpp"

namespace isobath {

/// Axis-aligned rectangle in the local tangent frame.
struct OperationalArea {
  Vec2 min_corner;
  Vec2 max_corner;

  double north_extent() const { return max_corner.north - min_corner.north; }
  double east_extent() const { return max_corner.east - min_corner.east; }
  bool contains(const Vec2& p, double inflate = 0.0) const {
    return p.north >= min_corner.north - inflate && p.north <= max_corner.north + inflate &&
           p.east >= min_corner.east - inflate && p.east <= max_corner.east + inflate;
  }
  /// Throws ConfigError unless max > min componentwise.
  void validate() const;
};

/// Uniform lattice anchored at the area's min corner, row-major (north rows,
/// east columns). Row r, column c sits at min + (r, c) * resolution.
class RegularGrid {
 public:
  RegularGrid(const OperationalArea& area, double resolution);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return points_.size(); }
  double resolution() const { return resolution_; }
  const std::vector<Vec2>& points() const { return points_; }
  const Vec2& point(std::size_t i) const { return points_[i]; }

  /// Appends indices of lattice points with |p - center| <= radius, row-major.
  void within(const Vec2& center, double radius, std::vector<std::uint32_t>& out) const;

 private:
  Vec2 origin_;
  double resolution_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Vec2> points_;
};

}  // namespace isobath
