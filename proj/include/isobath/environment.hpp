#pragma once

// Synthetic truth bathymetry and the noisy depth sensor.

#include <iosfwd>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "isobath/geometry.hpp"
#include "isobath/gp.hpp"
#include "isobath/grid.hpp"

namespace isobath::env {

enum class Family { Plane, GaussianBasin, TwoBasin, Ridge };

Family parse_family(std::string_view name);
std::string_view family_name(Family f);

/// Parameters of the analytic families. Depth is positive down, meters.
///   plane:          offset + slope_north * north + slope_east * east
///   gaussian-basin: background + (peak_depth - background) g(center, width)
///   two-basin:      the basin above plus a second one at center2
///   ridge:          background - (background - peak_depth) exp(-d^2 / (2 width^2)),
///                   d the distance to the line through center along ridge_heading
///                   (radians, from north toward east); peak_depth is the ridge crest.
struct AnalyticSurface {
  Family family = Family::GaussianBasin;
  double offset = 10.0;
  double slope_north = 0.0;
  double slope_east = 0.01;
  double background = 5.0;
  Vec2 center{300.0, 500.0};
  double peak_depth = 25.0;
  double width = 150.0;
  Vec2 center2{300.0, 750.0};
  double peak_depth2 = 25.0;
  double width2 = 100.0;
  double ridge_heading = 0.0;

  double depth(const Vec2& p) const;
};

/// Regular lattice of depths with bilinear interpolation.
class GriddedSurface {
 public:
  GriddedSurface(Vec2 origin, double step_north, double step_east, std::size_t rows, std::size_t cols,
                 std::vector<double> depths);

  /// CSV with header north_m,east_m,depth_m covering a full regular lattice in any row order.
  static GriddedSurface load_csv(std::istream& is);

  OperationalArea extent() const;
  /// Throws DomainError outside the lattice.
  double depth(const Vec2& p) const;

 private:
  Vec2 origin_;
  double step_n_;
  double step_e_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> depths_;
};

class Bathymetry {
 public:
  explicit Bathymetry(AnalyticSurface s) : rep_(std::move(s)) {}
  explicit Bathymetry(GriddedSurface g) : rep_(std::move(g)) {}

  double depth_at(const Vec2& p) const;
  bool is_gridded() const { return std::holds_alternative<GriddedSurface>(rep_); }

 private:
  std::variant<AnalyticSurface, GriddedSurface> rep_;
};

struct SensorModel {
  double noise_std = 0.5;
  double sample_spacing = 5.0;

  void validate() const;
};

/// depth_at(p) plus N(0, noise_std^2); the generator is only advanced when noise_std > 0.
gp::Sample sample_depth(const Bathymetry& b, const SensorModel& sensor, const Vec2& p,
                        std::mt19937_64& rng);

/// Analytic lake of the requested family. Throws ConfigError unless the
/// `level` isobath crosses the area (depths on both sides of it).
Bathymetry synthetic_lake(const AnalyticSurface& surface, const OperationalArea& area, double level = 15.0);

/// Row-major lattice from the min corner at the given spacing.
std::vector<Vec2> eval_grid(const OperationalArea& area, double resolution);

}  // namespace isobath::env
