#include "isobath/environment.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <sstream>

#include "isobath/errors.hpp"

namespace isobath::env {

Family parse_family(std::string_view name) {
  if (name == "plane") return Family::Plane;
  if (name == "gaussian-basin") return Family::GaussianBasin;
  if (name == "two-basin") return Family::TwoBasin;
  if (name == "ridge") return Family::Ridge;
  throw ConfigError("unknown lake family '" + std::string(name) + "'");
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Plane: return "plane";
    case Family::GaussianBasin: return "gaussian-basin";
    case Family::TwoBasin: return "two-basin";
    case Family::Ridge: return "ridge";
  }
  return "?";
}

namespace {

double bump(const Vec2& p, const Vec2& c, double width) {
  return std::exp(-squared_distance(p, c) / (2.0 * width * width));
}

}  // namespace

double AnalyticSurface::depth(const Vec2& p) const {
  switch (family) {
    case Family::Plane:
      return offset + slope_north * p.north + slope_east * p.east;
    case Family::GaussianBasin:
      return background + (peak_depth - background) * bump(p, center, width);
    case Family::TwoBasin:
      return background + (peak_depth - background) * bump(p, center, width) +
             (peak_depth2 - background) * bump(p, center2, width2);
    case Family::Ridge: {
      // Signed distance from the ridge axis.
      const double dn = p.north - center.north;
      const double de = p.east - center.east;
      const double d = -dn * std::sin(ridge_heading) + de * std::cos(ridge_heading);
      return background - (background - peak_depth) * std::exp(-d * d / (2.0 * width * width));
    }
  }
  return background;
}

// ---------------------------------------------------------------------------

GriddedSurface::GriddedSurface(Vec2 origin, double step_north, double step_east, std::size_t rows,
                               std::size_t cols, std::vector<double> depths)
    : origin_(origin), step_n_(step_north), step_e_(step_east), rows_(rows), cols_(cols),
      depths_(std::move(depths)) {
  if (rows < 2 || cols < 2) throw ConfigError("gridded bathymetry needs at least 2x2 nodes");
  if (!(step_north > 0.0) || !(step_east > 0.0)) throw ConfigError("gridded bathymetry steps must be > 0");
  if (depths_.size() != rows * cols) throw ConfigError("gridded bathymetry: depth count mismatch");
  for (double d : depths_)
    if (!std::isfinite(d)) throw ConfigError("gridded bathymetry: non-finite depth");
}

GriddedSurface GriddedSurface::load_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("bathymetry csv: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "north_m,east_m,depth_m") throw ConfigError("bathymetry csv: expected header north_m,east_m,depth_m");

  std::map<std::pair<double, double>, double> nodes;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double n = 0.0, e = 0.0, d = 0.0;
    if (!(row >> n >> e >> d) || !std::isfinite(n) || !std::isfinite(e) || !std::isfinite(d))
      throw ConfigError("bathymetry csv: bad row at line " + std::to_string(lineno));
    if (!nodes.emplace(std::pair{n, e}, d).second)
      throw ConfigError("bathymetry csv: duplicate node at line " + std::to_string(lineno));
  }
  if (nodes.empty()) throw ConfigError("bathymetry csv: no nodes");

  std::vector<double> norths, easts;
  for (const auto& [k, v] : nodes) {
    norths.push_back(k.first);
    easts.push_back(k.second);
  }
  std::sort(norths.begin(), norths.end());
  norths.erase(std::unique(norths.begin(), norths.end()), norths.end());
  std::sort(easts.begin(), easts.end());
  easts.erase(std::unique(easts.begin(), easts.end()), easts.end());
  if (norths.size() < 2 || easts.size() < 2) throw ConfigError("bathymetry csv: need at least 2x2 nodes");

  auto regular_step = [](const std::vector<double>& v, const char* axis) {
    const double step = (v.back() - v.front()) / static_cast<double>(v.size() - 1);
    for (std::size_t i = 0; i < v.size(); ++i)
      if (std::abs(v[i] - (v.front() + step * static_cast<double>(i))) > 1e-6 * step)
        throw ConfigError(std::string("bathymetry csv: irregular ") + axis + " spacing");
    return step;
  };
  const double sn = regular_step(norths, "north");
  const double se = regular_step(easts, "east");
  if (nodes.size() != norths.size() * easts.size()) throw ConfigError("bathymetry csv: lattice has missing nodes");

  std::vector<double> depths;
  depths.reserve(nodes.size());
  for (double n : norths)
    for (double e : easts) depths.push_back(nodes.at({n, e}));
  return GriddedSurface({norths.front(), easts.front()}, sn, se, norths.size(), easts.size(), std::move(depths));
}

OperationalArea GriddedSurface::extent() const {
  return {origin_,
          {origin_.north + step_n_ * static_cast<double>(rows_ - 1), origin_.east + step_e_ * static_cast<double>(cols_ - 1)}};
}

double GriddedSurface::depth(const Vec2& p) const {
  const double fn = (p.north - origin_.north) / step_n_;
  const double fe = (p.east - origin_.east) / step_e_;
  const double max_r = static_cast<double>(rows_ - 1);
  const double max_c = static_cast<double>(cols_ - 1);
  constexpr double tol = 1e-9;
  if (!(fn >= -tol && fn <= max_r + tol && fe >= -tol && fe <= max_c + tol))
    throw DomainError("bathymetry query outside the gridded area");
  const double cn = std::clamp(fn, 0.0, max_r);
  const double ce = std::clamp(fe, 0.0, max_c);
  const std::size_t r = std::min(static_cast<std::size_t>(cn), rows_ - 2);
  const std::size_t c = std::min(static_cast<std::size_t>(ce), cols_ - 2);
  const double tn = cn - static_cast<double>(r);
  const double te = ce - static_cast<double>(c);
  const double d00 = depths_[r * cols_ + c];
  const double d01 = depths_[r * cols_ + c + 1];
  const double d10 = depths_[(r + 1) * cols_ + c];
  const double d11 = depths_[(r + 1) * cols_ + c + 1];
  if (tn == 0.0 && te == 0.0) return d00;
  return (1.0 - tn) * ((1.0 - te) * d00 + te * d01) + tn * ((1.0 - te) * d10 + te * d11);
}

// ---------------------------------------------------------------------------

double Bathymetry::depth_at(const Vec2& p) const {
  return std::visit([&](const auto& rep) { return rep.depth(p); }, rep_);
}

void SensorModel::validate() const {
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw ConfigError("sensor noise_std must be >= 0");
  if (!(sample_spacing > 0.0) || !std::isfinite(sample_spacing))
    throw ConfigError("sensor sample_spacing must be > 0");
}

gp::Sample sample_depth(const Bathymetry& b, const SensorModel& sensor, const Vec2& p, std::mt19937_64& rng) {
  if (!is_finite(p)) throw DomainError("sample location must be finite");
  const double truth = b.depth_at(p);
  if (sensor.noise_std == 0.0) return {p, truth};
  std::normal_distribution<double> noise(0.0, sensor.noise_std);
  return {p, truth + noise(rng)};
}

Bathymetry synthetic_lake(const AnalyticSurface& surface, const OperationalArea& area, double level) {
  area.validate();
  if (surface.family != Family::Plane) {
    if (!(surface.width > 0.0)) throw ConfigError("lake width must be > 0");
    if (surface.family == Family::TwoBasin && !(surface.width2 > 0.0))
      throw ConfigError("second basin width must be > 0");
  }
  // The isobath crosses the area iff depths on a fine lattice straddle the level.
  constexpr int kSteps = 200;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int i = 0; i <= kSteps; ++i)
    for (int j = 0; j <= kSteps; ++j) {
      const Vec2 p{area.min_corner.north + area.north_extent() * i / kSteps,
                   area.min_corner.east + area.east_extent() * j / kSteps};
      const double d = surface.depth(p);
      if (!std::isfinite(d)) throw ConfigError("lake depth is not finite inside the area");
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  if (!(lo < level && hi > level))
    throw ConfigError("the " + std::to_string(level) + " m isobath does not cross the area for lake '" +
                      std::string(family_name(surface.family)) + "'");
  return Bathymetry(surface);
}

std::vector<Vec2> eval_grid(const OperationalArea& area, double resolution) {
  if (!(resolution > 0.0)) throw ConfigError("grid resolution must be > 0");
  if (area.max_corner.north < area.min_corner.north || area.max_corner.east < area.min_corner.east)
    throw ConfigError("operational area corners are inverted");
  return RegularGrid(area, resolution).points();
}

}  // namespace isobath::env
