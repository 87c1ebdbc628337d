#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "isobath/environment.hpp"
#include "isobath/errors.hpp"

using namespace isobath;
using namespace isobath::env;

TEST(Family, Names) {
  for (auto f : {Family::Plane, Family::GaussianBasin, Family::TwoBasin, Family::Ridge})
    EXPECT_EQ(parse_family(family_name(f)), f);
  EXPECT_THROW(parse_family("lake"), ConfigError);
}

TEST(Analytic, BasinPeakAndBackground) {
  AnalyticSurface s;
  EXPECT_NEAR(s.depth(s.center), 25.0, 1e-12);
  EXPECT_NEAR(s.depth({s.center.north + 5000, s.center.east}), 5.0, 1e-9);
}

TEST(Analytic, PlaneAndRidge) {
  AnalyticSurface s;
  s.family = Family::Plane;
  EXPECT_NEAR(s.depth({0, 500}), 15.0, 1e-12);
  s.family = Family::Ridge;
  s.background = 30.0;
  s.peak_depth = 5.0;
  EXPECT_NEAR(s.depth({s.center.north + 77, s.center.east}), 5.0, 1e-12);  // heading 0: the ridge runs north
}

TEST(Lake, IsobathMustCrossArea) {
  const OperationalArea area{{0, 0}, {600, 1000}};
  EXPECT_NO_THROW(synthetic_lake(AnalyticSurface{}, area));
  AnalyticSurface shallow;
  shallow.peak_depth = 10.0;
  EXPECT_THROW(synthetic_lake(shallow, area), ConfigError);
}

TEST(Gridded, BilinearAndDomain) {
  std::istringstream csv("north_m,east_m,depth_m\n0,0,10\n0,10,20\n10,0,30\n10,10,40\n");
  const auto g = GriddedSurface::load_csv(csv);
  EXPECT_NEAR(g.depth({5, 5}), 25.0, 1e-12);
  EXPECT_NEAR(g.depth({0, 10}), 20.0, 1e-12);
  EXPECT_THROW(g.depth({11, 0}), DomainError);
}

TEST(Gridded, RejectsIncompleteLattice) {
  std::istringstream csv("north_m,east_m,depth_m\n0,0,10\n0,10,20\n10,0,30\n");
  EXPECT_THROW(GriddedSurface::load_csv(csv), ConfigError);
}

TEST(Sensor, NoiselessIsTruthAndSeeded) {
  const Bathymetry b(AnalyticSurface{});
  std::mt19937_64 r1(1), r2(1);
  const auto s = sample_depth(b, SensorModel{0.0, 5.0}, {100, 100}, r1);
  EXPECT_EQ(s.value, b.depth_at({100, 100}));
  EXPECT_EQ(r1, r2);
  const auto a = sample_depth(b, SensorModel{}, {100, 100}, r1);
  const auto c = sample_depth(b, SensorModel{}, {100, 100}, r2);
  EXPECT_EQ(a.value, c.value);
}

TEST(EvalGrid, RowMajorFromMinCorner) {
  const auto g = eval_grid({{0, 0}, {50, 100}}, 25.0);
  ASSERT_EQ(g.size(), 3u * 5u);
  EXPECT_EQ(g[0], (Vec2{0, 0}));
  EXPECT_EQ(g[1], (Vec2{0, 25}));
  EXPECT_EQ(g[5], (Vec2{25, 0}));
}
