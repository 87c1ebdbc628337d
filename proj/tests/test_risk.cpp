#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "isobath/errors.hpp"
#include "isobath/risk.hpp"
#include "oracles.hpp"

using namespace isobath;
using namespace isobath::risk;

TEST(Loss, RejectsNonPositiveCosts) {
  EXPECT_THROW((LossParams{15.0, 0.0, 10.0}.validate()), ConfigError);
  EXPECT_THROW((LossParams{15.0, 10.0, -1.0}.validate()), ConfigError);
  EXPECT_NO_THROW(LossParams{}.validate());
}

TEST(BayesRisk, ZeroVarianceIsZero) {
  const LossParams loss;
  EXPECT_EQ(bayes_risk(3.0, 0.0, loss), 0.0);
  EXPECT_EQ(bayes_risk(30.0, 0.0, loss), 0.0);
  EXPECT_EQ(bayes_estimate(20.0, 0.0, loss), 1);
  EXPECT_EQ(bayes_estimate(10.0, 0.0, loss), 0);
}

TEST(BayesRisk, AtLevelWithEqualCostsIsHalfCost) {
  const LossParams loss;
  EXPECT_NEAR(bayes_risk(15.0, 4.0, loss), 5.0, 1e-12);
}

TEST(BayesRisk, BoundedByHalfMaxCostWhenCostsEqual) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mu(0.0, 30.0), var(1e-6, 50.0);
  const LossParams loss;
  for (int i = 0; i < 2000; ++i) {
    const double r = bayes_risk(mu(rng), var(rng), loss);
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 5.0 + 1e-12);
  }
}

TEST(BayesRisk, EstimateMatchesCheaperSide) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> mu(5.0, 25.0), var(0.01, 30.0), c(0.5, 20.0);
  for (int i = 0; i < 2000; ++i) {
    const LossParams loss{15.0, c(rng), c(rng)};
    const double m = mu(rng), v = var(rng);
    const double p_deep = normal_cdf((loss.level - m) / std::sqrt(v));
    const double a = loss.c1() * p_deep, b = loss.c2() * (1.0 - p_deep);
    EXPECT_EQ(bayes_estimate(m, v, loss), a <= b ? 1 : 0);
    EXPECT_NEAR(bayes_risk(m, v, loss), std::min(a, b), 1e-12);
  }
}

TEST(MuStar, BalancesCosts) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> s(0.05, 6.0), c(0.5, 20.0);
  for (int i = 0; i < 100; ++i) {
    const LossParams loss{15.0, c(rng), c(rng)};
    const double sig = s(rng);
    const double p = normal_cdf((loss.level - mu_star(sig, loss)) / sig);
    EXPECT_NEAR(p, loss.c2() / (loss.c1() + loss.c2()), 1e-10);
  }
  EXPECT_EQ(mu_star(2.0, LossParams{15.0, 7.0, 7.0}), 15.0);
}

TEST(LogNormalCdf, LowerTail) {
  EXPECT_NEAR(log_normal_cdf(0.0), std::log(0.5), 1e-15);
  EXPECT_NEAR(log_normal_cdf(-30.0), -454.321, 1e-2);
  EXPECT_TRUE(std::isfinite(log_normal_cdf(-100.0)));
}

TEST(ErfcSurrogate, CloseToErfc) {
  double worst = 0.0;
  for (double t = 0.0; t <= 6.0; t += 0.01) worst = std::max(worst, std::abs(erfc_surrogate(t) - std::erfc(t)));
  EXPECT_LT(worst, 1e-6);
}

TEST(ExpectedRisk, ClosedMatchesQuadratureOnGrid) {
  double worst = 0.0;
  for (const auto& cell : oracle::risk_grid()) {
    const double a = expected_bayes_risk_closed(cell.inputs, cell.loss);
    const double b = expected_bayes_risk_quadrature(cell.inputs, cell.loss);
    const double c = oracle::expected_risk_simpson(cell.inputs, cell.loss);
    worst = std::max({worst, std::abs(a - b), std::abs(b - c)});
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(ExpectedRisk, NoSpreadReducesToBayesRisk) {
  const LossParams loss{15.0, 4.0, 12.0};
  for (double mu : {10.0, 14.0, 15.0, 17.5}) {
    const ExpectedRiskInputs in{mu, 0.0, 2.25};
    EXPECT_NEAR(expected_bayes_risk_closed(in, loss), bayes_risk(mu, 2.25, loss), 1e-7);
  }
}

TEST(ExpectedRisk, NeverAboveCurrentRisk) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> off(-6.0, 6.0), s(0.01, 5.0), c(0.5, 20.0);
  for (int i = 0; i < 3000; ++i) {
    const LossParams loss{15.0, c(rng), c(rng)};
    const double sm = s(rng), sp = s(rng);
    const ExpectedRiskInputs in{15.0 + off(rng), sm * sm, sp * sp};
    const double now = bayes_risk(in.mu_mu, in.sigma_mu_sq + in.sigma_pq_sq, loss);
    EXPECT_GE(now - expected_bayes_risk_closed(in, loss), -1e-6);
  }
}

TEST(ExpectedRisk, GpMonteCarloAgreesWithClosedForm) {
  const gp::GpModel model{{50.0, 25.0, 0.5}, 15.0};
  gp::DataSet s(0.0);
  s.insert({{0.0, 0.0}, 14.0});
  s.insert({{40.0, 10.0}, 17.0});
  const std::vector<Vec2> planned{{20.0, 30.0}, {10.0, -20.0}};
  const Vec2 q{15.0, 5.0};
  const LossParams loss;
  const auto mc = expected_bayes_risk_mc(model, s, planned, q, loss, 20000, 9);
  const auto vr = gp::variance_reduction(model, s, planned, q);
  const double closed = expected_bayes_risk_closed(ExpectedRiskInputs::from(vr), loss);
  EXPECT_NEAR(mc.mean, closed, 4.0 * mc.std_error + 1e-9);
  const auto again = expected_bayes_risk_mc(model, s, planned, q, loss, 20000, 9);
  EXPECT_EQ(mc.mean, again.mean);
}

TEST(Benefit, EmptyNewDataIsExactlyZero) {
  const gp::GpModel model{{50.0, 25.0, 0.5}, 15.0};
  gp::DataSet d1(10.0), d2(10.0);
  d1.insert({{0.0, 0.0}, 12.0});
  d1.insert({{30.0, 30.0}, 18.0});
  const std::vector<Vec2> eval{{0.0, 10.0}, {50.0, 50.0}, {-20.0, 5.0}};
  EXPECT_EQ(benefit_of_search(model, d1, d2, eval, LossParams{}), 0.0);
}

TEST(Benefit, DuplicatePlannedCentersAddNothing) {
  const gp::GpModel model{{50.0, 25.0, 0.5}, 15.0};
  gp::DataSet s(25.0);
  s.insert({{0.0, 0.0}, 14.0});
  s.insert({{60.0, 0.0}, 16.0});
  const std::vector<Vec2> planned{{0.0, 0.0}, {60.0, 0.0}, {5.0, 5.0}};
  const std::vector<Vec2> eval{{0.0, 10.0}, {30.0, 0.0}};
  EXPECT_LE(std::abs(expected_benefit_of_search(model, s, planned, eval, LossParams{})), 1e-6);
}

TEST(RiskField, PriorIsConstant) {
  const gp::GpModel model{{50.0, 25.0, 0.5}, 15.0};
  const std::vector<Vec2> grid{{0, 0}, {100, 0}, {0, 200}};
  const auto f = risk_field(model, gp::DataSet(25.0), grid, LossParams{});
  ASSERT_EQ(f.values.size(), 3u);
  for (double v : f.values) EXPECT_DOUBLE_EQ(v, f.values[0]);
  EXPECT_NEAR(f.values[0], 5.0, 1e-12);
}
