#pragma once

// Two-cost misclassification loss around a depth threshold, the Bayes'
// estimate and risk, and evaluators for the expected risk after a set of
// planned measurements.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "isobath/geometry.hpp"
#include "isobath/gp.hpp"

namespace isobath::risk {

/// c1 is charged for calling a deep (unsafe, f < level) point safe, c2 for
/// calling a safe point unsafe.
struct LossParams {
  double level = 15.0;
  double cost_deep_wrong = 10.0;
  double cost_shallow_wrong = 10.0;

  void validate() const;
  double c1() const { return cost_deep_wrong; }
  double c2() const { return cost_shallow_wrong; }
  double max_cost() const;
};

/// Standard normal CDF.
double normal_cdf(double x);
/// log of the standard normal CDF, accurate far into the lower tail.
double log_normal_cdf(double x);

/// 1 (safe) iff c1 P(f < l) <= c2 P(f >= l); ties go to 1. Zero variance
/// classifies by the sign of mean - l.
int bayes_estimate(double mean, double variance, const LossParams& loss);

/// min(c1 P(f < l), c2 P(f >= l)) under N(mean, variance); 0 when variance = 0.
double bayes_risk(double mean, double variance, const LossParams& loss);

/// Posterior mean at which both classifications cost the same, given the
/// predictive spread sigma_pq (a standard deviation).
double mu_star(double sigma_pq, const LossParams& loss);

struct ExpectedRiskInputs {
  double mu_mu = 0.0;
  double sigma_mu_sq = 0.0;
  double sigma_pq_sq = 0.0;

  static ExpectedRiskInputs from(const gp::VarianceReduction& v) {
    return {v.mu_mu, v.sigma_mu_sq, v.sigma_pq_sq};
  }
};

/// E over mu ~ N(mu_mu, sigma_mu^2) of bayes_risk(mu, sigma_pq^2). The erf
/// integral is evaluated with an exponential-quadratic mixture for erfc, so
/// every term is a Gaussian integral in closed form.
double expected_bayes_risk_closed(const ExpectedRiskInputs& in, const LossParams& loss);

/// Same quantity by adaptive Gauss-Kronrod. Throws NumericalError if the
/// error estimate stays above 1e-6.
double expected_bayes_risk_quadrature(const ExpectedRiskInputs& in, const LossParams& loss);

/// The exponential-quadratic erfc mixture, exposed for tests (t >= 0).
double erfc_surrogate(double t);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Draws the planned measurements from the joint predictive given S,
/// conditions, and averages the Bayes' risk at `query`. Planned locations pass
/// through the sparse rule against S first. Deterministic per seed.
McEstimate expected_bayes_risk_mc(const gp::GpModel& model, const gp::DataSet& data_s,
                                  std::span<const Vec2> planned, const Vec2& query,
                                  const LossParams& loss, std::size_t n_draws, std::uint64_t seed);

/// sum over eval points of r(D1) - r(D1 u D2) with realized values. D2 is
/// merged into D1 through the sparse rule.
double benefit_of_search(const gp::GpModel& model, const gp::DataSet& d1, const gp::DataSet& d2,
                         std::span<const Vec2> eval_points, const LossParams& loss);

/// sum over eval points of r(S) - E[r(S u planned)].
double expected_benefit_of_search(const gp::GpModel& model, const gp::DataSet& data_s,
                                  std::span<const Vec2> planned, std::span<const Vec2> eval_points,
                                  const LossParams& loss);

struct RiskField {
  std::vector<Vec2> grid;
  std::vector<double> values;

  /// CSV with header north_m,east_m,risk, one row per grid point.
  void write_csv(std::ostream& os) const;
};

/// Bayes' risk at every grid point under the exact posterior.
RiskField risk_field(const gp::GpModel& model, const gp::DataSet& data, std::span<const Vec2> grid,
                     const LossParams& loss);

}  // namespace isobath::risk
