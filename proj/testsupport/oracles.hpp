#pragma once

// Independent reference implementations used by the tests, the acceptance
// run and `isobath validate`. Slow on purpose: no Cholesky, no local subsets,
// no closed forms.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "isobath/comms.hpp"
#include "isobath/gp.hpp"
#include "isobath/motion.hpp"
#include "isobath/planner.hpp"
#include "isobath/risk.hpp"

namespace isobath::oracle {

/// Solves A x = b by Gaussian elimination with partial pivoting (A is n x n, row-major).
std::vector<double> gauss_solve(std::vector<double> a, std::vector<double> b, std::size_t n);

/// Exact GP posterior through explicit solves of (K + noise I) against z - m and k*.
std::vector<gp::Prediction> dense_gp_predict(const gp::GpModel& model, const std::vector<gp::Sample>& data,
                                             const std::vector<Vec2>& queries);

/// E over mu ~ N(mu_mu, sigma_mu^2) of bayes_risk(mu, sigma_pq^2) by composite
/// Simpson over +-12 sigma, with a panel edge at the decision boundary.
double expected_risk_simpson(const risk::ExpectedRiskInputs& in, const risk::LossParams& loss, int panels = 4000);

struct McResult {
  double mean = 0.0;
  double std_error = 0.0;
};
/// Direct sampling of the posterior mean.
McResult expected_risk_mc(const risk::ExpectedRiskInputs& in, const risk::LossParams& loss, std::size_t n,
                          std::uint64_t seed);

struct RiskCell {
  risk::ExpectedRiskInputs inputs;
  risk::LossParams loss;
};
/// 15 offsets of mu_mu - l in [-5, 5] x 16 (sigma_mu, sigma_pq) pairs x 3
/// cost ratios with c1 + c2 = 20: 720 cells.
std::vector<RiskCell> risk_grid();

struct BruteBest {
  std::uint8_t action = motion::kStraight;
  double value = 0.0;
};
/// Scores every single action with a fresh evaluator and returns the best.
BruteBest brute_force_horizon1(const motion::AgentState& start, plan::PlanContext& ctx, const plan::PlanConfig& cfg);

/// Random packet that respects every layout limit.
comms::Packet random_packet(std::mt19937_64& rng);

struct SuiteResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Closed form vs quadrature vs Simpson on the 720-cell grid, max abs error <= tol.
SuiteResult risk_suite(double tol);
/// Round trips of valid packets and decoding of corrupted buffers.
SuiteResult codec_suite(std::size_t cases, std::uint64_t seed);
/// posterior_predict vs dense_gp_predict, relative error <= tol.
SuiteResult gp_suite(double tol, std::size_t cases, std::uint64_t seed);

}  // namespace isobath::oracle
