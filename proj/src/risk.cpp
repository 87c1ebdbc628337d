#include "isobath/risk.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "isobath/errors.hpp"
#include "isobath/linalg.hpp"

namespace isobath::risk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// erfc(t) ~ sum_k w_k exp(-a_k t^2 - b_k t) for t >= 0; max abs error 2.4e-9.
constexpr std::array<double, 4> kW = {0.41983990589651426, 0.2872370078232554, 0.2277083738663418,
                                      0.06521471300659165};
constexpr std::array<double, 4> kA = {0.9817926963649303, 0.8914540314986774, 1.019703030599352,
                                      0.6603673505901426};
constexpr std::array<double, 4> kB = {0.3583045259671429, 1.8939239629298927, 1.0859453262439447,
                                      2.8623099143791593};

// log(Phi(hi) - Phi(lo)), lo < hi; either end may be infinite.
double log_cdf_diff(double lo, double hi) {
  if (!(lo < hi)) return -kInf;
  if (lo > 0.0) {
    const double la = log_normal_cdf(-lo);
    const double lb = log_normal_cdf(-hi);
    return la + std::log1p(-std::exp(lb - la));
  }
  const double lb = log_normal_cdf(hi);
  const double la = log_normal_cdf(lo);
  return lb + std::log1p(-std::exp(la - lb));
}

// Integral over [lo, hi] of N(u; m, var) exp(-alpha u^2 - beta u).
double gauss_exp_quad(double m, double var, double alpha, double beta, double lo, double hi) {
  const double d = 1.0 + 2.0 * alpha * var;
  const double c = (m - beta * var) / d;
  const double sd = std::sqrt(var / d);
  const double log_scale = -(alpha * m * m + beta * m - 0.5 * beta * beta * var) / d - 0.5 * std::log(d);
  const double zl = std::isinf(lo) ? lo : (lo - c) / sd;
  const double zh = std::isinf(hi) ? hi : (hi - c) / sd;
  return std::exp(log_scale + log_cdf_diff(zl, zh));
}

void check_inputs(const ExpectedRiskInputs& in, const LossParams& loss) {
  loss.validate();
  if (!std::isfinite(in.mu_mu) || !std::isfinite(in.sigma_mu_sq) || !std::isfinite(in.sigma_pq_sq))
    throw ConfigError("expected risk inputs must be finite");
  if (in.sigma_mu_sq < 0.0 || in.sigma_pq_sq < 0.0)
    throw ConfigError("expected risk variances must be >= 0");
}

}  // namespace

void LossParams::validate() const {
  if (!std::isfinite(level)) throw ConfigError("loss level must be finite");
  if (!(cost_deep_wrong > 0.0) || !std::isfinite(cost_deep_wrong))
    throw ConfigError("cost_deep_wrong must be > 0");
  if (!(cost_shallow_wrong > 0.0) || !std::isfinite(cost_shallow_wrong))
    throw ConfigError("cost_shallow_wrong must be > 0");
}

double LossParams::max_cost() const { return std::max(cost_deep_wrong, cost_shallow_wrong); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_normal_cdf(double x) {
  if (x > -30.0) return std::log(normal_cdf(x));
  // Asymptotic series of the Mills ratio.
  const double x2 = x * x;
  const double inv = 1.0 / x2;
  const double series = 1.0 - inv * (1.0 - 3.0 * inv * (1.0 - 5.0 * inv * (1.0 - 7.0 * inv)));
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

int bayes_estimate(double mean, double variance, const LossParams& loss) {
  if (variance < 0.0) throw ConfigError("variance must be >= 0");
  if (variance == 0.0) return mean >= loss.level ? 1 : 0;
  const double x = (loss.level - mean) / std::sqrt(variance);
  return loss.c1() * normal_cdf(x) <= loss.c2() * normal_cdf(-x) ? 1 : 0;
}

double bayes_risk(double mean, double variance, const LossParams& loss) {
  if (variance < 0.0) throw ConfigError("variance must be >= 0");
  if (variance == 0.0) return 0.0;
  const double x = (loss.level - mean) / std::sqrt(variance);
  return std::min(loss.c1() * normal_cdf(x), loss.c2() * normal_cdf(-x));
}

double mu_star(double sigma_pq, const LossParams& loss) {
  if (sigma_pq < 0.0) throw ConfigError("sigma_pq must be >= 0");
  if (sigma_pq == 0.0 || loss.c1() == loss.c2()) return loss.level;
  const double q = (loss.c2() - loss.c1()) / (loss.c1() + loss.c2());
  return loss.level - std::numbers::sqrt2 * boost::math::erf_inv(q) * sigma_pq;
}

double erfc_surrogate(double t) {
  double s = 0.0;
  for (std::size_t k = 0; k < kW.size(); ++k) s += kW[k] * std::exp(-kA[k] * t * t - kB[k] * t);
  return s;
}

double expected_bayes_risk_closed(const ExpectedRiskInputs& in, const LossParams& loss) {
  check_inputs(in, loss);
  if (in.sigma_mu_sq == 0.0) return bayes_risk(in.mu_mu, in.sigma_pq_sq, loss);
  if (in.sigma_pq_sq == 0.0) return expected_bayes_risk_quadrature(in, loss);

  const double c1 = loss.c1();
  const double c2 = loss.c2();
  const double s = std::sqrt(in.sigma_pq_sq);
  const double sm = std::sqrt(in.sigma_mu_sq);
  // Shifted so the level sits at 0.
  const double m = in.mu_mu - loss.level;
  const double ms = mu_star(s, loss) - loss.level;
  const double zs = (ms - m) / sm;

  const double t1 = c1 * normal_cdf(-m / std::sqrt(in.sigma_pq_sq + in.sigma_mu_sq));
  const double t2 = 0.5 * (c2 - c1) * normal_cdf(zs);

  // I = int_{-inf}^{mu*} N(u; m, sm^2) erf(-u / (s sqrt2)) du, split at u = 0.
  const double inv = 1.0 / (s * std::numbers::sqrt2);
  const double upper = std::min(ms, 0.0);
  double integral = normal_cdf((upper - m) / sm);
  for (std::size_t k = 0; k < kW.size(); ++k)
    integral -= kW[k] * gauss_exp_quad(m, in.sigma_mu_sq, kA[k] * inv * inv, -kB[k] * inv, -kInf, upper);
  if (ms > 0.0) {
    integral -= normal_cdf(zs) - normal_cdf(-m / sm);
    for (std::size_t k = 0; k < kW.size(); ++k)
      integral += kW[k] * gauss_exp_quad(m, in.sigma_mu_sq, kA[k] * inv * inv, kB[k] * inv, 0.0, ms);
  }

  const double raw = t1 + t2 - 0.5 * (c1 + c2) * integral;
  const double hi = loss.max_cost();
  if (!std::isfinite(raw) || raw < -1e-6 || raw > hi + 1e-6) return expected_bayes_risk_quadrature(in, loss);
  return std::clamp(raw, 0.0, hi);
}

double expected_bayes_risk_quadrature(const ExpectedRiskInputs& in, const LossParams& loss) {
  check_inputs(in, loss);
  if (in.sigma_mu_sq == 0.0) return bayes_risk(in.mu_mu, in.sigma_pq_sq, loss);

  const double sm = std::sqrt(in.sigma_mu_sq);
  const double s = std::sqrt(in.sigma_pq_sq);
  const double zs = std::clamp((mu_star(s, loss) - in.mu_mu) / sm, -12.0, 12.0);
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  auto f = [&](double z) {
    return inv_sqrt_2pi * std::exp(-0.5 * z * z) * bayes_risk(in.mu_mu + sm * z, in.sigma_pq_sq, loss);
  };

  using Gk = boost::math::quadrature::gauss_kronrod<double, 61>;
  double total = 0.0;
  double err_total = 0.0;
  for (auto [a, b] : {std::pair{-12.0, zs}, std::pair{zs, 12.0}}) {
    if (!(a < b)) continue;
    double err = 0.0;
    total += Gk::integrate(f, a, b, 20, 1e-12, &err);
    err_total += err;
  }
  if (err_total > 1e-6) throw NumericalError("expected risk quadrature did not converge");
  return std::clamp(total, 0.0, loss.max_cost());
}

McEstimate expected_bayes_risk_mc(const gp::GpModel& model, const gp::DataSet& data_s,
                                  std::span<const Vec2> planned, const Vec2& query,
                                  const LossParams& loss, std::size_t n_draws, std::uint64_t seed) {
  loss.validate();
  model.validate();
  if (n_draws < 100) throw ConfigError("expected_bayes_risk_mc needs n_draws >= 100");

  gp::DataSet q = data_s;
  for (const auto& p : planned) q.insert({p, 0.0});
  const std::size_t ns = data_s.size();
  const std::size_t np = q.size() - ns;
  const gp::Prediction at_s = gp::posterior_predict(model, data_s, std::span(&query, 1)).front();
  if (np == 0) return {bayes_risk(at_s.mean, at_s.variance, loss), 0.0};

  const gp::KernelSpec& k = model.kernel;
  const double m0 = model.prior_mean;
  const double noise = k.noise_variance();
  auto point = [&](std::size_t i) { return q.locations()[i]; };

  // Joint predictive of the planned measurements given S.
  std::vector<double> mean_p(np, m0);
  std::vector<double> cov(np * np, 0.0);
  {
    std::vector<std::vector<double>> v(np, std::vector<double>(ns, 0.0));
    std::vector<double> w;
    if (ns > 0) {
      std::vector<double> gram(ns * ns);
      for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = 0; j <= i; ++j) gram[i * ns + j] = k(point(i), point(j)) + (i == j ? noise : 0.0);
      linalg::Cholesky ls;
      ls.factor(gram, ns, model.jitter(), model.condition_cap);
      w.assign(data_s.values().begin(), data_s.values().end());
      for (auto& x : w) x -= m0;
      ls.solve_lower(w);
      for (std::size_t j = 0; j < np; ++j) {
        for (std::size_t i = 0; i < ns; ++i) v[j][i] = k(point(i), point(ns + j));
        ls.solve_lower(v[j]);
        double dot = 0.0;
        for (std::size_t i = 0; i < ns; ++i) dot += v[j][i] * w[i];
        mean_p[j] += dot;
      }
    }
    for (std::size_t a = 0; a < np; ++a)
      for (std::size_t b = 0; b <= a; ++b) {
        double c = k(point(ns + a), point(ns + b));
        for (std::size_t i = 0; i < ns; ++i) c -= v[a][i] * v[b][i];
        if (a == b) c += noise;
        cov[a * np + b] = c;
      }
  }
  linalg::Cholesky lc;
  lc.factor(cov, np, model.jitter(), model.condition_cap);

  // Posterior mean at the query given Q is linear in the measurements.
  const std::size_t nq = q.size();
  std::vector<double> gram(nq * nq);
  for (std::size_t i = 0; i < nq; ++i)
    for (std::size_t j = 0; j <= i; ++j) gram[i * nq + j] = k(point(i), point(j)) + (i == j ? noise : 0.0);
  linalg::Cholesky lq;
  lq.factor(gram, nq, model.jitter(), model.condition_cap);
  std::vector<double> gain(nq);
  for (std::size_t i = 0; i < nq; ++i) gain[i] = k(point(i), query);
  lq.solve_lower(gain);
  double var_q = k.signal_variance;
  for (double g : gain) var_q -= g * g;
  var_q = std::max(var_q, 0.0);
  lq.solve_upper(gain);

  double base = m0;
  for (std::size_t i = 0; i < ns; ++i) base += gain[i] * (data_s.values()[i] - m0);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> eps(np);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t d = 0; d < n_draws; ++d) {
    for (auto& e : eps) e = normal(rng);
    double mu = base;
    for (std::size_t a = 0; a < np; ++a) {
      double z = mean_p[a];
      for (std::size_t b = 0; b <= a; ++b) z += lc.at(a, b) * eps[b];
      mu += gain[ns + a] * (z - m0);
    }
    const double r = bayes_risk(mu, var_q, loss);
    const double delta = r - mean;
    mean += delta / static_cast<double>(d + 1);
    m2 += delta * (r - mean);
  }
  const double var = m2 / static_cast<double>(n_draws - 1);
  return {mean, std::sqrt(var / static_cast<double>(n_draws))};
}

double benefit_of_search(const gp::GpModel& model, const gp::DataSet& d1, const gp::DataSet& d2,
                         std::span<const Vec2> eval_points, const LossParams& loss) {
  loss.validate();
  if (eval_points.empty()) throw ConfigError("benefit_of_search needs eval points");
  if (d2.empty()) return 0.0;
  gp::DataSet merged = d1;
  for (std::size_t i = 0; i < d2.size(); ++i) merged.insert(d2[i]);
  if (merged.size() == d1.size()) return 0.0;

  const auto before = gp::posterior_predict(model, d1, eval_points);
  const auto after = gp::posterior_predict(model, merged, eval_points);
  double total = 0.0;
  for (std::size_t i = 0; i < eval_points.size(); ++i)
    total += bayes_risk(before[i].mean, before[i].variance, loss) -
             bayes_risk(after[i].mean, after[i].variance, loss);
  return total;
}

double expected_benefit_of_search(const gp::GpModel& model, const gp::DataSet& data_s,
                                  std::span<const Vec2> planned, std::span<const Vec2> eval_points,
                                  const LossParams& loss) {
  loss.validate();
  if (eval_points.empty()) throw ConfigError("expected_benefit_of_search needs eval points");
  gp::DataSet q = data_s;
  for (const auto& p : planned) q.insert({p, 0.0});
  if (q.size() == data_s.size()) return 0.0;

  const auto at_s = gp::posterior_predict(model, data_s, eval_points);
  const auto at_q = gp::posterior_predict(model, q, eval_points);
  double total = 0.0;
  for (std::size_t i = 0; i < eval_points.size(); ++i) {
    const ExpectedRiskInputs in{at_s[i].mean, std::max(at_s[i].variance - at_q[i].variance, 0.0),
                                at_q[i].variance};
    total += bayes_risk(at_s[i].mean, at_s[i].variance, loss) - expected_bayes_risk_closed(in, loss);
  }
  return total;
}

void RiskField::write_csv(std::ostream& os) const {
  os << "north_m,east_m,risk\n";
  char line[96];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::snprintf(line, sizeof line, "%.3f,%.3f,%.9g\n", grid[i].north, grid[i].east, values[i]);
    os << line;
  }
}

RiskField risk_field(const gp::GpModel& model, const gp::DataSet& data, std::span<const Vec2> grid,
                     const LossParams& loss) {
  RiskField field;
  field.grid.assign(grid.begin(), grid.end());
  const auto pred = gp::posterior_predict(model, data, grid);
  field.values.reserve(pred.size());
  for (const auto& p : pred) field.values.push_back(bayes_risk(p.mean, p.variance, loss));
  return field;
}

}  // namespace isobath::risk
