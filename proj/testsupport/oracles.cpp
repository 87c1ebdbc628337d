#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "isobath/errors.hpp"

namespace isobath::oracle {

std::vector<double> gauss_solve(std::vector<double> a, std::vector<double> b, std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (a[piv * n + col] == 0.0) throw NumericalError("singular system in oracle");
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i * n + c] * x[c];
    x[i] = s / a[i * n + i];
  }
  return x;
}

std::vector<gp::Prediction> dense_gp_predict(const gp::GpModel& model, const std::vector<gp::Sample>& data,
                                             const std::vector<Vec2>& queries) {
  const std::size_t n = data.size();
  const auto& k = model.kernel;
  std::vector<gp::Prediction> out;
  if (n == 0) {
    out.assign(queries.size(), {model.prior_mean, k.signal_variance});
    return out;
  }
  std::vector<double> gram(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      gram[i * n + j] = k(data[i].location, data[j].location) + (i == j ? k.noise_variance() : 0.0);
  std::vector<double> resid(n);
  for (std::size_t i = 0; i < n; ++i) resid[i] = data[i].value - model.prior_mean;
  const std::vector<double> alpha = gauss_solve(gram, resid, n);
  for (const auto& q : queries) {
    std::vector<double> ks(n);
    for (std::size_t i = 0; i < n; ++i) ks[i] = k(q, data[i].location);
    const std::vector<double> v = gauss_solve(gram, ks, n);
    double mean = model.prior_mean;
    double reduce = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mean += ks[i] * alpha[i];
      reduce += ks[i] * v[i];
    }
    out.push_back({mean, k.signal_variance - reduce});
  }
  return out;
}

namespace {

double simpson(const auto& f, double a, double b, int panels) {
  if (b <= a) return 0.0;
  const double h = (b - a) / (2.0 * panels);
  double s = f(a) + f(b);
  for (int i = 1; i < 2 * panels; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

double expected_risk_simpson(const risk::ExpectedRiskInputs& in, const risk::LossParams& loss, int panels) {
  if (in.sigma_mu_sq <= 0.0) return risk::bayes_risk(in.mu_mu, in.sigma_pq_sq, loss);
  const double sd = std::sqrt(in.sigma_mu_sq);
  const auto f = [&](double mu) {
    const double z = (mu - in.mu_mu) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi)) *
           risk::bayes_risk(mu, in.sigma_pq_sq, loss);
  };
  const double lo = in.mu_mu - 12.0 * sd;
  const double hi = in.mu_mu + 12.0 * sd;
  const double kink = in.sigma_pq_sq > 0.0 ? risk::mu_star(std::sqrt(in.sigma_pq_sq), loss) : loss.level;
  if (kink <= lo || kink >= hi) return simpson(f, lo, hi, 2 * panels);
  return simpson(f, lo, kink, panels) + simpson(f, kink, hi, panels);
}

McResult expected_risk_mc(const risk::ExpectedRiskInputs& in, const risk::LossParams& loss, std::size_t n,
                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> mu(in.mu_mu, std::sqrt(std::max(in.sigma_mu_sq, 0.0)));
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = risk::bayes_risk(mu(rng), in.sigma_pq_sq, loss);
    sum += r;
    sum_sq += r * r;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(sum_sq / static_cast<double>(n) - mean * mean, 0.0);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

std::vector<RiskCell> risk_grid() {
  static constexpr double sigmas[] = {0.1, 0.5, 1.5, 4.0};
  static constexpr double costs[][2] = {{10.0, 10.0}, {5.0, 15.0}, {15.0, 5.0}};
  std::vector<RiskCell> cells;
  for (const auto& c : costs)
    for (double smu : sigmas)
      for (double spq : sigmas)
        for (int i = 0; i < 15; ++i) {
          RiskCell cell;
          cell.loss = {15.0, c[0], c[1]};
          cell.inputs = {15.0 - 5.0 + 10.0 * i / 14.0, smu * smu, spq * spq};
          cells.push_back(cell);
        }
  return cells;
}

BruteBest brute_force_horizon1(const motion::AgentState& start, plan::PlanContext& ctx, const plan::PlanConfig& cfg) {
  BruteBest best;
  best.value = -std::numeric_limits<double>::infinity();
  for (std::uint8_t a = 0; a < motion::kActionCount; ++a) {
    plan::RewardEvaluator eval(ctx, cfg);
    const std::uint8_t seq[] = {a};
    const double v = eval.objective(motion::Path::build(start, seq, ctx.motion));
    if (v > best.value) best = {a, v};
  }
  return best;
}

comms::Packet random_packet(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_real_distribution<float> coord(-1.0e4f, 1.0e4f);
  std::uniform_real_distribution<float> angle(-3.14159f, 3.14159f);
  std::uniform_int_distribution<int> action(0, motion::kActionCount - 1);
  comms::Packet p;
  p.agent_id = static_cast<std::uint8_t>(byte(rng));
  p.plan_epoch = static_cast<std::uint8_t>(byte(rng));
  p.heading = angle(rng);
  p.north = coord(rng);
  p.east = coord(rng);
  const std::size_t max_actions = comms::kPacketBytes - comms::kHeaderBytes - 1;
  const std::size_t n_actions = std::uniform_int_distribution<std::size_t>(0, 9)(rng) == 0
                                    ? std::uniform_int_distribution<std::size_t>(0, max_actions)(rng)
                                    : std::uniform_int_distribution<std::size_t>(0, 12)(rng);
  for (std::size_t i = 0; i < n_actions; ++i) p.actions.push_back(static_cast<std::uint8_t>(action(rng)));
  p.lawnmower_tail = byte(rng) & 1;
  const std::size_t cap = comms::measurement_capacity(n_actions);
  const std::size_t n_meas = std::uniform_int_distribution<std::size_t>(0, cap)(rng);
  for (std::size_t i = 0; i < n_meas; ++i) p.measurements.push_back({coord(rng), coord(rng), coord(rng)});
  return p;
}

SuiteResult risk_suite(double tol) {
  double worst_closed = 0.0;
  double worst_quad = 0.0;
  for (const auto& c : risk_grid()) {
    const double closed = risk::expected_bayes_risk_closed(c.inputs, c.loss);
    const double quad = risk::expected_bayes_risk_quadrature(c.inputs, c.loss);
    const double simp = expected_risk_simpson(c.inputs, c.loss);
    worst_closed = std::max(worst_closed, std::abs(closed - quad));
    worst_quad = std::max(worst_quad, std::abs(quad - simp));
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "720 cells: max |closed - quadrature| = %.3g (tol %.3g), max |quadrature - simpson| = %.3g",
                worst_closed, tol, worst_quad);
  return {"risk", worst_closed <= tol && worst_quad <= std::max(tol, 1e-7), buf};
}

SuiteResult codec_suite(std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::size_t bad_round_trip = 0;
  std::size_t oversize = 0;
  for (std::size_t i = 0; i < cases; ++i) {
    const comms::Packet p = random_packet(rng);
    const auto bytes = comms::encode_packet(p);
    if (bytes.size() > comms::kPacketBytes) ++oversize;
    const comms::Packet q = comms::decode_packet(bytes);
    if (!(q == p) || comms::encode_packet(q) != bytes) ++bad_round_trip;
  }

  // Corrupted buffers: random bytes, truncations, bad action bytes, extra bytes.
  std::size_t rejected = 0;
  std::size_t accepted = 0;
  std::size_t panics = 0;
  std::uniform_int_distribution<int> byte(0, 255);
  for (std::size_t i = 0; i < cases; ++i) {
    std::vector<std::uint8_t> buf;
    const int kind = static_cast<int>(i % 4);
    if (kind == 0) {
      buf.resize(std::uniform_int_distribution<std::size_t>(0, 300)(rng));
      for (auto& b : buf) b = static_cast<std::uint8_t>(byte(rng));
    } else {
      buf = comms::encode_packet(random_packet(rng));
      if (kind == 1) {
        buf.resize(std::uniform_int_distribution<std::size_t>(0, buf.size() - 1)(rng));
      } else if (kind == 2) {
        const std::size_t at = std::uniform_int_distribution<std::size_t>(0, buf.size() - 1)(rng);
        buf[at] = static_cast<std::uint8_t>(byte(rng));
      } else {
        const std::size_t extra = std::uniform_int_distribution<std::size_t>(1, 20)(rng);
        for (std::size_t k = 0; k < extra; ++k) buf.push_back(static_cast<std::uint8_t>(byte(rng)));
      }
    }
    try {
      const comms::Packet p = comms::decode_packet(buf);
      // Anything the decoder accepts must be a faithful encoding.
      if (comms::encode_packet(p) != buf) ++panics;
      ++accepted;
    } catch (const DecodeError&) {
      ++rejected;
    } catch (...) {
      ++panics;
    }
  }

  comms::Packet layout;
  layout.actions = {5, 5, 5};
  layout.measurements.assign(18, {});
  const std::size_t size_3_18 = comms::encode_packet(layout).size();
  const std::size_t cap3 = comms::measurement_capacity(3);

  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%zu valid: %zu round-trip failures, %zu oversize; %zu corrupted: %zu rejected, %zu accepted, %zu "
                "panics; 3 actions + 18 measurements = %zu bytes, capacity(3) = %zu",
                cases, bad_round_trip, oversize, cases, rejected, accepted, panics, size_3_18, cap3);
  const bool pass = bad_round_trip == 0 && oversize == 0 && panics == 0 && size_3_18 == 234 && cap3 == 19;
  return {"codec", pass, buf};
}

SuiteResult gp_suite(double tol, std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (std::size_t c = 0; c < cases; ++c) {
    gp::GpModel model;
    model.kernel.length_scale = 20.0 + 60.0 * u(rng);
    model.kernel.signal_variance = 1.0 + 49.0 * u(rng);
    model.kernel.noise_std = 0.1 + 0.9 * u(rng);
    model.prior_mean = 30.0 * u(rng);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 50)(rng);
    gp::DataSet data(0.0);
    std::vector<gp::Sample> raw;
    for (std::size_t i = 0; i < n; ++i) {
      const gp::Sample s{{200.0 * u(rng), 200.0 * u(rng)}, model.prior_mean + 10.0 * (u(rng) - 0.5)};
      if (data.insert(s) == gp::InsertDecision::Accepted) raw.push_back(s);
    }
    std::vector<Vec2> queries;
    for (int i = 0; i < 10; ++i) queries.push_back({200.0 * u(rng), 200.0 * u(rng)});
    const auto got = gp::posterior_predict(model, data, queries);
    const auto want = dense_gp_predict(model, raw, queries);
    for (std::size_t i = 0; i < queries.size(); ++i) {
      worst = std::max(worst, std::abs(got[i].mean - want[i].mean) / std::max(std::abs(want[i].mean), 1e-12));
      worst = std::max(worst, std::abs(got[i].variance - want[i].variance) / std::max(std::abs(want[i].variance), 1e-12));
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu cases: max relative error %.3g (tol %.3g)", cases, worst, tol);
  return {"gp", worst <= tol, buf};
}

}  // namespace isobath::oracle
