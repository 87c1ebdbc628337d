// Acceptance run: one PASS/FAIL line per criterion. Optional arguments pick
// criteria by number (e.g. `isobath_acceptance 1 2 7`).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "isobath/comms.hpp"
#include "isobath/mission.hpp"
#include "isobath/planner.hpp"
#include "isobath/risk.hpp"
#include "oracles.hpp"

using namespace isobath;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

unsigned threads() { return std::max(1u, std::thread::hardware_concurrency()); }

const std::vector<std::uint64_t>& paired_seeds() {
  static const std::vector<std::uint64_t> s = [] {
    std::vector<std::uint64_t> v;
    for (std::uint64_t i = 1; i <= 20; ++i) v.push_back(i);
    return v;
  }();
  return s;
}

gp::DataSet random_data(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> pos(0.0, 400.0), depth(5.0, 25.0);
  gp::DataSet d(25.0);
  for (std::size_t i = 0; i < n; ++i) d.insert({{pos(rng), pos(rng)}, depth(rng)});
  return d;
}

Outcome normalization() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> n(0, 30);
  std::uniform_real_distribution<double> pos(0.0, 400.0), ell(20.0, 80.0), c(1.0, 19.0);
  std::size_t nonzero = 0;
  for (int i = 0; i < 1000; ++i) {
    const gp::GpModel model{{ell(rng), 25.0, 0.5}, 15.0};
    const double c1 = c(rng);
    const risk::LossParams loss{15.0, c1, 20.0 - c1};
    const gp::DataSet d1 = random_data(rng, n(rng));
    std::vector<Vec2> eval;
    for (int k = 0; k < 20; ++k) eval.push_back({pos(rng), pos(rng)});
    if (risk::benefit_of_search(model, d1, gp::DataSet(25.0), eval, loss) != 0.0) ++nonzero;
  }
  return {nonzero == 0, fmt("%zu of 1000 instances nonzero", nonzero)};
}

Outcome monotonicity() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> off(-8.0, 8.0), sd(0.0, 5.0), sp(1e-3, 5.0), ratio(0.02, 0.98);
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10000; ++i) {
    const double r = ratio(rng);
    const risk::LossParams loss{15.0, 20.0 * r, 20.0 * (1.0 - r)};
    const double smu = sd(rng), spq = sp(rng);
    const risk::ExpectedRiskInputs in{15.0 + off(rng), smu * smu, spq * spq};
    const double benefit = risk::bayes_risk(in.mu_mu, in.sigma_mu_sq + in.sigma_pq_sq, loss) -
                           risk::expected_bayes_risk_closed(in, loss);
    worst = std::min(worst, benefit);
  }
  // the same property through the GP path
  std::uniform_int_distribution<std::size_t> n(0, 20), m(1, 10);
  std::uniform_real_distribution<double> pos(0.0, 400.0);
  double worst_gp = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 300; ++i) {
    const double r = ratio(rng);
    const risk::LossParams loss{15.0, 20.0 * r, 20.0 * (1.0 - r)};
    const gp::GpModel model{{50.0, 25.0, 0.5}, 15.0};
    const gp::DataSet s = random_data(rng, n(rng));
    std::vector<Vec2> planned, eval;
    for (std::size_t k = m(rng); k > 0; --k) planned.push_back({pos(rng), pos(rng)});
    for (int k = 0; k < 10; ++k) eval.push_back({pos(rng), pos(rng)});
    worst_gp = std::min(worst_gp, risk::expected_benefit_of_search(model, s, planned, eval, loss));
  }
  return {worst >= -1e-6 && worst_gp >= -1e-6,
          fmt("min benefit %.3g over 10000 parametric, %.3g over 300 GP instances", worst, worst_gp)};
}

Outcome closed_form() {
  const auto grid = oracle::risk_grid();
  double worst = 0.0;
  for (const auto& cell : grid)
    worst = std::max(worst, std::abs(risk::expected_bayes_risk_closed(cell.inputs, cell.loss) -
                                     risk::expected_bayes_risk_quadrature(cell.inputs, cell.loss)));
  std::size_t outside = 0;
  double worst_z = 0.0;
  for (std::size_t k = 0; k < 20; ++k) {
    const auto& cell = grid[(k * 37 + 5) % grid.size()];
    const auto mc = oracle::expected_risk_mc(cell.inputs, cell.loss, 100000, 1000 + k);
    const double se = std::max(mc.std_error, 1e-12);
    for (double v : {risk::expected_bayes_risk_closed(cell.inputs, cell.loss),
                     risk::expected_bayes_risk_quadrature(cell.inputs, cell.loss)}) {
      const double z = std::abs(v - mc.mean) / se;
      worst_z = std::max(worst_z, z);
      if (z > 3.0) ++outside;
    }
  }
  return {worst <= 1e-3 && outside == 0,
          fmt("max |closed - quadrature| %.3g on %zu cells; max |z| vs MC %.2f on 20 cells", worst, grid.size(),
              worst_z)};
}

Outcome mu_star() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> s(0.01, 10.0), c(0.1, 50.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const risk::LossParams loss{15.0, c(rng), c(rng)};
    const double sig = s(rng);
    const double p = risk::normal_cdf((loss.level - risk::mu_star(sig, loss)) / sig);
    worst = std::max(worst, std::abs(p - loss.c2() / (loss.c1() + loss.c2())));
  }
  bool equal_ok = true;
  for (int i = 0; i < 100; ++i) {
    const double cc = c(rng);
    equal_ok = equal_ok && risk::mu_star(s(rng), {15.0, cc, cc}) == 15.0;
  }
  return {worst <= 1e-10 && equal_ok, fmt("max |P - c2/(c1+c2)| %.3g; mu* = l for equal costs: %s", worst,
                                          equal_ok ? "yes" : "no")};
}

Outcome gp_oracle() {
  const auto r = oracle::gp_suite(1e-8, 200, 505);
  return {r.pass, r.detail};
}

Outcome codec() {
  const auto r = oracle::codec_suite(100000, 606);
  return {r.pass, r.detail};
}

Outcome tdma() {
  const sim::MissionConfig cfg;
  const auto log = sim::run_mission(cfg, sim::Variant::Lawnmower, 1);
  if (log.end_time < 600.0) return {false, fmt("mission ended at %.0f s, before 600 s", log.end_time)};
  std::map<std::pair<std::size_t, long>, int> count;
  for (const auto& b : log.broadcasts)
    if (b.time < 600.0) ++count[{b.agent, static_cast<long>(std::floor(b.time / 30.0))}];
  std::size_t bad = 0;
  for (std::size_t a = 0; a < cfg.team_size; ++a)
    for (long w = 0; w < 20; ++w) {
      const auto it = count.find({a, w});
      if (it == count.end() || it->second != 1) ++bad;
    }
  return {bad == 0, fmt("%zu of 60 (agent, 30 s window) pairs without exactly one broadcast", bad)};
}

Outcome horizon_one() {
  const OperationalArea area{{0, 0}, {600, 1000}};
  auto grid = std::make_shared<RegularGrid>(area, 25.0);
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> n(0, 600), e(0, 1000), d(5, 25), h(-3.1, 3.1);
  std::uniform_int_distribution<std::size_t> count(0, 40), total(1, 8);
  std::size_t mismatch = 0;
  double worst = 0.0;
  for (int c = 0; c < 50; ++c) {
    gp::Belief belief({{50.0, 25.0, 0.5}, 15.0}, 25.0, 150.0, grid);
    for (std::size_t k = count(rng); k > 0; --k) belief.insert({{n(rng), e(rng)}, d(rng)});
    plan::PlanContext ctx;
    ctx.belief = &belief;
    ctx.lawnmower = motion::LawnmowerSpec::for_agent(area, 0, 1, motion::default_swath(ctx.motion));
    plan::PlanConfig cfg;
    cfg.short_horizon = 1;
    cfg.total_length = total(rng);
    cfg.use_terminal_reward = c % 2 == 0;
    cfg.mcts_iterations = motion::kActionCount;
    const motion::AgentState s{h(rng), 100.0 + 0.67 * n(rng), 100.0 + 0.8 * e(rng)};
    const auto best = oracle::brute_force_horizon1(s, ctx, cfg);
    const auto got = plan::mcts_plan(s, ctx, cfg, 900 + c);
    const double gap = std::abs(got.value - best.value);
    worst = std::max(worst, gap);
    if (gap > 1e-9 * std::max(1.0, std::abs(best.value))) ++mismatch;
  }
  return {mismatch == 0, fmt("%zu of 50 beliefs differ from the brute-force argmax (max gap %.3g)", mismatch, worst)};
}

// Logs of the paired-seed comparison, kept for the determinism rerun.
std::map<std::pair<std::uint64_t, int>, std::string> g_logs;
std::mutex g_logs_mu;

std::string ndjson(const sim::MissionLog& log) {
  std::ostringstream os;
  log.write_ndjson(os);
  return os.str();
}

Outcome paired_comparison() {
  const sim::MissionConfig cfg;
  const auto summary = sim::compare_methods(cfg, paired_seeds(), {sim::Variant::TerminalReward, sim::Variant::Plain,
                                                                  sim::Variant::Lawnmower},
                                            threads(), [](const sim::MissionLog& log) {
                                              std::lock_guard lock(g_logs_mu);
                                              g_logs[{log.seed, static_cast<int>(log.variant)}] = ndjson(log);
                                            });
  for (const auto& row : summary.rows)
    std::printf("  seed %2llu  terminal %9.3f  plain %9.3f  lawnmower %9.3f\n",
                static_cast<unsigned long long>(row.seed), row.final_reward[0], row.final_reward[1],
                row.final_reward[2]);
  const double win = summary.win_fraction(0, 2);
  const double mt = summary.mean_final(0), mp = summary.mean_final(1), ml = summary.mean_final(2);
  return {win >= 0.9 && mt >= mp,
          fmt("terminal >= lawnmower in %.0f%% of seeds; mean final terminal %.3f, plain %.3f, lawnmower %.3f", 100 * win,
              mt, mp, ml)};
}

struct ErrorPair {
  double mid = 0.0;
  double end = 0.0;
  bool bounded = true;
};

ErrorPair snapshot_errors(const sim::MissionLog& log, const sim::MissionConfig& cfg) {
  ErrorPair e;
  const auto& prior = sim::risk_snapshot(log, 0, sim::Scope::Global);
  for (std::size_t step : {cfg.mid_step, cfg.total_length}) {
    const auto& g = sim::risk_snapshot(log, step, sim::Scope::Global);
    double worst = 0.0;
    for (std::size_t a = 0; a < cfg.team_size; ++a) {
      const auto& f = sim::risk_snapshot(log, step, sim::Scope::Agent, a);
      for (std::size_t i = 0; i < g.values.size(); ++i) {
        const double err = std::abs(f.values[i] - g.values[i]);
        worst = std::max(worst, err);
        if (err > prior.values[i] + 1e-12) e.bounded = false;
      }
    }
    (step == cfg.mid_step ? e.mid : e.end) = worst;
  }
  return e;
}

Outcome error_fields() {
  const auto& seeds = paired_seeds();
  std::vector<ErrorPair> lossy(seeds.size()), clean(seeds.size());
  for (double drop : {0.5, 0.0}) {
    sim::MissionConfig cfg;
    cfg.channel.drop_probability = drop;
    auto& out = drop > 0.0 ? lossy : clean;
    sim::run_experiment(cfg, seeds, {sim::Variant::TerminalReward}, threads(), [&](const sim::MissionLog& log) {
      const auto it = std::find(seeds.begin(), seeds.end(), log.seed);
      out[static_cast<std::size_t>(it - seeds.begin())] = snapshot_errors(log, cfg);
    });
  }
  std::size_t shrink = 0, end_below_mid = 0;
  bool bounded = true;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    bounded = bounded && lossy[i].bounded && clean[i].bounded;
    const bool ok = clean[i].mid <= lossy[i].mid && clean[i].end <= lossy[i].end;
    if (ok) ++shrink;
    if (clean[i].end <= clean[i].mid) ++end_below_mid;
    std::printf("  seed %2llu  max error mid/end: drop 0.5 %.3f/%.3f  drop 0.0 %.3f/%.3f\n",
                static_cast<unsigned long long>(seeds[i]), lossy[i].mid, lossy[i].end, clean[i].mid, clean[i].end);
  }
  const double frac = static_cast<double>(shrink) / static_cast<double>(seeds.size());
  return {bounded && frac >= 0.8,
          fmt("errors within prior risk everywhere: %s; lower at drop 0 (mid and end) in %.0f%% of seeds; "
              "end <= mid at drop 0 in %zu/%zu",
              bounded ? "yes" : "no", 100 * frac, end_below_mid, seeds.size())};
}

Outcome determinism() {
  const sim::MissionConfig cfg;
  std::size_t compared = 0, differ = 0;
  for (std::uint64_t seed : {1ull, 2ull})
    for (auto v : {sim::Variant::TerminalReward, sim::Variant::Plain, sim::Variant::Lawnmower}) {
      const std::string again = ndjson(sim::run_mission(cfg, v, seed));
      const auto it = g_logs.find({seed, static_cast<int>(v)});
      const std::string first = it != g_logs.end() ? it->second : ndjson(sim::run_mission(cfg, v, seed));
      ++compared;
      if (first != again) ++differ;
    }
  return {differ == 0, fmt("%zu of %zu reruns differ byte-wise", differ, compared)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"normalization", normalization},
      {"monotonicity in expectation", monotonicity},
      {"closed-form expected risk", closed_form},
      {"decision boundary mu*", mu_star},
      {"GP oracle equivalence", gp_oracle},
      {"packet codec", codec},
      {"TDMA broadcast schedule", tdma},
      {"horizon-1 planner optimality", horizon_one},
      {"paired-seed method comparison", paired_comparison},
      {"belief error fields vs drop rate", error_fields},
      {"log determinism", determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!wanted.empty() && !wanted.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %s  %s: %s (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
