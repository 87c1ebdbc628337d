// isobath run | validate

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "CLI11.hpp"

#include "isobath/errors.hpp"
#include "isobath/mission.hpp"
#include "oracles.hpp"

extern char** environ;

namespace fs = std::filesystem;
using namespace isobath;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::vector<std::uint64_t> parse_seeds(const std::string& list) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-');
    try {
      if (dash != std::string::npos && dash > 0) {
        const auto lo = std::stoull(item.substr(0, dash));
        const auto hi = std::stoull(item.substr(dash + 1));
        if (hi < lo) throw ConfigError("seed range '" + item + "' is reversed");
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
      } else {
        seeds.push_back(std::stoull(item));
      }
    } catch (const std::logic_error&) {
      throw ConfigError("bad seed '" + item + "'");
    }
  }
  if (seeds.empty()) throw ConfigError("no seeds given");
  return seeds;
}

std::vector<sim::Variant> parse_variants(const std::string& list) {
  std::vector<sim::Variant> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(sim::parse_variant(item));
  if (out.empty()) throw ConfigError("no variants given");
  return out;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  out << text;
}

void write_field(const fs::path& p, const risk::RiskField& f) {
  std::ostringstream os;
  f.write_csv(os);
  write_file(p, os.str());
}

// Per-seed directory: mission log, reward trace, risk fields and the
// agent-minus-global error fields at each snapshot.
void write_outputs(const fs::path& out, const sim::MissionLog& log) {
  const fs::path dir = out / ("seed_" + std::to_string(log.seed));
  fs::create_directories(dir);
  const std::string v(sim::variant_name(log.variant));

  std::ostringstream nd;
  log.write_ndjson(nd);
  write_file(dir / (v + ".ndjson"), nd.str());

  std::ostringstream tr;
  tr << "step,reward\n";
  char line[64];
  for (std::size_t s = 0; s < log.reward_trace.size(); ++s) {
    std::snprintf(line, sizeof line, "%zu,%.9g\n", s, log.reward_trace[s]);
    tr << line;
  }
  write_file(dir / (v + "_trace.csv"), tr.str());

  write_field(dir / "prior_risk.csv", log.prior);
  for (const auto& snap : log.snapshots) {
    const std::string tag = "_step" + std::to_string(snap.step);
    write_field(dir / (v + "_global" + tag + ".csv"), snap.global);
    for (std::size_t k = 0; k < snap.agents.size(); ++k) {
      write_field(dir / (v + "_agent" + std::to_string(k) + tag + ".csv"), snap.agents[k]);
      risk::RiskField err = snap.agents[k];
      for (std::size_t i = 0; i < err.values.size(); ++i) err.values[i] -= snap.global.values[i];
      write_field(dir / (v + "_error_agent" + std::to_string(k) + tag + ".csv"), err);
    }
  }
}

int cmd_run(const std::string& config_path, const std::string& seeds_arg, const std::string& variants_arg,
            const std::string& out_dir, unsigned threads) {
  sim::MissionConfig cfg = config_path.empty() ? sim::MissionConfig{} : sim::load_config_file(config_path);
  sim::apply_env_overrides(cfg, environ);
  cfg.validate();
  const auto seeds = parse_seeds(seeds_arg);
  const auto variants = parse_variants(variants_arg);
  if (out_dir.empty()) throw ConfigError("--out is required");
  const fs::path out(out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out_dir + "': " + ec.message());
  write_file(out / "config.json", sim::config_to_json(cfg));

  std::mutex mu;
  const auto summary = sim::run_experiment(cfg, seeds, variants, threads, [&](const sim::MissionLog& log) {
    write_outputs(out, log);
    std::lock_guard lock(mu);
    std::fprintf(stderr, "seed %llu %-9s final reward %.3f\n", static_cast<unsigned long long>(log.seed),
                 std::string(sim::variant_name(log.variant)).c_str(), log.final_reward());
  });
  std::ostringstream os;
  summary.write_csv(os);
  write_file(out / "summary.csv", os.str());

  std::printf("%-10s %14s\n", "variant", "mean final");
  for (std::size_t v = 0; v < variants.size(); ++v)
    std::printf("%-10s %14.3f\n", std::string(sim::variant_name(variants[v])).c_str(), summary.mean_final(v));
  for (std::size_t a = 0; a < variants.size(); ++a)
    for (std::size_t b = 0; b < variants.size(); ++b)
      if (a != b)
        std::printf("%s >= %s in %.0f%% of seeds\n", std::string(sim::variant_name(variants[a])).c_str(),
                    std::string(sim::variant_name(variants[b])).c_str(), 100.0 * summary.win_fraction(a, b));
  return 0;
}

int cmd_validate(const std::string& suites_arg, double tolerance, std::size_t cases) {
  std::vector<std::string> suites;
  std::stringstream ss(suites_arg);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) suites.push_back(item);
  if (suites.empty()) throw ConfigError("no suite selected (all, risk, codec, gp)");
  const auto wants = [&](const char* name) {
    return std::find(suites.begin(), suites.end(), name) != suites.end() ||
           std::find(suites.begin(), suites.end(), "all") != suites.end();
  };
  for (const auto& s : suites)
    if (s != "all" && s != "risk" && s != "codec" && s != "gp") throw ConfigError("unknown suite '" + s + "'");

  std::vector<oracle::SuiteResult> results;
  if (wants("risk")) results.push_back(oracle::risk_suite(tolerance > 0.0 ? tolerance : 1e-3));
  if (wants("codec")) results.push_back(oracle::codec_suite(cases, 1));
  if (wants("gp")) results.push_back(oracle::gp_suite(tolerance > 0.0 ? tolerance : 1e-8, 200, 1));
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%s %-6s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized isobath mapping: mission simulation and oracle checks"};
  app.require_subcommand(1);

  std::string config_path, seeds = "1", variants = "terminal,plain,lawnmower", out_dir;
  unsigned threads = 1;
  auto* run = app.add_subcommand("run", "Run every variant on every seed and write logs, traces and fields");
  run->add_option("--config", config_path, "Mission configuration (JSON); defaults apply when omitted");
  run->add_option("--seeds", seeds, "Comma-separated seeds or ranges, e.g. 1,2,5-8");
  run->add_option("--variants", variants, "Comma-separated subset of terminal,plain,lawnmower");
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--threads", threads, "Missions run in parallel")->check(CLI::Range(1u, 256u));

  std::string suite = "all";
  double tolerance = 0.0;
  std::size_t cases = 100000;
  auto* validate = app.add_subcommand("validate", "Run the oracle suites");
  validate->add_option("--suite", suite, "all, risk, codec or gp (comma-separated)");
  validate->add_option("--tolerance", tolerance, "Override the risk/gp tolerance");
  validate->add_option("--cases", cases, "Codec fuzz cases");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, seeds, variants, out_dir, threads);
    return cmd_validate(suite, tolerance, cases);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
