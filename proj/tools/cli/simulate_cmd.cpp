#include <cstdio>
#include <iostream>
#include <memory>
#include <sstream>

#include "commands.hpp"
#include "common.hpp"
#include "survctl/grid_io.hpp"
#include "survctl/simulator.hpp"
#include "survctl/verifier.hpp"

namespace survctl::cli {

namespace {

struct SimulateArgs {
  std::string policy = "laggard";
  std::string x0;
  double b = 0.0;
  double budget = 1.0;
  std::uint64_t paths = 10000;
  double dt = 1e-3;
  double horizon = 50.0;
  double barrier = 0.0;
  std::uint64_t seed = 0;
  std::string payoff = "all";
  std::string estimator = "horizon";
  std::string crossing = "bridge";
  std::string schedule;
  unsigned threads = 1;
  std::string out;
};

int run_simulate(const SimulateArgs& a, CLI::App& app) {
  if (a.x0.empty()) throw Error(ErrorCode::kConfig, "simulate needs --x0 x1,...,xn");
  SimConfig cfg;
  cfg.x0 = parse_doubles(a.x0, "--x0");
  cfg.params = DriftBudget::for_simulator(a.b, a.budget);
  cfg.paths = a.paths;
  cfg.dt = a.dt;
  cfg.horizon = a.horizon;
  if (app.count("--barrier") > 0) cfg.barrier = a.barrier;
  cfg.seed = a.seed;
  cfg.payoff = parse_payoff(a.payoff);
  cfg.estimator = parse_estimator(a.estimator);
  cfg.crossing = parse_crossing(a.crossing);
  cfg.threads = a.threads;

  std::vector<double> horizons{cfg.horizon};
  if (!a.schedule.empty()) {
    horizons = parse_doubles(a.schedule, "--schedule");
    cfg.horizon = horizons.back();
  }

  nlohmann::json inputs = nlohmann::json::object();
  Policy policy;
  if (a.policy.rfind("grid:", 0) == 0) {
    const ValueGrid grid = load_grid(a.policy.substr(5));
    inputs["grid"] = grid_provenance(grid);
    policy = make_grid_feedback(grid);
  } else {
    policy = parse_policy(a.policy);
  }

  Stopwatch watch;
  const std::vector<SimEstimate> estimates = horizon_schedule(cfg, policy, horizons);
  const SimEstimate& last = estimates.back();

  nlohmann::json config = cfg.to_json();
  config["policy"] = describe(policy);
  nlohmann::json record{{"command", "simulate"},
                        {"software", kVersion},
                        {"config", config},
                        {"inputs", inputs},
                        {"estimate", last.to_json()}};
  std::ostringstream csv;
  if (!a.schedule.empty()) {
    nlohmann::json rows = nlohmann::json::array();
    csv << "horizon,mean,stderr,ci_lo,ci_hi,truncated_fraction\n";
    char line[256];
    for (const auto& e : estimates) {
      rows.push_back(e.to_json());
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.horizon, e.mean,
                    e.std_error, e.ci_lo, e.ci_hi, e.truncated_fraction);
      csv << line;
    }
    record["schedule"] = rows;
  }

  const std::filesystem::path out = a.out.empty() ? output_root() / "simulate" : std::filesystem::path(a.out);
  write_json(out / "estimate.json", record);
  if (!a.schedule.empty()) write_text(out / "schedule.csv", csv.str());
  write_timing(out, "simulate", watch, a.threads);

  std::printf("mean %.6f +- %.6f  (95%% CI [%.6f, %.6f], %llu paths, %s, T=%g, truncated %.4f)\n",
              last.mean, 1.96 * last.std_error, last.ci_lo, last.ci_hi,
              static_cast<unsigned long long>(last.paths), estimator_label(last.mode), last.horizon,
              last.truncated_fraction);
  return kOk;
}

}  // namespace

Command make_simulate(CLI::App& parent) {
  auto a = std::make_shared<SimulateArgs>();
  Command c;
  CLI::App* app = parent.add_subcommand("simulate", "Monte Carlo estimate under a feedback policy");
  app->add_option("--policy", a->policy, "laggard | uniform | fixed:I | grid:PATH | split:w1,...,wn")
      ->capture_default_str();
  app->add_option("--x0", a->x0, "Starting point, comma separated");
  app->add_option("--b", a->b, "Common drift (any real)")->capture_default_str();
  app->add_option("--budget", a->budget, "Total allocation budget a")->capture_default_str();
  app->add_option("--paths", a->paths, "Number of paths M")->capture_default_str();
  app->add_option("--dt", a->dt, "Euler step")->capture_default_str();
  app->add_option("--horizon", a->horizon, "Time horizon T")->capture_default_str();
  app->add_option("--barrier", a->barrier, "Success barrier R for --estimator barrier");
  app->add_option("--seed", a->seed, "Unsigned 64-bit seed")->capture_default_str();
  app->add_option("--payoff", a->payoff, "all | count")
      ->check(CLI::IsMember({"all", "count"}))
      ->capture_default_str();
  app->add_option("--estimator", a->estimator, "horizon | barrier")
      ->check(CLI::IsMember({"horizon", "barrier"}))
      ->capture_default_str();
  app->add_option("--crossing", a->crossing, "bridge | discrete absorption test")
      ->check(CLI::IsMember({"bridge", "discrete"}))
      ->capture_default_str();
  app->add_option("--schedule", a->schedule, "Increasing horizons T1,T2,... (writes schedule.csv)");
  app->add_option("--threads", a->threads, "Worker threads (0 = all cores)")->capture_default_str();
  app->add_option("--out", a->out, "Output directory (default $SURVCTL_OUTPUT_ROOT/simulate)");
  app->add_option("--config", *c.config, "JSON file with defaults for these flags");
  c.app = app;
  c.run = [a, app] { return run_simulate(*a, *app); };
  return c;
}

}  // namespace survctl::cli
