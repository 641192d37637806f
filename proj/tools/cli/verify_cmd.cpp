#include <fstream>
#include <iostream>
#include <map>
#include <memory>

#include "commands.hpp"
#include "common.hpp"
#include "survctl/grid_io.hpp"
#include "survctl/verifier.hpp"

namespace survctl::cli {

namespace fs = std::filesystem;

namespace {

struct VerifyArgs {
  std::string check = "all";
  std::vector<std::string> grids;
  std::vector<std::string> runs;
  double noise_floor = 0.0;
  double window = 0.5;
  double lift_window = 2.0;
  std::uint64_t paths = 0;
  double dt = 1e-3;
  std::uint64_t seed = 1;
  std::string horizons = "10,40,160";
  std::string probes = "all";
  std::string points;
  double mc_horizon = 0.0;
  double barrier = 8.0;
  std::string crossing = "bridge";
  unsigned threads = 1;
  std::string out;
};

struct Loaded {
  std::string source;
  ValueGrid grid;
};

std::vector<Loaded> load_inputs(const VerifyArgs& a) {
  std::vector<Loaded> out;
  for (const auto& dir : a.runs) {
    const fs::path manifest = fs::path(dir) / "manifest.json";
    std::ifstream in(manifest);
    if (!in) throw Error(ErrorCode::kIo, "no manifest.json in " + dir + " (expected output of `survctl solve`)");
    nlohmann::json m;
    try {
      m = nlohmann::json::parse(in);
      for (const auto& g : m.at("grids")) {
        const fs::path meta = fs::path(dir) / g.at("meta").get<std::string>();
        out.push_back({meta.string(), load_grid(meta)});
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormat, "malformed manifest " + manifest.string() + ": " + e.what());
    }
  }
  for (const auto& path : a.grids) out.push_back({path, load_grid(path)});
  return out;
}

[[noreturn]] void missing(const std::string& check, const std::string& need) {
  throw Error(ErrorCode::kIo, "verify --check " + check + " needs " + need +
                                  ": pass --run DIR (a `survctl solve` output) or --grid PATH");
}

std::optional<double> noise(const VerifyArgs& a, const CLI::App& app) {
  if (app.count("--noise-floor") > 0) return a.noise_floor;
  return std::nullopt;
}

int run_verify(const VerifyArgs& a, CLI::App& app) {
  const std::vector<Loaded> inputs = load_inputs(a);
  const bool all = a.check == "all";
  if (all && inputs.empty()) {
    missing("all", "solved grids (the threshold probes alone run with --check thresholds)");
  }
  const auto wants = [&](const char* name) { return all || a.check == name; };

  std::vector<CheckReport> reports;
  Stopwatch watch;

  if (wants("basic")) {
    if (inputs.empty()) missing("basic", "at least one grid");
    for (const auto& in : inputs) reports.push_back(check_bounds_symmetry_monotonicity(in.grid));
  }

  if (wants("conjecture-v")) {
    bool any = false;
    for (const auto& in : inputs) {
      if (in.grid.spec().dim < 2) continue;
      if (all && in.grid.spec().kind != ValueKind::kAllSurvive) continue;
      any = true;
      reports.push_back(check_conjecture_v(in.grid, noise(a, app)));
    }
    if (!any && !all) missing("conjecture-v", "a V-grid with n >= 2");
  }

  if (wants("counterexample-u")) {
    CounterexampleOptions opt;
    opt.window = a.window;
    opt.noise_floor = noise(a, app);
    bool any = false;
    for (const auto& in : inputs) {
      if (in.grid.spec().dim != 2) continue;
      if (all && in.grid.spec().kind != ValueKind::kSurvivorCount) continue;
      any = true;
      reports.push_back(check_counterexample_u(in.grid, opt));
    }
    if (!any && !all) missing("counterexample-u", "a two-dimensional U-grid");
  }

  if (wants("lifting")) {
    LiftingOptions opt;
    opt.window = a.lift_window;
    opt.noise_floor = noise(a, app);
    bool any = false;
    for (const auto& lo : inputs) {
      for (const auto& hi : inputs) {
        const GridSpec& ls = lo.grid.spec();
        const GridSpec& hs = hi.grid.spec();
        if (hs.dim != ls.dim + 1 || ls.dim < 1) continue;
        if (all && (ls.kind != ValueKind::kSurvivorCount || hs.kind != ValueKind::kSurvivorCount ||
                    !(ls.params == hs.params) || ls.nodes != hs.nodes)) {
          continue;
        }
        any = true;
        reports.push_back(check_lifting(lo.grid, hi.grid, opt));
      }
    }
    if (!any && !all) missing("lifting", "U-grids of dimensions n and n+1 (same b, budget, m)");
  }

  if (wants("mc-vs-pde")) {
    const Loaded* top = nullptr;
    for (const auto& in : inputs) {
      if (!top || in.grid.spec().dim > top->grid.spec().dim) top = &in;
    }
    if (!top && !all) missing("mc-vs-pde", "a grid");
    if (top) {
      const GridSpec& s = top->grid.spec();
      McVsPdeOptions opt;
      if (!a.points.empty()) {
        opt.points = parse_points(a.points);
      } else if (s.dim == 2) {
        opt.points = s.kind == ValueKind::kAllSurvive ? std::vector<std::vector<double>>{{1.0, 1.0}, {0.5, 3.0}}
                                                      : std::vector<std::vector<double>>{{0.05, 0.15}};
      } else if (!all) {
        throw Error(ErrorCode::kConfig, "mc-vs-pde on an n != 2 grid needs --points");
      }
      if (!opt.points.empty()) {
        SimConfig& sim = opt.simulation;
        sim.paths = a.paths ? a.paths : 20000;
        sim.dt = a.dt;
        sim.seed = a.seed;
        sim.threads = a.threads;
        sim.crossing = parse_crossing(a.crossing);
        if (s.kind == ValueKind::kAllSurvive) {
          sim.estimator = Estimator::kDualBarrier;
          sim.barrier = a.barrier;
          sim.horizon = a.mc_horizon > 0.0 ? a.mc_horizon : 50.0;
        } else {
          sim.horizon = a.mc_horizon > 0.0 ? a.mc_horizon : 20.0;
        }
        reports.push_back(check_mc_vs_pde(top->grid, opt));
      }
    }
  }

  if (wants("thresholds")) {
    const std::uint64_t paths = a.paths ? a.paths : 100000;
    ThresholdOptions opt = a.probes == "v" ? ThresholdOptions::all_survive(paths, a.dt, a.seed, a.threads)
                                           : ThresholdOptions::defaults(paths, a.dt, a.seed, a.threads);
    opt.horizons = parse_doubles(a.horizons, "--horizons");
    for (auto& p : opt.probes) p.config.crossing = parse_crossing(a.crossing);
    reports.push_back(check_thresholds(opt));
  }

  nlohmann::json sources = nlohmann::json::array();
  for (const auto& in : inputs) sources.push_back(in.source);
  const fs::path out = a.out.empty() ? output_root() / "verify" : fs::path(a.out);
  write_json(out / "report.json", reports_to_json(reports));
  write_timing(out, "verify", watch, a.threads);
  std::cout << summary_table(reports);
  std::cout << "report: " << (out / "report.json").string() << "\n";

  const bool ok = std::all_of(reports.begin(), reports.end(), [](const CheckReport& r) { return r.passed; });
  return ok ? kOk : kCheckFailed;
}

}  // namespace

Command make_verify(CLI::App& parent) {
  auto a = std::make_shared<VerifyArgs>();
  Command c;
  CLI::App* app = parent.add_subcommand("verify", "Run structural checks on grids and simulations");
  app->add_option("--check", a->check, "Which check to run")
      ->check(CLI::IsMember({"basic", "conjecture-v", "counterexample-u", "lifting", "thresholds",
                             "mc-vs-pde", "all"}))
      ->capture_default_str();
  app->add_option("--grid", a->grids, "Grid file (meta, payload or stem); repeatable");
  app->add_option("--run", a->runs, "Directory written by `solve`; repeatable");
  app->add_option("--noise-floor", a->noise_floor, "Gradient noise floor (default 10 h)");
  app->add_option("--window", a->window, "Counterexample window (0, w]^2")->capture_default_str();
  app->add_option("--lift-window", a->lift_window, "Trace-deviation window (0, w]^n")->capture_default_str();
  app->add_option("--paths", a->paths, "Paths per estimate (default 20000 mc-vs-pde, 100000 thresholds)");
  app->add_option("--dt", a->dt, "Euler step")->capture_default_str();
  app->add_option("--seed", a->seed, "Unsigned 64-bit seed")->capture_default_str();
  app->add_option("--horizons", a->horizons, "Threshold horizon schedule")->capture_default_str();
  app->add_option("--probes", a->probes, "Threshold probes: all or v (all-survive only)")
      ->check(CLI::IsMember({"all", "v"}))
      ->capture_default_str();
  app->add_option("--points", a->points, "mc-vs-pde points, e.g. \"1,1;0.5,3\"");
  app->add_option("--mc-horizon", a->mc_horizon, "mc-vs-pde horizon (default 50 for V, 20 for U)");
  app->add_option("--barrier", a->barrier, "mc-vs-pde success barrier for V")->capture_default_str();
  app->add_option("--crossing", a->crossing, "bridge | discrete absorption test")
      ->check(CLI::IsMember({"bridge", "discrete"}))
      ->capture_default_str();
  app->add_option("--threads", a->threads, "Worker threads (0 = all cores)")->capture_default_str();
  app->add_option("--out", a->out, "Report directory (default $SURVCTL_OUTPUT_ROOT/verify)");
  app->add_option("--config", *c.config, "JSON file with defaults for these flags");
  c.app = app;
  c.run = [a, app] { return run_verify(*a, *app); };
  return c;
}

}  // namespace survctl::cli
