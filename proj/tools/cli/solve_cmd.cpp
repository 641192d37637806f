#include <cctype>
#include <iostream>
#include <memory>

#include "commands.hpp"
#include "common.hpp"
#include "survctl/grid_io.hpp"
#include "survctl/solver.hpp"

namespace survctl::cli {

namespace {

struct SolveArgs {
  std::string kind;
  int n = 0;
  double b = 0.0;
  double budget = 1.0;
  int grid = 129;
  double tol = 1e-8;
  std::string inner = "krylov";
  int sweeps = 50;
  int max_outer = 200;
  unsigned threads = 1;
  std::string out;
};

int run_solve(const SolveArgs& a, CLI::App& app) {
  if (app.count("--kind") == 0 || app.count("--n") == 0) {
    throw Error(ErrorCode::kConfig, "solve needs --kind {v,u} and --n N");
  }
  const ValueKind kind = parse_kind(std::string(1, static_cast<char>(std::toupper(a.kind[0]))));
  const DriftBudget params = DriftBudget::for_solver(a.b, a.budget);
  if (a.n < 1 || a.n > kMaxDim) {
    throw Error(ErrorCode::kConfig, "--n must be between 1 and " + std::to_string(kMaxDim));
  }
  GridSpec{a.n, a.grid, kind, params}.validate();

  SolverOptions opt;
  opt.tolerance = a.tol;
  opt.inner = a.inner == "sweeps" ? InnerSolver::kSweeps : InnerSolver::kKrylov;
  opt.sweeps_per_outer = a.sweeps;
  opt.max_outer = a.max_outer;
  opt.threads = a.threads;

  const std::string label = kind_label(kind);
  const std::filesystem::path out =
      a.out.empty() ? output_root() / (label + std::to_string(a.n)) : std::filesystem::path(a.out);
  const nlohmann::json config{{"kind", label},  {"n", a.n},       {"b", a.b},
                              {"budget", a.budget}, {"grid", a.grid}, {"tol", a.tol},
                              {"inner", a.inner},  {"sweeps", a.sweeps}, {"max_outer", a.max_outer}};

  Stopwatch watch;
  const RecursiveSolution solution = solve_recursive(a.n, kind, params, a.grid, opt);

  nlohmann::json grids = nlohmann::json::array();
  std::string lower_sha;
  for (int d = 1; d <= a.n; ++d) {
    const ValueGrid& g = solution.grids[d - 1];
    const std::string name = label + std::to_string(d);
    const std::string sha = payload_sha256(g.values());
    nlohmann::json provenance{{"command", "solve"}, {"software", kVersion}, {"config", config}, {"dimension", d}};
    provenance["lower_payload_sha256"] = lower_sha.empty() ? nlohmann::json(nullptr) : nlohmann::json(lower_sha);
    const GridFiles files = save_grid(g, out, name, provenance);
    grids.push_back({{"n", d},
                     {"name", name},
                     {"meta", files.meta.filename().string()},
                     {"payload", files.payload.filename().string()},
                     {"payload_sha256", sha},
                     {"iterations", g.iterations},
                     {"residual", g.residual}});
    std::cerr << "  " << name << ": m=" << a.grid << " iterations=" << g.iterations
              << " residual=" << g.residual << "\n";
    lower_sha = sha;
  }
  write_json(out / "manifest.json", nlohmann::json{{"command", "solve"},
                                                   {"software", kVersion},
                                                   {"config", config},
                                                   {"grids", grids}});
  write_timing(out, "solve", watch, a.threads);
  std::cout << "wrote " << a.n << " grid(s) and manifest to " << out.string() << "\n";
  return kOk;
}

}  // namespace

Command make_solve(CLI::App& parent) {
  auto a = std::make_shared<SolveArgs>();
  Command c;
  CLI::App* app = parent.add_subcommand("solve", "Solve the HJB equation for dimensions 1..n and write grids");
  app->add_option("--kind", a->kind, "v: all coordinates survive, u: expected survivor count")
      ->check(CLI::IsMember({"v", "u", "V", "U"}));
  app->add_option("--n", a->n, "Number of coordinates (1-4)");
  app->add_option("--b", a->b, "Common drift b >= 0")->capture_default_str();
  app->add_option("--budget", a->budget, "Total allocation budget a")->capture_default_str();
  app->add_option("--grid", a->grid, "Nodes per axis m (odd, >= 17)")->capture_default_str();
  app->add_option("--tol", a->tol, "Outer sup-norm tolerance")->capture_default_str();
  app->add_option("--inner", a->inner, "Inner linear solver")
      ->check(CLI::IsMember({"krylov", "sweeps"}))
      ->capture_default_str();
  app->add_option("--sweeps", a->sweeps, "Gauss-Seidel sweeps per outer iteration")->capture_default_str();
  app->add_option("--max-outer", a->max_outer, "Outer iteration cap")->capture_default_str();
  app->add_option("--threads", a->threads, "Worker threads (0 = all cores)")->capture_default_str();
  app->add_option("--out", a->out, "Output directory (default $SURVCTL_OUTPUT_ROOT/<K><n>)");
  app->add_option("--config", *c.config, "JSON file with defaults for these flags");
  c.app = app;
  c.run = [a, app] { return run_solve(*a, *app); };
  return c;
}

}  // namespace survctl::cli
