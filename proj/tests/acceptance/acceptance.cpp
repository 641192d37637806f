// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers as
// arguments to run a subset, e.g. `acceptance 1 6`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "survctl/closed_forms.hpp"
#include "survctl/grid_io.hpp"
#include "survctl/simulator.hpp"
#include "survctl/solver.hpp"
#include "survctl/verifier.hpp"

using namespace survctl;

namespace {

struct Outcome {
  bool passed = false;
  std::string measured;
};

struct Criterion {
  int id;
  const char* title;
  const char* tolerance;
  double limit_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

unsigned max_threads() { return std::max(4u, std::thread::hardware_concurrency()); }

// Solved grids shared between criteria, keyed by (kind, n, b, m).
class GridCache {
 public:
  const RecursiveSolution& get(ValueKind kind, int n, double b, int m) {
    const auto key = std::make_tuple(static_cast<int>(kind), n, b, m);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      it = cache_.emplace(key, solve_recursive(n, kind, DriftBudget::for_solver(b), m)).first;
    }
    return it->second;
  }

  std::vector<const ValueGrid*> all() const {
    std::vector<const ValueGrid*> out;
    for (const auto& [key, s] : cache_) {
      for (const ValueGrid& g : s.grids) out.push_back(&g);
    }
    return out;
  }

 private:
  std::map<std::tuple<int, int, double, int>, RecursiveSolution> cache_;
};

GridCache grids;

double sup_error(const ValueGrid& g, double lo, double hi, auto&& exact) {
  const GridSpec& s = g.spec();
  double worst = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const NodeIndex idx = s.unravel(i);
    std::vector<double> x(s.dim);
    bool inside = true;
    for (int k = 0; k < s.dim; ++k) {
      x[k] = decompactify(s.coordinate(idx[k]));
      inside = inside && x[k] >= lo && x[k] <= hi;
    }
    if (inside) worst = std::max(worst, std::abs(g[i] - exact(x)));
  }
  return worst;
}

double ms(const std::vector<double>& x) { return mckean_shepp_v2(x[0], x[1]); }

Outcome one_dimensional_exactness() {
  const GridSpec spec{1, 513, ValueKind::kAllSurvive, DriftBudget::for_solver(0.0)};
  const BoundaryOracle none(spec.kind, spec.params, spec.nodes);
  const Solution s = solve(spec, none);
  const double err = sup_error(s.grid, 0.0, 20.0, [](const std::vector<double>& x) { return survival_h(x[0]); });
  return {err <= 1e-3, fmt("sup error %.3e, outer iterations %d", err, s.grid.iterations)};
}

Outcome mckean_shepp() {
  const double e257 = sup_error(grids.get(ValueKind::kAllSurvive, 2, 0.0, 257).top(), 0.05, 10.0, ms);
  const double e513 = sup_error(grids.get(ValueKind::kAllSurvive, 2, 0.0, 513).top(), 0.05, 10.0, ms);
  const double ratio = e257 / e513;
  return {e257 <= 5e-3 && ratio >= 1.7, fmt("sup error m=257 %.3e, m=513 %.3e, ratio %.2f", e257, e513, ratio)};
}

Outcome conjecture_v() {
  bool ok = true;
  std::string measured;
  const auto run = [&](int n, double b, int m) {
    const CheckReport r = check_conjecture_v(grids.get(ValueKind::kAllSurvive, n, b, m).top());
    ok = ok && r.passed;
    const int violations = r.details.value("violations", -1);
    const int mismatches = r.details.value("argmax_mismatches", -1);
    measured += fmt("%sV%d b=%g: %d violations, %d argmax mismatches", measured.empty() ? "" : "; ", n, b,
                    violations, mismatches);
  };
  for (double b : {0.0, 0.5, 1.0}) run(2, b, 257);
  run(3, 0.0, 129);
  return {ok, measured};
}

Outcome counterexample_u() {
  bool ok = true;
  std::string measured;
  for (double b : {0.0, 1.0}) {
    const CheckReport r = check_counterexample_u(grids.get(ValueKind::kSurvivorCount, 2, b, 257).top());
    const bool reached = r.details.value("threshold_reached", false);
    ok = ok && r.passed && reached;
    measured += fmt("%sb=%g: positive-gap nodes %d, max gap %.4f, (s,3s) gap %.4f vs %.2f", b == 0.0 ? "" : "; ",
                    b, r.details.value("positive_gap_nodes", 0), r.details.value("max_gap", 0.0),
                    r.details.value("sequence_max_gap", 0.0), r.details.value("threshold", 0.0));
  }
  return {ok, measured};
}

Outcome lifting() {
  const RecursiveSolution& u3 = grids.get(ValueKind::kSurvivorCount, 3, 0.0, 129);
  const CheckReport r = check_lifting(u3.grids[1], u3.grids[2]);
  std::string trace;
  for (const auto& t : r.details["trace"]) {
    trace += fmt("%s%.6g", trace.empty() ? "" : ", ", t.value("deviation", 0.0));
  }
  return {r.passed, fmt("node gap %.4f, trace [%s]", r.details.value("counterexample_gap", 0.0), trace.c_str())};
}

SimConfig barrier_config(std::vector<double> x0, double barrier) {
  SimConfig c;
  c.x0 = std::move(x0);
  c.params = DriftBudget::for_simulator(0.0);
  c.dt = 1e-3;
  c.horizon = 100.0;
  c.barrier = barrier;
  c.estimator = Estimator::kDualBarrier;
  c.paths = 100000;
  c.seed = 20240601;
  return c;
}

Outcome flagship() {
  const SimEstimate e = estimate(barrier_config({1.0, 1.0}, 8.0), Laggard{});
  const double err = std::abs(e.mean - 0.593994);
  const double tol = 3.0 * e.std_error + 0.005;
  return {err <= tol, fmt("mean %.5f (stderr %.5f), |error| %.5f vs %.5f, truncated %.2g", e.mean, e.std_error, err,
                          tol, e.truncated_fraction)};
}

Outcome calibration_1d() {
  bool ok = true;
  std::string measured;
  for (double x0 : {0.25, 1.0}) {
    const SimEstimate e = estimate(barrier_config({x0}, 10.0), Fixed{0});
    const double err = std::abs(e.mean - survival_h(x0));
    const double tol = 3.0 * e.std_error + 0.005;
    ok = ok && err <= tol;
    measured += fmt("%sx0=%g: mean %.5f vs %.5f (|error| %.5f, tol %.5f)", measured.empty() ? "" : "; ", x0, e.mean,
                    survival_h(x0), err, tol);
  }
  return {ok, measured};
}

Outcome thresholds() {
  const CheckReport r = check_thresholds(ThresholdOptions::all_survive(100000, 1e-3, 7));
  std::string measured;
  for (const auto& p : r.details["probes"]) {
    std::string means;
    for (const auto& e : p["schedule"]) means += fmt("%s%.4f", means.empty() ? "" : " ", e.value("mean", 0.0));
    measured += fmt("%s%s: [%s] %s", measured.empty() ? "" : "; ", p.value("label", "").c_str(), means.c_str(),
                    p.value("passed", false) ? "ok" : "fails");
  }
  return {r.passed, measured};
}

Outcome determinism() {
  SolverOptions many;
  many.threads = max_threads();
  bool identical = true;
  for (ValueKind kind : {ValueKind::kAllSurvive, ValueKind::kSurvivorCount}) {
    const ValueGrid& one = grids.get(kind, 2, 0.0, 257).top();
    const ValueGrid threaded = solve_recursive(2, kind, DriftBudget::for_solver(0.0), 257, many).top();
    identical = identical && payload_sha256(one.values()) == payload_sha256(threaded.values());
  }
  SimConfig c = barrier_config({1.0, 1.0}, 8.0);
  c.paths = 20000;
  const SimEstimate a = estimate(c, Laggard{});
  c.threads = max_threads();
  const SimEstimate b = estimate(c, Laggard{});
  const bool same_estimate = a.to_json().dump() == b.to_json().dump();

  int checked = 0, failed = 0;
  double worst = kInf;
  for (const ValueGrid* g : grids.all()) {
    const CheckReport r = check_bounds_symmetry_monotonicity(*g);
    ++checked;
    failed += r.passed ? 0 : 1;
    worst = std::min(worst, r.margin);
  }
  return {identical && same_estimate && failed == 0,
          fmt("payloads %s, estimates %s (threads 1 vs %u); basic checks %d/%d pass, min margin %.3g",
              identical ? "identical" : "DIFFER", same_estimate ? "identical" : "DIFFER", max_threads(),
              checked - failed, checked, worst)};
}

Outcome mc_vs_pde() {
  McVsPdeOptions v;
  v.points = {{1.0, 1.0}, {0.5, 3.0}};
  v.simulation = barrier_config({1.0, 1.0}, 8.0);
  v.simulation.paths = 20000;
  v.simulation.horizon = 50.0;
  const CheckReport rv = check_mc_vs_pde(grids.get(ValueKind::kAllSurvive, 2, 0.0, 257).top(), v);

  McVsPdeOptions u;
  u.points = {{0.05, 0.15}};
  u.simulation = v.simulation;
  u.simulation.horizon = 20.0;
  const CheckReport ru = check_mc_vs_pde(grids.get(ValueKind::kSurvivorCount, 2, 0.0, 257).top(), u);
  const auto& up = ru.details["points"][0];
  const bool reported = up.contains("gap") && up.contains("gap_ci95");
  return {rv.passed && reported,
          fmt("V margin %.4f; U gap %.4f, CI [%.4f, %.4f]", rv.margin, up.value("gap", 0.0),
              up["gap_ci95"][0].get<double>(), up["gap_ci95"][1].get<double>())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "1-D exactness", "sup |u - H| <= 1e-3 on [0,20]", 1, one_dimensional_exactness},
      {2, "two-coordinate closed form", "sup err <= 5e-3 on [0.05,10]^2, ratio >= 1.7", 120, mckean_shepp},
      {3, "gradient ordering on V-grids", "0 violations above 10h", 900, conjecture_v},
      {4, "survivor-count counterexample", "gap > 0 somewhere; (s,3s) gap >= 1.5 (b=0), 4.5 (b=1)", 180,
       counterexample_u},
      {5, "dimension lifting", "node with gap > 10h; trace strictly decreasing", 1200, lifting},
      {6, "Monte Carlo flagship", "|mean - 0.593994| <= 3 se + 0.005", 120, flagship},
      {7, "1-D Monte Carlo calibration", "|mean - H(x0)| <= 3 se + 0.005", 60, calibration_1d},
      {8, "drift thresholds", "b=-0.4 final >= 0.01, b=-0.6 final <= 0.01 with separated CIs", 300, thresholds},
      {9, "determinism and invariants", "identical bytes; margins 1e-8 / 1e-9 / 0", 120, determinism},
      {10, "Monte Carlo against grid", "V within 3 se + 0.01; U gap reported", 180, mc_vs_pde},
  };

  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += o.passed ? 0 : 1;
    std::printf("[%s] C%-2d %s | %s | tolerance: %s | %.1f s (limit %.0f s%s)\n", o.passed ? "PASS" : "FAIL", c.id,
                c.title, o.measured.c_str(), c.tolerance, seconds, c.limit_seconds,
                seconds > c.limit_seconds ? ", over" : "");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
