#include "survctl/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "survctl/closed_forms.hpp"
#include "survctl/error.hpp"
#include "survctl/grid_io.hpp"
#include "survctl/solver.hpp"

namespace survctl {

namespace {

using nlohmann::json;

std::vector<double> orthant_of(const GridSpec& spec, const NodeIndex& idx) {
  std::vector<double> x(spec.dim);
  for (int k = 0; k < spec.dim; ++k) x[k] = decompactify(spec.coordinate(idx[k]));
  return x;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json coords_json(std::span<const double> x) {
  json out = json::array();
  for (double v : x) out.push_back(finite_or_null(v));
  return out;
}

// Keeps the worst offenders by severity without storing every violation.
class Offenders {
 public:
  void add(double severity, const GridSpec& spec, const NodeIndex& idx) {
    entries_.push_back({severity, spec.linear(idx)});
    if (entries_.size() > 8 * kMaxLocations) trim();
  }

  std::vector<std::vector<double>> finish(const GridSpec& spec) {
    trim();
    std::vector<std::vector<double>> out;
    for (const auto& e : entries_) out.push_back(orthant_of(spec, spec.unravel(e.node)));
    return out;
  }

 private:
  struct Entry {
    double severity;
    std::size_t node;
  };

  void trim() {
    // Ties broken by node so that the kept set never depends on insertion order.
    auto worse = [](const Entry& a, const Entry& b) {
      return a.severity != b.severity ? a.severity > b.severity : a.node < b.node;
    };
    std::sort(entries_.begin(), entries_.end(), worse);
    if (entries_.size() > kMaxLocations) entries_.resize(kMaxLocations);
  }

  std::vector<Entry> entries_;
};

bool interior(const GridSpec& spec, const NodeIndex& idx) {
  for (int k = 0; k < spec.dim; ++k) {
    if (idx[k] == 0 || idx[k] == spec.nodes - 1) return false;
  }
  return true;
}

// One component of a gradient field as a grid, so it can be interpolated.
ValueGrid component(const GradientField& g, int axis) {
  std::vector<double> values(g.spec.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = g.at(i, axis);
  return ValueGrid(g.spec, std::move(values));
}

json sub_check(double worst, double tolerance, double margin) {
  return json{{"worst", worst}, {"tolerance", tolerance}, {"margin", margin}, {"passed", margin >= 0.0}};
}

void require_kind(const ValueGrid& grid, ValueKind kind, const char* check) {
  if (grid.spec().kind != kind) {
    throw Error(ErrorCode::kKind, std::string(check) + " needs a " + kind_label(kind) + "-grid, got a " +
                                      kind_label(grid.spec().kind) + "-grid");
  }
}

}  // namespace

json CheckReport::to_json() const {
  json locs = json::array();
  for (const auto& x : locations) locs.push_back(coords_json(x));
  return json{
      {"check", name},
      {"status", passed ? "pass" : "fail"},
      {"margin", finite_or_null(margin)},
      {"tolerance", finite_or_null(tolerance)},
      {"locations", locs},
      {"metadata", metadata},
      {"details", details},
  };
}

json reports_to_json(std::span<const CheckReport> reports) {
  json out = json::array();
  for (const auto& r : reports) out.push_back(r.to_json());
  return out;
}

std::string summary_table(std::span<const CheckReport> reports) {
  const auto subject = [](const CheckReport& r) -> std::string {
    const auto label = [](const json& g) {
      std::ostringstream out;
      out << g.value("kind", "?") << g.value("n", 0) << " m=" << g.value("m", 0) << " b=" << g.value("b", 0.0);
      return out.str();
    };
    if (r.metadata.contains("grid")) return label(r.metadata["grid"]);
    if (r.metadata.contains("upper")) return label(r.metadata["lower"]) + " -> " + label(r.metadata["upper"]);
    return "-";
  };
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-30s %-28s %-6s %14s %14s\n", "check", "input", "status", "margin",
                "tolerance");
  out << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-30s %-28s %-6s %14.6g %14.6g\n", r.name.c_str(),
                  subject(r).c_str(), r.passed ? "PASS" : "FAIL", r.margin, r.tolerance);
    out << line;
  }
  return out.str();
}

json grid_provenance(const ValueGrid& grid) {
  const GridSpec& s = grid.spec();
  return json{{"kind", kind_label(s.kind)},
              {"n", s.dim},
              {"m", s.nodes},
              {"b", s.params.drift},
              {"budget", s.params.budget},
              {"payload_sha256", payload_sha256(grid.values())}};
}

CheckReport check_bounds_symmetry_monotonicity(const ValueGrid& grid,
                                               const BasicCheckOptions& options) {
  const GridSpec& spec = grid.spec();
  const int n = spec.dim;
  const int m = spec.nodes;
  const std::size_t size = spec.size();

  std::vector<double> h_of(m);
  for (int i = 0; i < m; ++i) h_of[i] = value_1d(decompactify(spec.coordinate(i)), spec.params);

  Offenders offenders;
  double worst_bound = -kInf;
  double worst_monotone = -kInf;
  for (std::size_t node = 0; node < size; ++node) {
    const NodeIndex idx = spec.unravel(node);
    const double v = grid[node];
    double cap = spec.kind == ValueKind::kAllSurvive ? 1.0 : 0.0;
    // Sum coordinates at infinity last, the way the face data adds them, so
    // that the bound and the datum round identically.
    int at_infinity = 0;
    for (int k = 0; k < n; ++k) {
      if (spec.kind == ValueKind::kAllSurvive) cap *= h_of[idx[k]];
      else if (idx[k] == m - 1) ++at_infinity;
      else cap += h_of[idx[k]];
    }
    if (at_infinity) cap = at_infinity + cap;
    const double violation = std::max(-v, v - cap);
    worst_bound = std::max(worst_bound, violation);
    if (violation > options.bound_slack) offenders.add(violation - options.bound_slack, spec, idx);

    for (int k = 0; k < n; ++k) {
      if (idx[k] + 1 >= m) continue;
      const double drop = v - grid[node + spec.stride(k)];
      worst_monotone = std::max(worst_monotone, drop);
      if (drop > options.monotone_slack) offenders.add(drop - options.monotone_slack, spec, idx);
    }
  }

  double worst_symmetry = 0.0;
  std::array<int, kMaxDim> perm{};
  std::iota(perm.begin(), perm.begin() + n, 0);
  while (std::next_permutation(perm.begin(), perm.begin() + n)) {
    for (std::size_t node = 0; node < size; ++node) {
      const NodeIndex idx = spec.unravel(node);
      NodeIndex image{};
      for (int k = 0; k < n; ++k) image[k] = idx[perm[k]];
      const double diff = std::abs(grid[node] - grid.at(image));
      worst_symmetry = std::max(worst_symmetry, diff);
      if (diff > options.symmetry_tolerance) offenders.add(diff - options.symmetry_tolerance, spec, idx);
    }
  }

  const double bound_margin = options.bound_slack - worst_bound;
  const double monotone_margin = options.monotone_slack - worst_monotone;
  const double symmetry_margin = options.symmetry_tolerance - worst_symmetry;

  CheckReport r;
  r.name = "bounds-symmetry-monotonicity";
  r.margin = std::min({bound_margin, monotone_margin, symmetry_margin});
  r.tolerance = r.margin == bound_margin      ? options.bound_slack
                : r.margin == monotone_margin ? options.monotone_slack
                                              : options.symmetry_tolerance;
  r.passed = r.margin >= 0.0;
  r.locations = offenders.finish(spec);
  r.metadata = json{{"grid", grid_provenance(grid)}};
  r.details = json{
      {"bounds", sub_check(worst_bound, options.bound_slack, bound_margin)},
      {"monotonicity", sub_check(worst_monotone, options.monotone_slack, monotone_margin)},
      {"symmetry", sub_check(worst_symmetry, options.symmetry_tolerance, symmetry_margin)},
  };
  return r;
}

CheckReport check_conjecture_v(const ValueGrid& grid, std::optional<double> noise_floor) {
  require_kind(grid, ValueKind::kAllSurvive, "conjecture-v");
  const GridSpec& spec = grid.spec();
  if (spec.dim < 2) throw Error(ErrorCode::kDomain, "conjecture-v needs n >= 2");
  const int n = spec.dim;
  const double h = spec.spacing();
  const double noise = noise_floor.value_or(10.0 * h);

  const GradientField g = gradient(grid);
  const PolicyField policy = extract_policy(grid);

  std::vector<double> x_of(spec.nodes), hx_of(spec.nodes);
  for (int i = 0; i + 1 < spec.nodes; ++i) {
    x_of[i] = decompactify(spec.coordinate(i));
    hx_of[i] = decompactify(spec.coordinate(i + 1)) - x_of[i];
  }

  Offenders offenders;
  double worst = -kInf;
  std::size_t pairs = 0, violations = 0, argmax_nodes = 0, mismatches = 0;
  for (std::size_t node = 0; node < spec.size(); ++node) {
    const NodeIndex idx = spec.unravel(node);
    if (!interior(spec, idx)) continue;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double sep = 2.0 * std::max(hx_of[idx[i]], hx_of[idx[j]]);
        if (!(x_of[idx[i]] < x_of[idx[j]] - sep)) continue;
        ++pairs;
        const double d = g.at(node, j) - g.at(node, i);
        worst = std::max(worst, d);
        if (d > noise) {
          ++violations;
          offenders.add(d - noise, spec, idx);
        }
      }
    }

    int low = 0;
    bool unique = true;
    for (int k = 1; k < n; ++k) {
      if (idx[k] < idx[low]) {
        low = k;
        unique = true;
      } else if (idx[k] == idx[low]) {
        unique = false;
      }
    }
    if (!unique) continue;
    int top = 0;
    for (int k = 1; k < n; ++k) {
      if (g.at(node, k) > g.at(node, top)) top = k;
    }
    double second = -kInf;
    for (int k = 0; k < n; ++k) {
      if (k != top) second = std::max(second, g.at(node, k));
    }
    if (g.at(node, top) - second <= noise) continue;
    ++argmax_nodes;
    if (policy.at(idx) != low) {
      ++mismatches;
      offenders.add(g.at(node, top) - g.at(node, low), spec, idx);
    }
  }

  const double pair_margin = pairs ? noise - worst : noise;
  CheckReport r;
  r.name = "conjecture-v";
  r.tolerance = noise;
  r.margin = mismatches ? std::min(pair_margin, -static_cast<double>(mismatches)) : pair_margin;
  r.passed = violations == 0 && mismatches == 0;
  r.locations = offenders.finish(spec);
  r.metadata = json{{"grid", grid_provenance(grid)}, {"noise_floor", noise}};
  r.details = json{
      {"pairs_checked", pairs},
      {"violations", violations},
      {"worst_gap", pairs ? json(worst) : json(nullptr)},
      {"argmax_nodes_checked", argmax_nodes},
      {"argmax_mismatches", mismatches},
  };
  return r;
}

CheckReport check_counterexample_u(const ValueGrid& grid, const CounterexampleOptions& options) {
  require_kind(grid, ValueKind::kSurvivorCount, "counterexample-u");
  const GridSpec& spec = grid.spec();
  if (spec.dim != 2) throw Error(ErrorCode::kDomain, "counterexample-u needs a two-dimensional grid");
  const double noise = options.noise_floor.value_or(10.0 * spec.spacing());
  const double b = spec.params.drift;
  const double a = spec.params.budget;

  const GradientField g = gradient(grid);
  Offenders offenders;
  double max_gap = -kInf;
  std::vector<double> max_at;
  std::size_t wedge_nodes = 0, positive = 0;
  for (std::size_t node = 0; node < spec.size(); ++node) {
    const NodeIndex idx = spec.unravel(node);
    if (!interior(spec, idx) || idx[0] >= idx[1]) continue;
    if (decompactify(spec.coordinate(idx[1])) > options.window) continue;
    ++wedge_nodes;
    const double gap = g.at(node, 1) - g.at(node, 0);
    if (gap > max_gap) {
      max_gap = gap;
      max_at = orthant_of(spec, idx);
    }
    if (gap > noise) {
      ++positive;
      offenders.add(gap, spec, idx);
    }
  }

  const ValueGrid d1 = component(g, 0);
  const ValueGrid d2 = component(g, 1);
  const double limit = 2.0 * (b + a) + 2.0 * b;
  const double threshold = options.threshold_fraction * limit;
  json sequence = json::array();
  double best_sequence_gap = -kInf;
  for (double s : options.sequence) {
    const double y[] = {compactify(s), compactify(3.0 * s)};
    const double p1 = d1.interpolate(y);
    const double p2 = d2.interpolate(y);
    best_sequence_gap = std::max(best_sequence_gap, p2 - p1);
    sequence.push_back(json{{"s", s}, {"d1", p1}, {"d2", p2}, {"gap", p2 - p1}});
  }

  CheckReport r;
  r.name = "counterexample-u";
  r.tolerance = noise;
  r.margin = wedge_nodes ? max_gap - noise : -noise;
  r.passed = positive > 0;
  r.locations = offenders.finish(spec);
  r.metadata = json{{"grid", grid_provenance(grid)}, {"noise_floor", noise}, {"window", options.window}};
  r.details = json{
      {"wedge_nodes", wedge_nodes},
      {"positive_gap_nodes", positive},
      {"max_gap", wedge_nodes ? json(max_gap) : json(nullptr)},
      {"max_gap_at", coords_json(max_at)},
      {"sequence", sequence},
      {"limit_gap", limit},
      {"threshold", threshold},
      {"sequence_max_gap", best_sequence_gap},
      {"threshold_reached", best_sequence_gap >= threshold},
  };
  return r;
}

CheckReport check_lifting(const ValueGrid& lower, const ValueGrid& upper, const LiftingOptions& options) {
  require_kind(lower, ValueKind::kSurvivorCount, "lifting");
  require_kind(upper, ValueKind::kSurvivorCount, "lifting");
  const GridSpec& ls = lower.spec();
  const GridSpec& us = upper.spec();
  if (!(ls.params == us.params)) {
    throw Error(ErrorCode::kProvenance, "lifting grids were solved for different (b, budget)");
  }
  if (ls.nodes != us.nodes) throw Error(ErrorCode::kProvenance, "lifting grids have different m");
  if (us.dim != ls.dim + 1) {
    throw Error(ErrorCode::kProvenance, "lifting needs grids of dimensions n and n+1");
  }
  const int n = ls.dim;
  const double noise = options.noise_floor.value_or(10.0 * us.spacing());

  // Trace deviation over the window, lifted coordinate last.
  std::vector<double> deviation(options.far_levels.size(), 0.0);
  std::vector<double> y(n + 1);
  for (std::size_t node = 0; node < ls.size(); ++node) {
    const NodeIndex idx = ls.unravel(node);
    if (!interior(ls, idx)) continue;
    bool inside = true;
    for (int k = 0; k < n; ++k) {
      y[k] = ls.coordinate(idx[k]);
      inside = inside && decompactify(y[k]) <= options.window;
    }
    if (!inside) continue;
    for (std::size_t l = 0; l < options.far_levels.size(); ++l) {
      y[n] = options.far_levels[l];
      const double dev = std::abs(upper.interpolate(y) - 1.0 - lower[node]);
      deviation[l] = std::max(deviation[l], dev);
    }
  }
  double decrease_margin = kInf;
  json trace = json::array();
  for (std::size_t l = 0; l < deviation.size(); ++l) {
    trace.push_back(json{{"y", options.far_levels[l]},
                         {"R", decompactify(options.far_levels[l])},
                         {"deviation", deviation[l]}});
    if (l > 0) decrease_margin = std::min(decrease_margin, deviation[l - 1] - deviation[l]);
  }
  const bool decreasing = deviation.size() < 2 || decrease_margin > 0.0;

  // Node with the first coordinate strictly smallest and d2 > d1 + noise.
  const GradientField g = gradient(upper);
  Offenders found;
  double best_gap = -kInf, best_far_gap = -kInf;
  std::vector<double> best_at, best_far_at;
  const double far = options.far_levels.empty() ? 1.0 : options.far_levels.front();
  for (std::size_t node = 0; node < us.size(); ++node) {
    const NodeIndex idx = us.unravel(node);
    if (!interior(us, idx)) continue;
    bool first_min = true;
    for (int k = 1; k <= n; ++k) first_min = first_min && idx[0] < idx[k];
    if (!first_min) continue;
    const double gap = g.at(node, 1) - g.at(node, 0);
    if (gap > best_gap) {
      best_gap = gap;
      best_at = orthant_of(us, idx);
    }
    if (us.coordinate(idx[n]) >= far && gap > best_far_gap) {
      best_far_gap = gap;
      best_far_at = orthant_of(us, idx);
    }
    if (gap > noise) found.add(gap, us, idx);
  }
  const double node_margin = best_gap - noise;

  CheckReport r;
  r.name = "lifting";
  r.tolerance = noise;
  r.margin = std::min(node_margin, decreasing ? std::max(decrease_margin, 0.0) : decrease_margin);
  r.passed = decreasing && node_margin > 0.0;
  r.locations = found.finish(us);
  r.metadata = json{{"lower", grid_provenance(lower)},
                    {"upper", grid_provenance(upper)},
                    {"noise_floor", noise},
                    {"window", options.window}};
  r.details = json{
      {"trace", trace},
      {"trace_decreasing", decreasing},
      {"counterexample_gap", std::isfinite(best_gap) ? json(best_gap) : json(nullptr)},
      {"counterexample_at", coords_json(best_at)},
      {"far_counterexample_gap", std::isfinite(best_far_gap) ? json(best_far_gap) : json(nullptr)},
      {"far_counterexample_at", coords_json(best_far_at)},
  };
  return r;
}

ThresholdOptions ThresholdOptions::all_survive(std::uint64_t paths, double dt, std::uint64_t seed,
                                               unsigned threads) {
  ThresholdOptions o;
  for (double b : {-0.4, -0.6}) {
    ThresholdProbe p;
    p.config.x0 = {2.0, 2.0};
    p.config.params = DriftBudget::for_simulator(b, 1.0);
    p.config.dt = dt;
    p.config.paths = paths;
    p.config.seed = seed;
    p.config.threads = threads;
    p.config.payoff = Payoff::kAllSurvive;
    p.policy = ConstantSplit{{0.5, 0.5}};
    p.expect_positive = b > -0.5;
    p.floor = 0.01;
    p.label = std::string("V2 b=") + (b > -0.5 ? "-0.4" : "-0.6");
    o.probes.push_back(std::move(p));
  }
  return o;
}

ThresholdOptions ThresholdOptions::defaults(std::uint64_t paths, double dt, std::uint64_t seed,
                                            unsigned threads) {
  ThresholdOptions o = all_survive(paths, dt, seed, threads);
  // Half the surviving mass of the pushed coordinate, H(0.1 * 1) / 2.
  const double u_floor = 0.5 * survival_h(0.1);
  for (double b : {-0.9, -1.1}) {
    ThresholdProbe p;
    p.config.x0 = {1.0, 5.0};
    p.config.params = DriftBudget::for_simulator(b, 1.0);
    p.config.dt = dt;
    p.config.paths = paths;
    p.config.seed = seed;
    p.config.threads = threads;
    p.config.payoff = Payoff::kSurvivorCount;
    p.policy = Fixed{0};
    p.expect_positive = b > -1.0;
    p.floor = u_floor;
    p.label = std::string("U2 b=") + (b > -1.0 ? "-0.9" : "-1.1");
    o.probes.push_back(std::move(p));
  }
  return o;
}

CheckReport check_thresholds(const ThresholdOptions& options) {
  if (options.probes.empty()) throw Error(ErrorCode::kConfig, "no threshold probes configured");
  CheckReport r;
  r.name = "thresholds";
  r.margin = kInf;
  r.passed = true;
  json probes = json::array();
  for (const ThresholdProbe& probe : options.probes) {
    SimConfig cfg = probe.config;
    cfg.estimator = Estimator::kHorizonTruncation;
    cfg.horizon = options.horizons.back();
    const std::vector<SimEstimate> est = horizon_schedule(cfg, probe.policy, options.horizons);

    json schedule = json::array();
    for (const auto& e : est) schedule.push_back(e.to_json());
    const double final_mean = est.back().mean;
    double final_slack = 0.0, order_slack = kInf;
    if (probe.expect_positive) {
      final_slack = final_mean - probe.floor;
      if (est.size() >= 3) {
        const auto rate = [&](std::size_t k) {
          return (est[k].mean - est[k + 1].mean) / (options.horizons[k + 1] - options.horizons[k]);
        };
        order_slack = rate(0) - rate(est.size() - 2);
      }
    } else {
      final_slack = probe.floor - final_mean;
      for (std::size_t k = 0; k + 1 < est.size(); ++k) {
        order_slack = std::min(order_slack, est[k].ci_lo - est[k + 1].ci_hi);
      }
    }
    const bool ok = final_slack >= 0.0 && (order_slack >= 0.0 || !std::isfinite(order_slack));
    const double margin = std::min(final_slack, order_slack);
    r.passed = r.passed && ok;
    r.margin = std::min(r.margin, margin);
    probes.push_back(json{{"label", probe.label},
                          {"policy", describe(probe.policy)},
                          {"config", cfg.to_json()},
                          {"expect", probe.expect_positive ? "positive" : "vanishing"},
                          {"floor", probe.floor},
                          {"schedule", schedule},
                          {"final_slack", final_slack},
                          {"order_slack", finite_or_null(order_slack)},
                          {"passed", ok}});
  }
  r.tolerance = 0.0;
  r.metadata = json{{"horizons", options.horizons}};
  r.details = json{{"probes", probes}};
  return r;
}

CheckReport check_mc_vs_pde(const ValueGrid& grid, const McVsPdeOptions& options) {
  const GridSpec& spec = grid.spec();
  if (options.points.empty()) throw Error(ErrorCode::kConfig, "mc-vs-pde needs at least one point");
  const Policy feedback = make_grid_feedback(grid);
  const Policy laggard = Laggard{};

  SimConfig base = options.simulation;
  base.params = spec.params;
  if (spec.kind == ValueKind::kSurvivorCount) {
    base.payoff = Payoff::kSurvivorCount;
    base.estimator = Estimator::kHorizonTruncation;
  } else {
    base.payoff = Payoff::kAllSurvive;
  }

  CheckReport r;
  r.name = "mc-vs-pde";
  r.margin = kInf;
  json rows = json::array();
  for (const auto& point : options.points) {
    if (static_cast<int>(point.size()) != spec.dim) {
      throw Error(ErrorCode::kConfig, "mc-vs-pde point dimension does not match the grid");
    }
    SimConfig cfg = base;
    cfg.x0 = point;
    std::vector<double> y(point.size());
    for (std::size_t k = 0; k < point.size(); ++k) y[k] = compactify(point[k]);
    const double value = grid.interpolate(y);
    const SimEstimate by_grid = estimate(cfg, feedback);
    const SimEstimate by_laggard = estimate(cfg, laggard);

    json row{{"x", point},
             {"grid_value", value},
             {"grid_feedback", by_grid.to_json()},
             {"laggard", by_laggard.to_json()}};
    if (spec.kind == ValueKind::kAllSurvive) {
      for (const auto* e : {&by_grid, &by_laggard}) {
        const double band = options.stderr_multiple * e->std_error + options.absolute_band;
        const double slack = band - std::abs(e->mean - value);
        r.margin = std::min(r.margin, slack);
        if (slack < 0.0) r.locations.push_back(point);
      }
      row["band_grid"] = options.stderr_multiple * by_grid.std_error + options.absolute_band;
      row["band_laggard"] = options.stderr_multiple * by_laggard.std_error + options.absolute_band;
    } else {
      const double gap = by_grid.mean - by_laggard.mean;
      const double se = std::hypot(by_grid.std_error, by_laggard.std_error);
      const double slack = gap + options.dominance_stderr_multiple * se;
      r.margin = std::min(r.margin, slack);
      if (slack < 0.0) r.locations.push_back(point);
      row["gap"] = gap;
      row["gap_stderr"] = se;
      row["gap_ci95"] = {gap - 1.96 * se, gap + 1.96 * se};
      row["strict_dominance"] = gap - 1.96 * se > 0.0;
    }
    rows.push_back(std::move(row));
  }
  if (r.locations.size() > kMaxLocations) r.locations.resize(kMaxLocations);
  r.passed = r.margin >= 0.0;
  r.tolerance = spec.kind == ValueKind::kAllSurvive ? options.absolute_band : 0.0;
  r.metadata = json{{"grid", grid_provenance(grid)}, {"simulation", base.to_json()}};
  r.details = json{{"points", rows}};
  return r;
}

}  // namespace survctl
