#pragma once

// Structural checks on solved grids and Monte Carlo estimates. Every check
// returns a CheckReport; reports carry the hashes of their inputs so that a
// rerun on the same artifacts reproduces them exactly.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "survctl/grid.hpp"
#include "survctl/simulator.hpp"

namespace survctl {

struct CheckReport {
  std::string name;
  bool passed = false;
  // Slack against the tolerance: passed == (margin >= 0).
  double margin = 0.0;
  double tolerance = 0.0;
  std::vector<std::vector<double>> locations;  // orthant coordinates, worst first
  nlohmann::json metadata = nlohmann::json::object();
  nlohmann::json details = nlohmann::json::object();

  nlohmann::json to_json() const;
};

inline constexpr std::size_t kMaxLocations = 20;

nlohmann::json reports_to_json(std::span<const CheckReport> reports);
/// Fixed-width table: name, status, margin, tolerance.
std::string summary_table(std::span<const CheckReport> reports);

/// Provenance block for a grid: kind, n, m, b, budget, payload hash.
nlohmann::json grid_provenance(const ValueGrid& grid);

struct BasicCheckOptions {
  double symmetry_tolerance = 1e-8;
  double monotone_slack = 1e-9;
  double bound_slack = 0.0;
};

/// Value bounds 0 <= u <= prod/sum of H((b+a)x_i), permutation symmetry and
/// forward-difference monotonicity along each axis.
CheckReport check_bounds_symmetry_monotonicity(const ValueGrid& grid,
                                               const BasicCheckOptions& options = {});

/// Pairwise gradient ordering dV/dx_i >= dV/dx_j - noise_floor whenever
/// x_i < x_j - 2 h_x, plus the argmax restatement against the policy field.
/// noise_floor defaults to 10 h (compact spacing).
CheckReport check_conjecture_v(const ValueGrid& grid, std::optional<double> noise_floor = {});

struct CounterexampleOptions {
  double window = 0.5;  // orthant box (0, window]^2
  std::optional<double> noise_floor;  // default 10 h
  std::vector<double> sequence{0.32, 0.16, 0.08, 0.04, 0.02};  // s for the nodes (s, 3s)
  double threshold_fraction = 0.75;  // of the limiting gap 2 + 4b
};

/// Gap d2u - d1u over the wedge x1 < x2 of a two-dimensional U-grid. Passes
/// when some node's gap exceeds the noise floor; whether the gap along (s, 3s)
/// reaches threshold_fraction * (2 + 4b) is reported in details.
CheckReport check_counterexample_u(const ValueGrid& grid, const CounterexampleOptions& options = {});

struct LiftingOptions {
  double window = 2.0;  // orthant box (0, window]^n for the trace deviation
  std::vector<double> far_levels{0.9, 0.95, 0.99};  // compact y of the lifted coordinate
  std::optional<double> noise_floor;
};

/// Trace deviation sup_K |U^{n+1}(x, R) - 1 - U^n(x)| along increasing R and
/// a node of the (n+1)-grid whose first coordinate is the strict minimum yet
/// d2 U > d1 U + noise_floor.
CheckReport check_lifting(const ValueGrid& lower, const ValueGrid& upper,
                          const LiftingOptions& options = {});

struct ThresholdProbe {
  std::string label;
  SimConfig config;
  Policy policy;
  bool expect_positive = true;
  double floor = 0.01;  // final estimate >= floor (positive) or <= floor (vanishing)
};

struct ThresholdOptions {
  std::vector<double> horizons{10.0, 40.0, 160.0};
  std::vector<ThresholdProbe> probes;

  /// Probes at b = -1/n +- 0.1 with the even split, and b = -1 +- 0.1 with
  /// the budget on coordinate 1, for n = 2.
  static ThresholdOptions defaults(std::uint64_t paths, double dt, std::uint64_t seed,
                                   unsigned threads = 1);
  /// Only the two all-survive probes.
  static ThresholdOptions all_survive(std::uint64_t paths, double dt, std::uint64_t seed,
                                      unsigned threads = 1);
};

/// Horizon schedules per probe. Positive probes must end at or above their
/// floor with a per-unit-time decline that slows along the schedule;
/// vanishing probes must end at or below their floor and drop strictly with
/// non-overlapping 95% intervals.
CheckReport check_thresholds(const ThresholdOptions& options);

struct McVsPdeOptions {
  std::vector<std::vector<double>> points;
  SimConfig simulation;  // x0 is overwritten per point
  double stderr_multiple = 3.0;
  double absolute_band = 0.01;
  double dominance_stderr_multiple = 2.0;  // U: grid >= laggard - k * combined stderr
};

/// V-grids: grid-feedback and laggard estimates at each point must lie
/// within stderr_multiple * stderr + absolute_band of the interpolated grid
/// value. U-grids: grid-feedback against laggard on common random numbers,
/// reporting the gap and its interval.
CheckReport check_mc_vs_pde(const ValueGrid& grid, const McVsPdeOptions& options);

}  // namespace survctl
