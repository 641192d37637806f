#pragma once

// Euler-Maruyama simulation of n coordinates
//   dX^i = (b + phi^i) dt + dW^i,  absorbed at 0,
// under feedback allocation policies with sum_i phi^i <= budget.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "survctl/closed_forms.hpp"
#include "survctl/grid.hpp"

namespace survctl {

/// Full budget to the smallest alive coordinate, lowest index on ties.
struct Laggard {};
/// Budget split evenly among alive coordinates.
struct Uniform {};
/// Full budget to one coordinate (0-based) while it is alive.
struct Fixed {
  int coordinate = 0;
};
/// Fixed per-coordinate rates; absorbed coordinates get nothing.
struct ConstantSplit {
  std::vector<double> weights;
};
/// Full budget to the coordinate the solved grid's argmax selects at the
/// nearest interior node. With fewer alive coordinates than the grid has
/// dimensions, falls back to Laggard among the alive ones.
struct GridFeedback {
  std::shared_ptr<const ValueGrid> grid;
  std::shared_ptr<const PolicyField> field;
  std::string source;  // payload hash, for provenance echo
};

using Policy = std::variant<Laggard, Uniform, Fixed, GridFeedback, ConstantSplit>;

GridFeedback make_grid_feedback(ValueGrid grid);

/// "laggard", "uniform", "fixed:1", "split:0.5,0.5", "grid:<sha256>".
/// Coordinates are 1-based in descriptors.
std::string describe(const Policy& policy);

/// Parses the descriptor forms above except grid:, which needs a loaded grid.
Policy parse_policy(const std::string& descriptor);

enum class Payoff { kAllSurvive, kSurvivorCount };
/// Absorption test between steps. kDiscrete only looks at the step endpoint;
/// kBridge also absorbs with the Brownian-bridge probability of having
/// touched 0 inside the step, exp(-2 x x' / dt), which removes the O(sqrt(dt))
/// upward bias of endpoint monitoring.
enum class Crossing { kBridge, kDiscrete };
enum class Estimator { kHorizonTruncation, kDualBarrier };

const char* payoff_label(Payoff p);        // "all" / "count"
const char* estimator_label(Estimator e);  // "horizon" / "barrier"
const char* crossing_label(Crossing c);    // "bridge" / "discrete"
Payoff parse_payoff(const std::string& s);
Estimator parse_estimator(const std::string& s);
Crossing parse_crossing(const std::string& s);

struct SimConfig {
  std::vector<double> x0;
  DriftBudget params;
  double dt = 1e-3;
  double horizon = 50.0;
  std::optional<double> barrier;
  std::uint64_t paths = 10000;
  std::uint64_t seed = 0;
  Payoff payoff = Payoff::kAllSurvive;
  Estimator estimator = Estimator::kHorizonTruncation;
  Crossing crossing = Crossing::kBridge;
  unsigned threads = 1;  // 0 = hardware concurrency; never changes results

  int dim() const { return static_cast<int>(x0.size()); }
  /// Throws Error(kConfig) on inconsistent settings.
  void validate() const;
  nlohmann::json to_json() const;
};

struct SimEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::uint64_t paths = 0;
  double truncated_fraction = 0.0;
  Estimator mode = Estimator::kHorizonTruncation;
  double horizon = 0.0;

  nlohmann::json to_json() const;
};

struct PathState {
  std::vector<double> x;
  std::vector<std::uint8_t> alive;

  explicit PathState(std::span<const double> x0);
  int alive_count() const;
};

/// Allocation phi for the current state; phi_i = 0 on absorbed coordinates.
void allocate(const Policy& policy, const PathState& state, const DriftBudget& params,
              std::span<double> phi);

/// One Euler step using n standard normal draws; coordinates reaching <= 0
/// are absorbed at exactly 0 and never move again. With n uniforms in
/// `bridge`, a coordinate that stays positive is also absorbed when
/// bridge[i] < exp(-2 x x' / dt).
void step(PathState& state, const Policy& policy, const DriftBudget& params, double dt,
          std::span<const double> noise, std::span<const double> bridge = {});

struct PathOutcome {
  double payoff = 0.0;
  bool truncated = false;
};

PathOutcome run_path(const SimConfig& config, const Policy& policy, std::uint64_t path_index);

/// Payoff of one path at each horizon (same random stream for all horizons).
std::vector<PathOutcome> run_path_schedule(const SimConfig& config, const Policy& policy,
                                           std::uint64_t path_index,
                                           std::span<const double> horizons);

SimEstimate estimate(const SimConfig& config, const Policy& policy);

/// Estimates at strictly increasing horizons with common random numbers.
std::vector<SimEstimate> horizon_schedule(const SimConfig& config, const Policy& policy,
                                          std::span<const double> horizons);

/// Aggregates per-path payoffs into mean / standard error / 95% interval.
SimEstimate summarize(std::span<const double> payoffs, std::uint64_t truncated,
                      Estimator mode, double horizon);

}  // namespace survctl
